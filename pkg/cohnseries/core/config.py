"""
应用配置

只有命令行前端读取这些设置；库函数全部显式传参。
"""
from typing import Optional
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """应用设置"""

    model_config = SettingsConfigDict(
        env_prefix="COHNSERIES_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # 计算默认值
    default_order: int = Field(
        default=6,
        ge=0,
        description="默认截断阶数 N"
    )
    default_mu: int = Field(
        default=1,
        ge=1,
        description="默认不定元个数 mu"
    )
    default_ring: str = Field(
        default="Z",
        description="默认系数环规格: Z, free:f,s,g, S:m, S:inf, quot:..."
    )
    neumann_bound: Optional[int] = Field(
        default=None,
        ge=0,
        description="分次求逆的次数界（为空时按矩阵大小自动计算）"
    )

    # 输出设置
    output_format: str = Field(
        default="text",
        description="输出格式: text, json"
    )

    # 日志设置
    log_level: str = Field(
        default="WARNING",
        description="日志级别"
    )
    log_format: str = Field(
        default="text",
        description="日志格式: json, text"
    )


# 全局设置实例
settings = Settings()
