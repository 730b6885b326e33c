"""
验证报告与计算结果的数据模型
"""
from typing import Dict, List, Optional

from pydantic import BaseModel, Field


def _table_text(table: dict) -> str:
    if not table:
        return "0"
    return " + ".join(f"({coeff})" + (f"·{word}" if word else "") for word, coeff in table.items())


class CheckResult(BaseModel):
    """单个恒等式的检查结果"""
    name: str = Field(..., description="恒等式名称")
    passed: bool = Field(..., description="是否精确成立")
    detail: str = Field(default="", description="首个不一致的系数或补充信息")


class IdentityReport(BaseModel):
    """一组恒等式检查的报告"""
    title: str = Field(..., description="报告标题")
    stage: Optional[str] = Field(default=None, description="阶段 m（'inf' 表示 S）")
    order: int = Field(..., ge=0, description="截断阶数 N")
    checks: List[CheckResult] = Field(default_factory=list, description="各项检查")
    chi_gap: Optional[str] = Field(default=None, description="χ 差在 x^{m+1} 处的项链系数")
    certificate: Dict[str, dict] = Field(default_factory=dict, description="证书矩阵，按级数矩阵文件格式")

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def first_failure(self) -> Optional[CheckResult]:
        return next((check for check in self.checks if not check.passed), None)

    def render_text(self) -> str:
        lines = [f"{self.title}: {'PASS' if self.passed else 'FAIL'}"]
        if self.stage is not None:
            lines.append(f"stage = {self.stage}, order = {self.order}")
        else:
            lines.append(f"order = {self.order}")
        for check in self.checks:
            mark = "✅" if check.passed else "❌"
            line = f"  {mark} {check.name}"
            if check.detail:
                line += f": {check.detail}"
            lines.append(line)
        if self.chi_gap is not None:
            lines.append(f"chi gap: {self.chi_gap}")
        for name, matrix in self.certificate.items():
            lines.append(f"certificate {name}:")
            lines += ["  [" + ", ".join(_table_text(entry) for entry in row) + "]" for row in matrix["entries"]]
        return "\n".join(lines)

    def to_payload(self) -> dict:
        payload = self.model_dump()
        payload["passed"] = self.passed
        return payload


class OpRecord(BaseModel):
    """初等运算记录（级数用 单词→元素 映射表示）"""
    kind: str = Field(..., description="row-add 或 col-add")
    i: int = Field(..., ge=0, description="目标行/列")
    j: int = Field(..., ge=0, description="源行/列")
    a: dict = Field(..., description="乘数级数的系数表")


class ReductionReport(BaseModel):
    """Gauss 约化结果"""
    order: int = Field(..., ge=0, description="截断阶数 N")
    normalizer: List[List[str]] = Field(..., description="ε(M)⁻¹")
    diagonal: List[dict] = Field(..., description="对角元素的系数表")
    ops: List[OpRecord] = Field(default_factory=list, description="初等运算日志")
    replay_ok: bool = Field(..., description="日志重放是否复现对角矩阵")


class WittReport(BaseModel):
    """K₁(A) ⊕ W₁(A) 分解"""
    order: int = Field(..., ge=0, description="截断阶数 N")
    unit_part: List[List[str]] = Field(..., description="ε(M)")
    witt_part: dict = Field(..., description="1 + xA[[x]] 中的 Witt 部分")
    recombine_ok: bool = Field(..., description="分解能否经日志还原为 M")
