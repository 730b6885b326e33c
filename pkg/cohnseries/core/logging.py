"""
日志配置

structlog 输出到 stderr，保证 CLI 的 stdout 只有计算结果。
"""
import logging
import sys

import structlog


def configure_logging(level: str = "WARNING", fmt: str = "text") -> None:
    """
    配置 structlog

    Args:
        level: 日志级别名称，如 "INFO"
        fmt: "json" 或 "text"
    """
    numeric_level = getattr(logging, level.upper(), logging.WARNING)
    logging.basicConfig(
        level=numeric_level,
        stream=sys.stderr,
        format="%(message)s",
    )

    renderer = (
        structlog.processors.JSONRenderer()
        if fmt == "json"
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric_level),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )
