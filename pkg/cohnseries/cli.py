"""
命令行前端

每个子命令只是库函数的薄适配层：解析输入、调用库、按 text 或 json 渲染。
退出码: 0 成功/PASS，1 验证失败，2 用法或解析错误，3 计算错误。
"""

import argparse
import json
from pathlib import Path
from typing import Callable, Dict, List, Literal, Optional, Tuple

import structlog
from pydantic import BaseModel, Field, ValidationError, field_validator

from .core.config import settings
from .core.errors import CohnSeriesError, ExprSyntaxError, FileFormatError, UnknownSymbol
from .core.logging import configure_logging
from .cyclic import chi, necklace_list_str, tmap
from .machine import evaluate_expr, linearize, machine_expand
from .magnus import magnus_expand, psi_check
from .models.files import (
    GroupMatrixFile, MachineFile, RingMatrixFile, SeriesFile, SeriesMatrixFile, load_model, series_to_table,
)
from .models.reports import OpRecord, ReductionReport, WittReport
from .ncseries import TruncatedSeries, format_xword
from .parser import parse_expr, parse_group_ring, parse_ring_spec
from .whitehead import gaussian_reduce, verify_counterexample_chain, verify_stabilization_identity, witt_split

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_COMPUTE = 3

# 输入类错误
_USAGE_ERRORS = (ExprSyntaxError, UnknownSymbol, FileFormatError)


class ParsedCommand(BaseModel):
    """解析后的命令"""
    subcommand: Literal[
        "expand", "linearize", "magnus", "machine-expand", "chi", "tmap",
        "reduce", "witt", "psi", "stabilize", "verify-counterexample",
    ] = Field(..., description="子命令")
    ring: str = Field(default="Z", description="系数环规格")
    order: Optional[int] = Field(default=None, ge=0, description="截断阶数 N（文件命令默认取文件中的阶数）")
    mu: int = Field(default=1, ge=1, description="不定元个数")
    m: Optional[str] = Field(default=None, description="阶段 m 或 inf")
    expression: Optional[str] = Field(default=None, description="表达式文本")
    input: Optional[str] = Field(default=None, description="输入文件路径")
    format: Literal["text", "json"] = Field(default="text", description="输出格式")
    out: Optional[str] = Field(default=None, description="输出文件路径")
    degree_bound: Optional[int] = Field(default=None, ge=0, description="分次求逆的次数界")

    @field_validator("m")
    @classmethod
    def validate_stage(cls, value: Optional[str]) -> Optional[str]:
        if value is None or value == "inf" or value.isdigit():
            return value
        raise ValueError(f"阶段必须是非负整数或 inf: {value!r}")

    def stage(self) -> Optional[int]:
        return None if self.m in (None, "inf") else int(self.m)

    def read_expression(self) -> str:
        if self.expression is not None:
            return self.expression
        if self.input is None:
            raise FileFormatError(f"{self.subcommand} 需要表达式或 --input")
        try:
            return Path(self.input).read_text(encoding="utf-8").strip()
        except OSError as exc:
            raise FileFormatError(f"无法读取 {self.input}: {exc}") from exc

    def require_input(self) -> Path:
        if self.input is None:
            raise FileFormatError(f"{self.subcommand} 需要输入文件")
        return Path(self.input)


# 每个处理器返回 (退出码, 文本, JSON 载荷)
Outcome = Tuple[int, str, object]


def render_series(series: TruncatedSeries) -> str:
    """按次数逐行输出，零次数行输出 0"""
    lines = [f"series over {series.spec}, mu = {series.mu}, N = {series.order}"]
    by_degree: Dict[int, List[str]] = {k: [] for k in range(series.order + 1)}
    for word, coeff in series.sorted_terms():
        by_degree[len(word)].append(f"({coeff})" + (f"·{format_xword(word)}" if word else ""))
    for degree, parts in by_degree.items():
        lines.append(f"x^{degree}: " + (" + ".join(parts) if parts else "0"))
    return "\n".join(lines)


def _series_outcome(series: TruncatedSeries) -> Outcome:
    return EXIT_OK, render_series(series), SeriesFile.from_series(series).model_dump()


def _order(cmd: ParsedCommand, fallback: Optional[int] = None) -> int:
    if cmd.order is not None:
        return cmd.order
    return settings.default_order if fallback is None else fallback


def _expand(cmd: ParsedCommand) -> Outcome:
    spec = parse_ring_spec(cmd.ring)
    expr = parse_expr(cmd.read_expression(), spec, cmd.mu)
    return _series_outcome(evaluate_expr(expr, _order(cmd), cmd.degree_bound))


def _linearize(cmd: ParsedCommand) -> Outcome:
    spec = parse_ring_spec(cmd.ring)
    machine = linearize(parse_expr(cmd.read_expression(), spec, cmd.mu), cmd.degree_bound)
    return EXIT_OK, str(machine), MachineFile.from_machine(machine).model_dump()


def _magnus(cmd: ParsedCommand) -> Outcome:
    spec = parse_ring_spec(cmd.ring)
    element = parse_group_ring(cmd.read_expression(), spec, cmd.mu)
    return _series_outcome(magnus_expand(element, _order(cmd)))


def _machine_expand(cmd: ParsedCommand) -> Outcome:
    machine = load_model(cmd.require_input(), MachineFile).to_machine()
    return _series_outcome(machine_expand(machine, _order(cmd)))


def _chi(cmd: ParsedCommand) -> Outcome:
    alpha = load_model(cmd.require_input(), RingMatrixFile).to_matrix()
    values = chi(alpha, _order(cmd))
    return EXIT_OK, "\n".join(necklace_list_str(values)), {"order": len(values), "chi": [str(v) for v in values]}


def _tmap(cmd: ParsedCommand) -> Outcome:
    matrix = load_model(cmd.require_input(), SeriesMatrixFile).to_matrix()
    values = tmap(matrix, _order(cmd, matrix.order), cmd.degree_bound)
    return EXIT_OK, "\n".join(necklace_list_str(values)), {"order": len(values), "tmap": [str(v) for v in values]}


def _reduce(cmd: ParsedCommand) -> Outcome:
    matrix = load_model(cmd.require_input(), SeriesMatrixFile).to_matrix()
    matrix = matrix.truncate(_order(cmd, matrix.order))
    reduction = gaussian_reduce(matrix, cmd.degree_bound)
    report = ReductionReport(
        order=matrix.order,
        normalizer=RingMatrixFile.from_matrix(reduction.normalizer).entries,
        diagonal=[series_to_table(d) for d in reduction.diagonal],
        ops=[OpRecord(kind=op.kind.value, i=op.i, j=op.j, a=series_to_table(op.a)) for op in reduction.log.ops],
        replay_ok=reduction.log.verify(),
    )
    lines = ["normalizer ε(M)⁻¹:", str(reduction.normalizer), "diagonal:"]
    lines += [f"  d{i} = {d}" for i, d in enumerate(reduction.diagonal)]
    lines.append(f"ops ({len(reduction.log.ops)}):")
    lines += [f"  {op}" for op in reduction.log.ops]
    lines.append(f"replay: {'ok' if report.replay_ok else 'MISMATCH'}")
    return EXIT_OK, "\n".join(lines), report.model_dump()


def _witt(cmd: ParsedCommand) -> Outcome:
    matrix = load_model(cmd.require_input(), SeriesMatrixFile).to_matrix()
    matrix = matrix.truncate(_order(cmd, matrix.order))
    split = witt_split(matrix, cmd.degree_bound)
    report = WittReport(
        order=matrix.order,
        unit_part=RingMatrixFile.from_matrix(split.unit_part).entries,
        witt_part=series_to_table(split.witt_part),
        recombine_ok=split.recombine() == matrix,
    )
    text = "\n".join(["unit part ε(M):", str(split.unit_part), f"witt part: {split.witt_part}"])
    return EXIT_OK, text, report.model_dump()


def _psi(cmd: ParsedCommand) -> Outcome:
    matrix = load_model(cmd.require_input(), GroupMatrixFile).to_matrix()
    member = psi_check(matrix, cmd.degree_bound)
    return EXIT_OK, "true" if member else "false", {"psi": member}


def _stabilize(cmd: ParsedCommand) -> Outcome:
    machine = load_model(cmd.require_input(), MachineFile).to_machine()
    report = verify_stabilization_identity(machine, _order(cmd), cmd.degree_bound)
    return (EXIT_OK if report.passed else EXIT_FAIL), report.render_text(), report.to_payload()


def _verify_counterexample(cmd: ParsedCommand) -> Outcome:
    report = verify_counterexample_chain(cmd.stage(), _order(cmd), cmd.degree_bound)
    return (EXIT_OK if report.passed else EXIT_FAIL), report.render_text(), report.to_payload()


HANDLERS: Dict[str, Callable[[ParsedCommand], Outcome]] = {
    "expand": _expand,
    "linearize": _linearize,
    "magnus": _magnus,
    "machine-expand": _machine_expand,
    "chi": _chi,
    "tmap": _tmap,
    "reduce": _reduce,
    "witt": _witt,
    "psi": _psi,
    "stabilize": _stabilize,
    "verify-counterexample": _verify_counterexample,
}


def run(cmd: ParsedCommand) -> Tuple[int, str]:
    """
    执行命令

    Args:
        cmd: 解析后的命令

    Returns:
        (退出码, 渲染后的输出)
    """
    try:
        code, text, payload = HANDLERS[cmd.subcommand](cmd)
    except _USAGE_ERRORS as exc:
        return EXIT_USAGE, f"error: {exc}"
    except CohnSeriesError as exc:
        return EXIT_COMPUTE, f"error: {exc}"
    if cmd.format == "json":
        return code, json.dumps(payload, ensure_ascii=False, indent=2)
    return code, text


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--ring", default=settings.default_ring, help="系数环: Z, free:f,s,g, S:m, S:inf, quot:…/…")
    common.add_argument("--order", type=int, default=None, help="截断阶数 N")
    common.add_argument("--mu", type=int, default=settings.default_mu, help="不定元个数")
    common.add_argument("--format", choices=["text", "json"], default=settings.output_format, help="输出格式")
    common.add_argument("--out", default=None, help="输出文件")
    common.add_argument("--bound", type=int, default=settings.neumann_bound, help="分次求逆的次数界")

    parser = argparse.ArgumentParser(prog="cohnseries", description="非交换有理幂级数与 Cohn 局部化反例工具")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    for name, help_text in (("expand", "展开有理表达式"),
                            ("linearize", "把有理表达式实现为线性机器"),
                            ("magnus", "群环元素的 Magnus 展开")):
        sub = subparsers.add_parser(name, parents=[common], help=help_text)
        sub.add_argument("expression", nargs="?", default=None, help="表达式")
        sub.add_argument("--input", default=None, help="从文件读取表达式")

    for name, help_text in (("machine-expand", "展开线性机器文件"),
                            ("chi", "方阵文件的 χ 不变量"),
                            ("tmap", "级数矩阵文件的 T 映射"),
                            ("reduce", "Gauss 约化并输出运算日志"),
                            ("witt", "K₁(A) ⊕ W₁(A) 分解"),
                            ("psi", "群环矩阵的 Ψ 成员判定"),
                            ("stabilize", "验证线性机器的稳定化恒等式")):
        sub = subparsers.add_parser(name, parents=[common], help=help_text)
        sub.add_argument("input", help="输入 JSON 文件")

    sub = subparsers.add_parser("verify-counterexample", parents=[common], help="验证反例恒等式链")
    sub.add_argument("--m", default="inf", help="阶段 m（非负整数或 inf）")
    return parser


def parse_command(argv: Optional[List[str]] = None) -> ParsedCommand:
    args = build_parser().parse_args(argv)
    values = vars(args)
    return ParsedCommand(
        subcommand=values["subcommand"],
        ring=values["ring"],
        order=values["order"],
        mu=values["mu"],
        m=values.get("m"),
        expression=values.get("expression"),
        input=values.get("input"),
        format=values["format"],
        out=values["out"],
        degree_bound=values["bound"],
    )


def main(argv: Optional[List[str]] = None) -> int:
    """命令行入口"""
    configure_logging(settings.log_level, settings.log_format)
    try:
        cmd = parse_command(argv)
    except ValidationError as exc:
        print(f"error: usage: {exc.errors()[0]['msg']}")
        return EXIT_USAGE
    try:
        code, output = run(cmd)
    except Exception:
        logger.exception("unexpected_error", subcommand=cmd.subcommand)
        print("error: InternalError: 未预期的异常，详见日志")
        return EXIT_COMPUTE
    if cmd.out:
        Path(cmd.out).write_text(output + "\n", encoding="utf-8")
        logger.info("output_written", path=cmd.out, subcommand=cmd.subcommand)
    else:
        print(output)
    return code
