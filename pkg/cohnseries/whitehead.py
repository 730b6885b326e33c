"""
Whitehead 群模块

截断阶 N 上 K₁(A[[x]]) 的构造性工具：带可重放证书的 Gauss 约化、
K₁(A) ⊕ W₁(A) 分解、交换情形的行列式，以及反例恒等式链的机械验证。
只产生具体等式的见证，不判定 K₁ 类的相等。
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import structlog

from .core.errors import MultiVariable, NotCommutative, NotSquare
from .cyclic import (
    NecklaceElement, characteristic_matrix, chi, sub_necklace_lists, tmap,
)
from .graded_ring import RingElement, RingMatrix, RingSpec, mat_inverse_graded
from .machine import LinearMachine, machine_expand
from .models.files import SeriesMatrixFile
from .models.reports import CheckResult, IdentityReport
from .ncseries import SeriesMatrix, TruncatedSeries, format_xword, series_mat_inverse

logger = structlog.get_logger(__name__)


class OpKind(Enum):
    """初等运算种类"""
    ROW_ADD = "row-add"   # row_i += a·row_j，即左乘 e_ij(a)
    COL_ADD = "col-add"   # col_j += col_i·a，即右乘 e_ij(a)


def elementary_matrix(like: SeriesMatrix, i: int, j: int, a: TruncatedSeries) -> SeriesMatrix:
    """与 like 同规格的 n×n 初等矩阵 e_ij(a)"""
    if i == j:
        raise ValueError("初等矩阵要求 i ≠ j")
    n = like.rows
    identity = SeriesMatrix.identity(like.spec, like.mu, like.order, n)
    return identity.with_entry(i, j, a.truncate(like.order) if a.order > like.order else a)


@dataclass(frozen=True)
class ElementaryOp:
    kind: OpKind
    i: int
    j: int
    a: TruncatedSeries

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError(f"初等运算要求 i ≠ j，得到 i = j = {self.i}")

    def apply(self, matrix: SeriesMatrix) -> SeriesMatrix:
        entries = matrix.to_lists()
        if self.kind is OpKind.ROW_ADD:
            entries[self.i] = [x + self.a * y for x, y in zip(entries[self.i], entries[self.j])]
        else:
            for row in entries:
                row[self.j] = row[self.j] + row[self.i] * self.a
        return SeriesMatrix(entries)

    def inverse(self) -> "ElementaryOp":
        return ElementaryOp(self.kind, self.i, self.j, -self.a)

    def __str__(self) -> str:
        if self.kind is OpKind.ROW_ADD:
            return f"row{self.i} += ({self.a})·row{self.j}"
        return f"col{self.j} += col{self.i}·({self.a})"


@dataclass(frozen=True)
class ElementaryOpLog:
    """
    初等运算证书

    按顺序把 ops 作用在 initial 上，精确得到 final。
    """
    ops: Tuple[ElementaryOp, ...]
    initial: SeriesMatrix
    final: SeriesMatrix

    def replay(self, start: Optional[SeriesMatrix] = None) -> SeriesMatrix:
        current = self.initial if start is None else start
        for op in self.ops:
            current = op.apply(current)
        return current

    def verify(self) -> bool:
        return self.replay() == self.final

    def undo(self, matrix: SeriesMatrix) -> SeriesMatrix:
        """反向作用逆运算"""
        for op in reversed(self.ops):
            matrix = op.inverse().apply(matrix)
        return matrix


@dataclass(frozen=True)
class GaussianReduction:
    """
    Gauss 约化结果

    normalizer = ε(M)⁻¹；log.initial = normalizer·M，log.final = diag(diagonal)。
    """
    diagonal: Tuple[TruncatedSeries, ...]
    log: ElementaryOpLog
    normalizer: RingMatrix

    def diagonal_matrix(self) -> SeriesMatrix:
        return self.log.final

    def diagonal_product(self) -> TruncatedSeries:
        product = self.diagonal[0]
        for entry in self.diagonal[1:]:
            product = product * entry
        return product


@dataclass(frozen=True)
class WittSplit:
    """
    K₁(A[[x]]) = K₁(A) ⊕ W₁(A) 的分解

    unit_part = ε(M)，witt_part ∈ 1 + xA[[x]]。
    """
    unit_part: RingMatrix
    witt_part: TruncatedSeries
    reduction: GaussianReduction = field(repr=False)

    def recombine(self) -> SeriesMatrix:
        """ε(M)·(逆运算作用于对角矩阵) 还原 M"""
        restored = self.reduction.log.undo(self.reduction.diagonal_matrix())
        order = restored.order
        return SeriesMatrix.from_ring_matrix(self.unit_part, restored.mu, order) * restored


def _single_variable_square(matrix: SeriesMatrix, what: str) -> None:
    if matrix.mu != 1:
        raise MultiVariable(f"{what} 只支持 mu = 1，得到 mu = {matrix.mu}")
    if not matrix.is_square:
        raise NotSquare(f"{what} 需要方阵，得到 {matrix.rows}×{matrix.cols}")


def _series_unit_inverse(value: TruncatedSeries, degree_bound: Optional[int]) -> TruncatedSeries:
    return series_mat_inverse(SeriesMatrix([[value]]), degree_bound)[0, 0]


def gaussian_reduce(matrix: SeriesMatrix, degree_bound: Optional[int] = None) -> GaussianReduction:
    """
    把 ε(M)⁻¹·M 用行初等运算化成对角矩阵

    先逐列消去对角线以下，再从最右列开始向左消去对角线以上。
    归一化后主元常数项为 1，乘数常数项为 0，所以对角元都在 1 + xA[[x]] 中。

    Args:
        matrix: mu = 1 的方阵
        degree_bound: 常数项分次求逆的次数界

    Returns:
        GaussianReduction（对角元、运算日志、归一化矩阵）

    Raises:
        NotUnit: ε(M) 不可逆
        BoundExceeded: 分次求逆未判定
    """
    _single_variable_square(matrix, "Gauss 约化")
    n = matrix.rows
    normalizer = mat_inverse_graded(matrix.constant_matrix(), degree_bound)
    normalized = SeriesMatrix.from_ring_matrix(normalizer, matrix.mu, matrix.order) * matrix

    ops: List[ElementaryOp] = []
    current = normalized

    def eliminate(row: int, col: int) -> None:
        nonlocal current
        entry = current[row, col]
        if entry.is_zero():
            return
        multiplier = -(entry * _series_unit_inverse(current[col, col], degree_bound))
        if multiplier.is_zero():
            return
        op = ElementaryOp(OpKind.ROW_ADD, row, col, multiplier)
        current = op.apply(current)
        ops.append(op)

    for col in range(n):
        for row in range(col + 1, n):
            eliminate(row, col)
    for col in range(n - 1, 0, -1):
        for row in range(col):
            eliminate(row, col)

    diagonal = tuple(current[i, i] for i in range(n))
    log = ElementaryOpLog(tuple(ops), normalized, current)
    logger.debug("gaussian_reduced", size=n, ops=len(ops), order=matrix.order)
    return GaussianReduction(diagonal, log, normalizer)


def witt_split(matrix: SeriesMatrix, degree_bound: Optional[int] = None) -> WittSplit:
    """
    分解为 ε(M) 与 ε(M)⁻¹M 约化对角元之积

    Raises:
        NotUnit: ε(M) 不可逆
    """
    reduction = gaussian_reduce(matrix, degree_bound)
    return WittSplit(matrix.constant_matrix(), reduction.diagonal_product(), reduction)


def det_series(matrix: SeriesMatrix) -> TruncatedSeries:
    """
    交换系数环（ℤ）上的行列式，按第一行余子式展开

    Raises:
        NotCommutative: 系数字母表非空
        MultiVariable: mu ≠ 1（不定元之间不交换）
    """
    if not matrix.spec.is_commutative:
        raise NotCommutative(f"行列式需要交换系数环，得到 {matrix.spec}")
    _single_variable_square(matrix, "行列式")
    return _cofactor_det(matrix.to_lists())


def _cofactor_det(rows: List[List[TruncatedSeries]]) -> TruncatedSeries:
    if len(rows) == 1:
        return rows[0][0]
    total: Optional[TruncatedSeries] = None
    for col, entry in enumerate(rows[0]):
        if entry.is_zero():
            continue
        minor = [row[:col] + row[col + 1:] for row in rows[1:]]
        term = entry * _cofactor_det(minor)
        if col % 2:
            term = -term
        total = term if total is None else total + term
    if total is None:
        return TruncatedSeries.zero(rows[0][0].spec, rows[0][0].mu, rows[0][0].order)
    return total


# === 恒等式检查 ===

def first_discrepancy(lhs: SeriesMatrix, rhs: SeriesMatrix) -> Optional[str]:
    """返回首个不一致系数的描述，完全相等时返回 None"""
    if (lhs.rows, lhs.cols) != (rhs.rows, rhs.cols):
        return f"维数不一致: {lhs.rows}×{lhs.cols} vs {rhs.rows}×{rhs.cols}"
    for i in range(lhs.rows):
        for j in range(lhs.cols):
            left, right = lhs[i, j], rhs[i, j]
            if left == right:
                continue
            words = sorted(set(left.coeffs) | set(right.coeffs), key=lambda w: (len(w), w))
            for word in words:
                a, b = left.coeffs.get(word), right.coeffs.get(word)
                if a != b:
                    return (f"entry ({i},{j}) [{format_xword(word) or '1'}]: "
                            f"{a if a is not None else 0} ≠ {b if b is not None else 0}")
            return f"entry ({i},{j}) 截断阶数不同"
    return None


def _identity_check(name: str, lhs: SeriesMatrix, rhs: SeriesMatrix) -> CheckResult:
    discrepancy = first_discrepancy(lhs, rhs)
    return CheckResult(name=name, passed=discrepancy is None, detail=discrepancy or "")


def _stage_symbols(spec: RingSpec) -> Tuple[RingElement, RingElement, RingElement]:
    return (RingElement.symbol(spec, "f"), RingElement.symbol(spec, "s"), RingElement.symbol(spec, "g"))


def verify_counterexample_chain(m: Optional[int], order: int,
                                degree_bound: Optional[int] = None) -> IdentityReport:
    """
    在 S_m（m 为 None 时为 S）上验证 [1 − sx] = [1 − (1−gf)sx] 的恒等式链

    检查内容:
      - f(1−sx)⁻¹g 中 fsⁱg (i ≤ m) 的系数为 0（S 上整个级数为 0）
      - diag(1, σ)·e₁₂(f)·diag(1 + fσ⁻¹g, 1)·e₂₁(−σ⁻¹g) = [[1, f], [−g, σ]]
      - e₁₂(f)·e₂₁(g)·e₁₂(−f)·[[1, f], [−g, σ]]·e₁₂(−f) = diag(1, 1 − (1−gf)sx)
      - χ 区分两个类：S_m 上 x^{m+1} 处的差为 (m+1)·[f s^{m+1} g]
      - T(1 − αx) = χ(α)

    失败只记录在报告里，不抛异常。
    """
    spec = RingSpec.stage(m)
    f, s, g = _stage_symbols(spec)
    mu = 1
    stage = "inf" if m is None else str(m)
    checks: List[CheckResult] = []

    def const(value) -> TruncatedSeries:
        return TruncatedSeries.constant(spec, mu, order, value)

    one, zero = const(1), const(0)
    sigma = TruncatedSeries(spec, mu, order, {(): 1, (1,): -s})
    sigma_inv = _series_unit_inverse(sigma, degree_bound)

    # f(1−sx)⁻¹g 的展开
    machine = LinearMachine(RingMatrix(spec, [[f]]), (RingMatrix(spec, [[s]]),), RingMatrix(spec, [[g]]))
    expansion = machine_expand(machine, order)
    limit = order if m is None else min(m, order)
    nonzero = [k for k in range(limit + 1) if not expansion.coefficient((1,) * k).is_zero()]
    checks.append(CheckResult(
        name="expansion_vanishing",
        passed=not nonzero,
        detail=(f"x^{nonzero[0]}: {expansion.coefficient((1,) * nonzero[0])}" if nonzero
                else f"系数 fsⁱg 在 i ≤ {limit} 时为 0"),
    ))
    if m is not None and m + 1 <= order:
        surviving = expansion.coefficient((1,) * (m + 1))
        expected = f * s ** (m + 1) * g
        checks.append(CheckResult(
            name="surviving_coefficient",
            passed=surviving == expected,
            detail=f"x^{m + 1}: {surviving}",
        ))

    # 第一个乘积恒等式
    h = TruncatedSeries.constant(spec, mu, order, f) * sigma_inv * TruncatedSeries.constant(spec, mu, order, g)
    lhs = (SeriesMatrix([[one, zero], [zero, sigma]])
           * SeriesMatrix([[one, const(f)], [zero, one]])
           * SeriesMatrix([[one + h, zero], [zero, one]])
           * SeriesMatrix([[one, zero], [-(sigma_inv * const(g)), one]]))
    pencil = SeriesMatrix([[one, const(f)], [-const(g), sigma]])
    checks.append(_identity_check("first_product_identity", lhs, pencil))

    # 共轭恒等式（只需要 fg = 0）
    e_f = SeriesMatrix([[one, const(f)], [zero, one]])
    e_g = SeriesMatrix([[one, zero], [const(g), one]])
    e_minus_f = SeriesMatrix([[one, const(-f)], [zero, one]])
    conjugated = e_f * e_g * e_minus_f * pencil * e_minus_f
    twisted = (1 - g * f) * s
    target = SeriesMatrix([[one, zero], [zero, TruncatedSeries(spec, mu, order, {(): 1, (1,): -twisted})]])
    checks.append(_identity_check("conjugation_identity", conjugated, target))
    certificate = {
        "sigma_inverse": SeriesMatrix([[sigma_inv]]),
        "pencil": pencil,
        "e12(f)": e_f,
        "e21(g)": e_g,
        "e12(-f)": e_minus_f,
        "conjugated": conjugated,
        "target": target,
    }

    # χ 的比较
    plain = RingMatrix(spec, [[s]])
    twisted_matrix = RingMatrix(spec, [[twisted]])
    chi_gap: Optional[str] = None
    if m is not None:
        degree = m + 1
        difference = sub_necklace_lists(chi(plain, degree), chi(twisted_matrix, degree))
        expected_gap = NecklaceElement(spec, {("f",) + ("s",) * degree + ("g",): degree})
        lower_zero = all(value.is_zero() for value in difference[:-1])
        passed = lower_zero and difference[-1] == expected_gap and not expected_gap.is_zero()
        chi_gap = str(difference[-1])
        checks.append(CheckResult(
            name="chi_separation",
            passed=passed,
            detail=f"x^{degree}: {difference[-1]}" if lower_zero else "低阶差非零",
        ))
    else:
        difference = sub_necklace_lists(chi(plain, order), chi(twisted_matrix, order))
        bad = next((k for k, value in enumerate(difference, 1) if not value.is_zero()), None)
        checks.append(CheckResult(
            name="chi_agreement",
            passed=bad is None,
            detail=f"x^{bad}: {difference[bad - 1]}" if bad else f"χ 差在 {order} 阶内为 0",
        ))

    # 三角恒等式
    for label, alpha in (("s", plain), ("(1-gf)s", twisted_matrix)):
        lhs_t = tmap(characteristic_matrix(alpha, order), order, degree_bound)
        rhs_t = chi(alpha, order)
        bad = next((k for k, (a, b) in enumerate(zip(lhs_t, rhs_t), 1) if a != b), None)
        checks.append(CheckResult(
            name=f"triangle_identity[{label}]",
            passed=bad is None,
            detail=f"x^{bad}: {lhs_t[bad - 1]} ≠ {rhs_t[bad - 1]}" if bad else "",
        ))

    report = IdentityReport(title="counterexample chain", stage=stage, order=order,
                            checks=checks, chi_gap=chi_gap,
                            certificate={name: SeriesMatrixFile.from_matrix(matrix).model_dump()
                                         for name, matrix in certificate.items()})
    logger.info("counterexample_verified", stage=stage, order=order, passed=report.passed)
    return report


def sigma_matrix(machine: LinearMachine, order: int) -> SeriesMatrix:
    """σ = I − Σ sᵢxᵢ"""
    spec, mu, n = machine.spec, machine.mu, machine.dim
    entries = []
    for i in range(n):
        row = []
        for j in range(n):
            coeffs = {(): int(i == j)}
            for k, matrix in enumerate(machine.s, 1):
                coeffs[(k,)] = -matrix[i, j]
            row.append(TruncatedSeries(spec, mu, order, coeffs))
        entries.append(row)
    return SeriesMatrix(entries)


def verify_stabilization_identity(machine: LinearMachine, order: int,
                                  degree_bound: Optional[int] = None) -> IdentityReport:
    """
    检查 diag(1, σ)·[[1, f], [0, I]]·diag(fσ⁻¹g, I)·[[1, 0], [−σ⁻¹g, I]] = [[0, f], [−g, σ]]
    """
    spec, mu, n = machine.spec, machine.mu, machine.dim
    sigma = sigma_matrix(machine, order)
    sigma_inv = series_mat_inverse(sigma, degree_bound)
    f = SeriesMatrix.from_ring_matrix(machine.f, mu, order)
    g = SeriesMatrix.from_ring_matrix(machine.g, mu, order)
    one = SeriesMatrix.identity(spec, mu, order, 1)
    identity = SeriesMatrix.identity(spec, mu, order, n)
    zero_row = SeriesMatrix.zero(spec, mu, order, 1, n)
    zero_col = SeriesMatrix.zero(spec, mu, order, n, 1)

    value = f * sigma_inv * g
    lhs = (SeriesMatrix.block([[one, zero_row], [zero_col, sigma]])
           * SeriesMatrix.block([[one, f], [zero_col, identity]])
           * SeriesMatrix.block([[value, zero_row], [zero_col, identity]])
           * SeriesMatrix.block([[one, zero_row], [-(sigma_inv * g), identity]]))
    rhs = SeriesMatrix.block([[SeriesMatrix.zero(spec, mu, order, 1, 1), f], [-g, sigma]])
    checks = [
        _identity_check("stabilization_identity", lhs, rhs),
        _identity_check("machine_value", value, SeriesMatrix([[machine_expand(machine, order)]])),
    ]
    report = IdentityReport(title="stabilization identity", order=order, checks=checks)
    logger.info("stabilization_verified", dim=n, order=order, passed=report.passed)
    return report


def verify_linearizing_step(a: TruncatedSeries, b: TruncatedSeries, c: TruncatedSeries) -> IdentityReport:
    """检查 diag(a + bc, 1) = [[1, −b], [0, 1]]·[[a, b], [−c, 1]]·[[1, 0], [c, 1]]"""
    order = min(a.order, b.order, c.order)
    a, b, c = a.truncate(order), b.truncate(order), c.truncate(order)
    one = TruncatedSeries.one(a.spec, a.mu, order)
    zero = TruncatedSeries.zero(a.spec, a.mu, order)
    lhs = SeriesMatrix([[a + b * c, zero], [zero, one]])
    rhs = (SeriesMatrix([[one, -b], [zero, one]])
           * SeriesMatrix([[a, b], [-c, one]])
           * SeriesMatrix([[one, zero], [c, one]]))
    return IdentityReport(title="linearizing step", order=order,
                          checks=[_identity_check("linearizing_step", lhs, rhs)])


def check_op_invariance(matrix: SeriesMatrix, op: ElementaryOp,
                        degree_bound: Optional[int] = None) -> bool:
    """T 在初等运算下不变"""
    return tmap(matrix, degree_bound=degree_bound) == tmap(op.apply(matrix), degree_bound=degree_bound)
