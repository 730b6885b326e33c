"""
线性机器模块

线性机器 (f, s₁…s_μ, g) 表示 Σ⁻¹A⟨X⟩ 的元素 f(1 − Σ sᵢxᵢ)⁻¹g；
有理表达式通过 linearize 实现为线性机器，machine_expand 给出其幂级数展开。
机器只是具体代表元，不做等价类商，也不做极小化。
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import structlog

from .core.errors import NotSigmaInvertible, NotUnit, SpecMismatch
from .graded_ring import ArithKind, RingElement, RingMatrix, RingSpec, mat_inverse_graded
from .ncseries import Polynomial, SeriesMatrix, TruncatedSeries, XWord, series_mat_inverse

logger = structlog.get_logger(__name__)


# === 有理表达式 AST ===

@dataclass(frozen=True)
class Atom:
    """A⟨X⟩ 中的多项式叶子"""
    poly: Polynomial


@dataclass(frozen=True)
class IntScalar:
    """整数叶子（携带环规格与 mu）"""
    value: int
    spec: RingSpec
    mu: int


@dataclass(frozen=True)
class Add:
    left: "RationalExpr"
    right: "RationalExpr"


@dataclass(frozen=True)
class Sub:
    left: "RationalExpr"
    right: "RationalExpr"


@dataclass(frozen=True)
class Mul:
    left: "RationalExpr"
    right: "RationalExpr"


@dataclass(frozen=True)
class Inv:
    child: "RationalExpr"


RationalExpr = Union[Atom, IntScalar, Add, Sub, Mul, Inv]
_BINARY = {Add: ArithKind.ADD, Sub: ArithKind.SUB, Mul: ArithKind.MUL}


def expr_context(expr: RationalExpr) -> Tuple[RingSpec, int]:
    """返回表达式的 (环规格, mu)"""
    while True:
        if isinstance(expr, Atom):
            return expr.poly.spec, expr.poly.mu
        if isinstance(expr, IntScalar):
            return expr.spec, expr.mu
        expr = expr.child if isinstance(expr, Inv) else expr.left


def leaf_polynomial(expr: RationalExpr) -> Optional[Polynomial]:
    if isinstance(expr, Atom):
        return expr.poly
    if isinstance(expr, IntScalar):
        return Polynomial.constant(expr.spec, expr.mu, expr.value)
    return None


def make_leaf(poly: Polynomial) -> RationalExpr:
    """整数常数多项式化为 IntScalar，其余为 Atom"""
    if poly.degree() <= 0:
        constant = poly.constant_term()
        if constant.degree() <= 0:
            return IntScalar(constant.epsilon(), poly.spec, poly.mu)
    return Atom(poly)


def combine_expr(kind: ArithKind, left: RationalExpr, right: RationalExpr) -> RationalExpr:
    """构造二元节点；两边都是叶子时折叠成一个多项式叶子"""
    lp, rp = leaf_polynomial(left), leaf_polynomial(right)
    if lp is not None and rp is not None:
        if kind is ArithKind.ADD:
            return make_leaf(lp + rp)
        if kind is ArithKind.SUB:
            return make_leaf(lp - rp)
        return make_leaf(lp * rp)
    node = {ArithKind.ADD: Add, ArithKind.SUB: Sub, ArithKind.MUL: Mul}[kind]
    return node(left, right)


def canonicalize(expr: RationalExpr) -> RationalExpr:
    """折叠所有只含叶子的子树（解析器产生的就是这种规范形）"""
    if isinstance(expr, (Atom, IntScalar)):
        poly = leaf_polynomial(expr)
        return make_leaf(poly)
    if isinstance(expr, Inv):
        return Inv(canonicalize(expr.child))
    return combine_expr(_BINARY[type(expr)], canonicalize(expr.left), canonicalize(expr.right))


def evaluate_expr(expr: RationalExpr, order: int, degree_bound: Optional[int] = None) -> TruncatedSeries:
    """
    直接在截断级数环中求值（linearize 的对照）

    Raises:
        NotSigmaInvertible: 某个 Inv 子表达式的常数项不可逆
    """
    if isinstance(expr, Atom):
        return expr.poly.to_series(order)
    if isinstance(expr, IntScalar):
        return TruncatedSeries.constant(expr.spec, expr.mu, order, expr.value)
    if isinstance(expr, Inv):
        inner = evaluate_expr(expr.child, order, degree_bound)
        try:
            inverse = series_mat_inverse(SeriesMatrix([[inner]]), degree_bound)
        except NotUnit as exc:
            raise NotSigmaInvertible(f"Inv 子表达式常数项 {inner.augment()} 不可逆") from exc
        return inverse[0, 0]
    left = evaluate_expr(expr.left, order, degree_bound)
    right = evaluate_expr(expr.right, order, degree_bound)
    if isinstance(expr, Add):
        return left + right
    if isinstance(expr, Sub):
        return left - right
    return left * right


# === 线性机器 ===

@dataclass(frozen=True)
class LinearMachine:
    """
    线性机器 (f, s₁…s_μ, g)

    f 为 1×n 行向量，sᵢ 为 n×n 矩阵，g 为 n×1 列向量，全部在同一系数环上。
    """
    f: RingMatrix
    s: Tuple[RingMatrix, ...]
    g: RingMatrix

    def __post_init__(self):
        n = self.f.cols
        if self.f.rows != 1:
            raise ValueError(f"f 必须是行向量，得到 {self.f.rows}×{self.f.cols}")
        if (self.g.rows, self.g.cols) != (n, 1):
            raise ValueError(f"g 必须是 {n}×1 列向量，得到 {self.g.rows}×{self.g.cols}")
        if not self.s:
            raise ValueError("至少需要一个不定元")
        for matrix in self.s:
            if (matrix.rows, matrix.cols) != (n, n):
                raise ValueError(f"sᵢ 必须是 {n}×{n} 矩阵")
        specs = {self.f.spec, self.g.spec, *(matrix.spec for matrix in self.s)}
        if len(specs) != 1:
            raise SpecMismatch("线性机器的矩阵环规格不一致")

    @property
    def spec(self) -> RingSpec:
        return self.f.spec

    @property
    def mu(self) -> int:
        return len(self.s)

    @property
    def dim(self) -> int:
        return self.f.cols

    @classmethod
    def constant(cls, spec: RingSpec, mu: int, value: Union[int, RingElement]) -> "LinearMachine":
        """维数 1、s = 0 的机器，展开为常数 value"""
        zero = RingMatrix.zero(spec, 1, 1)
        return cls(RingMatrix(spec, [[value]]), tuple(zero for _ in range(mu)), RingMatrix.identity(spec, 1))

    def word_matrix(self, word: XWord) -> RingMatrix:
        """s_w = s_{i1}⋯s_{ik}"""
        result = RingMatrix.identity(self.spec, self.dim)
        for index in word:
            result = result * self.s[index - 1]
        return result

    def coefficient(self, word: XWord) -> RingElement:
        return (self.f * self.word_matrix(word) * self.g)[0, 0]

    def __str__(self) -> str:
        lines = [f"machine over {self.spec}, mu = {self.mu}, n = {self.dim}",
                 "f = " + str(self.f)]
        for i, matrix in enumerate(self.s, 1):
            lines.append(f"s{i} =")
            lines.append(str(matrix))
        lines.append("g = [" + ", ".join(str(self.g[i, 0]) for i in range(self.dim)) + "]ᵀ")
        return "\n".join(lines)


def machine_expand(machine: LinearMachine, order: int) -> TruncatedSeries:
    """
    展开线性机器：单词 x_{i1}⋯x_{ik} 的系数为 f·s_{i1}⋯s_{ik}·g

    按层逐步右乘 sᵢ，行向量为零的分支不再展开。
    """
    coeffs: Dict[XWord, RingElement] = {}
    frontier: List[Tuple[XWord, RingMatrix]] = [((), machine.f)]
    for depth in range(order + 1):
        next_frontier: List[Tuple[XWord, RingMatrix]] = []
        for word, row in frontier:
            value = (row * machine.g)[0, 0]
            if value:
                coeffs[word] = value
            if depth == order:
                continue
            for index, matrix in enumerate(machine.s, 1):
                advanced = row * matrix
                if not advanced.is_zero():
                    next_frontier.append((word + (index,), advanced))
        frontier = next_frontier
        if not frontier:
            break
    return TruncatedSeries(machine.spec, machine.mu, order, coeffs)


def machine_combine(a: LinearMachine, b: Optional[LinearMachine], kind: ArithKind) -> LinearMachine:
    """
    线性机器的差、积、负、和

    差: ((f₁, −f₂), diag(s₁ᵢ, s₂ᵢ), (g₁; g₂))
    积: 块方程 [[σ₁, −g₁f₂], [0, σ₂]] 左乘常数部分的逆后化为
        ((f₁, 0), [[s₁ᵢ, g₁f₂s₂ᵢ], [0, s₂ᵢ]], (g₁f₂g₂; g₂))
    """
    if kind is ArithKind.NEG:
        return LinearMachine(-a.f, a.s, a.g)
    if b is None:
        raise ValueError(f"{kind.value} 需要两个机器")
    if a.spec != b.spec:
        raise SpecMismatch(f"环规格不一致: {a.spec} vs {b.spec}")
    if a.mu != b.mu:
        raise SpecMismatch(f"不定元个数不一致: {a.mu} vs {b.mu}")
    if kind is ArithKind.ADD:
        return machine_combine(a, machine_combine(b, None, ArithKind.NEG), ArithKind.SUB)

    spec = a.spec
    n1, n2 = a.dim, b.dim
    top_zero = RingMatrix.zero(spec, n1, n2)
    bottom_zero = RingMatrix.zero(spec, n2, n1)

    if kind is ArithKind.SUB:
        f = RingMatrix.block(spec, [[a.f, -b.f]])
        s = tuple(RingMatrix.block(spec, [[s1, top_zero], [bottom_zero, s2]]) for s1, s2 in zip(a.s, b.s))
        g = RingMatrix.block(spec, [[a.g], [b.g]])
        return LinearMachine(f, s, g)

    coupling = a.g * b.f
    f = RingMatrix.block(spec, [[a.f, RingMatrix.zero(spec, 1, n2)]])
    s = tuple(RingMatrix.block(spec, [[s1, coupling * s2], [bottom_zero, s2]]) for s1, s2 in zip(a.s, b.s))
    g = RingMatrix.block(spec, [[coupling * b.g], [b.g]])
    return LinearMachine(f, s, g)


def machine_inverse(machine: LinearMachine, degree_bound: Optional[int] = None) -> LinearMachine:
    """
    求逆机器

    α = fσ⁻¹g 的逆由线性束 K = [[σ, g], [f, 0]] 给出：α⁻¹ = (0, −1)·K⁻¹·(0; 1)。
    K 的常数部分 K₀ = [[I, g], [f, 0]] 的逆为
    [[I − g c⁻¹ f, g c⁻¹], [c⁻¹ f, −c⁻¹]]，其中 c = fg = ε(α)。

    Raises:
        NotSigmaInvertible: ε(α) 在系数环上不可逆
    """
    spec = machine.spec
    n = machine.dim
    c = (machine.f * machine.g)[0, 0]
    try:
        c_inv = mat_inverse_graded(RingMatrix(spec, [[c]]), degree_bound)[0, 0]
    except NotUnit as exc:
        raise NotSigmaInvertible(f"增广 {c} 在系数环上不可逆") from exc

    top_left = RingMatrix.identity(spec, n) - machine.g * c_inv * machine.f
    bottom_left = c_inv * machine.f
    zero_col = RingMatrix.zero(spec, n, 1)
    zero_corner = RingMatrix.zero(spec, 1, 1)
    s = tuple(
        RingMatrix.block(spec, [[top_left * matrix, zero_col], [bottom_left * matrix, zero_corner]])
        for matrix in machine.s
    )
    f = RingMatrix.block(spec, [[RingMatrix.zero(spec, 1, n), RingMatrix(spec, [[-1]])]])
    g = RingMatrix.block(spec, [[machine.g * c_inv], [RingMatrix(spec, [[-c_inv]])]])
    return LinearMachine(f, s, g)


# === 线性化 ===

def _linear_term_machine(spec: RingSpec, mu: int, index: int, coeff: RingElement) -> LinearMachine:
    """a·xᵢ = (1 0)·[[1, −a xᵢ], [0, 1]]⁻¹·(0; 1)"""
    zero = RingMatrix.zero(spec, 2, 2)
    shift = RingMatrix(spec, [[0, coeff], [0, 0]])
    s = tuple(shift if i == index else zero for i in range(1, mu + 1))
    return LinearMachine(RingMatrix(spec, [[1, 0]]), s, RingMatrix(spec, [[0], [1]]))


def _monomial_machine(spec: RingSpec, mu: int, word: XWord, coeff: RingElement) -> LinearMachine:
    """单项式 a·w：按 a + bc 恒等式剥离最后一个符号，左因子为其余部分"""
    if not word:
        return LinearMachine.constant(spec, mu, coeff)
    if len(word) == 1:
        return _linear_term_machine(spec, mu, word[0], coeff)
    left = _monomial_machine(spec, mu, word[:-1], coeff)
    right = _linear_term_machine(spec, mu, word[-1], RingElement.one(spec))
    return machine_combine(left, right, ArithKind.MUL)


def polynomial_machine(poly: Polynomial) -> LinearMachine:
    """把 A⟨X⟩ 中的多项式实现为线性机器（高次单项式优先）"""
    terms = sorted(poly.terms.items(), key=lambda item: (-len(item[0]), item[0]))
    if not terms:
        return LinearMachine.constant(poly.spec, poly.mu, 0)
    result: Optional[LinearMachine] = None
    for word, coeff in terms:
        piece = _monomial_machine(poly.spec, poly.mu, word, coeff)
        result = piece if result is None else machine_combine(result, piece, ArithKind.ADD)
    return result


def linearize(expr: RationalExpr, degree_bound: Optional[int] = None) -> LinearMachine:
    """
    把有理表达式实现为线性机器

    Args:
        expr: 有理表达式
        degree_bound: Inv 节点增广求逆的次数界

    Returns:
        展开与 evaluate_expr(expr, N) 在每个阶数 N 上都相等的机器

    Raises:
        NotSigmaInvertible: 某个 Inv 子表达式不属于 Σ
        BoundExceeded: 分次求逆未判定
    """
    if isinstance(expr, Atom):
        machine = polynomial_machine(expr.poly)
    elif isinstance(expr, IntScalar):
        machine = LinearMachine.constant(expr.spec, expr.mu, expr.value)
    elif isinstance(expr, Inv):
        machine = machine_inverse(linearize(expr.child, degree_bound), degree_bound)
    else:
        machine = machine_combine(
            linearize(expr.left, degree_bound),
            linearize(expr.right, degree_bound),
            _BINARY[type(expr)],
        )
    logger.debug("linearized", node=type(expr).__name__, dim=machine.dim)
    return machine
