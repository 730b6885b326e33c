"""
Magnus 嵌入模块

自由群环 AF_μ、Magnus 展开 zᵢ ↦ 1 + xᵢ、Ψ 成员判定，
以及把群环元素实现为线性机器的同态 ℓ。
群字母与系数交换。
"""

from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import structlog

from .core.errors import NotSquare, NotUnit, SpecMismatch
from .graded_ring import ArithKind, RingElement, RingMatrix, RingSpec, mat_inverse_graded
from .machine import Atom, Inv, LinearMachine, RationalExpr, combine_expr, linearize, make_leaf
from .ncseries import Polynomial, SeriesMatrix, TruncatedSeries

logger = structlog.get_logger(__name__)

# ±i 表示 z_i^{±1}（i 从 1 开始）
GroupWord = Tuple[int, ...]
Coefficient = Union[int, RingElement]


def reduce_word(letters: Iterable[int]) -> GroupWord:
    """用栈做自由约化"""
    stack: List[int] = []
    for letter in letters:
        if letter == 0:
            raise ValueError("群字母不能为 0")
        if stack and stack[-1] == -letter:
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


def invert_word(word: Sequence[int]) -> GroupWord:
    return tuple(-letter for letter in reversed(word))


def format_group_word(word: GroupWord) -> str:
    return " ".join(f"z{abs(letter)}" + ("^-1" if letter < 0 else "") for letter in word)


class GroupRingElement:
    """
    AF_μ 中的元素：约化群字到非零系数的有限映射
    """

    __slots__ = ("spec", "mu", "_terms")

    def __init__(self, spec: RingSpec, mu: int, terms: Optional[Mapping[Sequence[int], Coefficient]] = None):
        if mu < 1:
            raise ValueError(f"mu 必须 ≥ 1: {mu}")
        self.spec = spec
        self.mu = mu
        cleaned: Dict[GroupWord, RingElement] = {}
        for word, coeff in (terms or {}).items():
            for letter in word:
                if not 1 <= abs(letter) <= mu:
                    raise ValueError(f"群字母 z{abs(letter)} 超出 mu = {mu}")
            if isinstance(coeff, int):
                coeff = RingElement.constant(spec, coeff)
            elif coeff.spec != spec:
                raise SpecMismatch(f"系数环规格不一致: {coeff.spec} vs {spec}")
            key = reduce_word(word)
            cleaned[key] = cleaned.get(key, RingElement.zero(spec)) + coeff
        self._terms = {w: c for w, c in cleaned.items() if c}

    @classmethod
    def constant(cls, spec: RingSpec, mu: int, value: Coefficient) -> "GroupRingElement":
        return cls(spec, mu, {(): value})

    @classmethod
    def generator(cls, spec: RingSpec, mu: int, index: int, power: int = 1) -> "GroupRingElement":
        """z_index^power"""
        letter = index if power > 0 else -index
        return cls(spec, mu, {(letter,) * abs(power): 1})

    @property
    def terms(self) -> Mapping[GroupWord, RingElement]:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def sorted_terms(self) -> List[Tuple[GroupWord, RingElement]]:
        return sorted(self._terms.items(), key=lambda item: (len(item[0]), [(abs(x), x < 0) for x in item[0]]))

    def _check(self, other: "GroupRingElement") -> None:
        if other.spec != self.spec:
            raise SpecMismatch(f"系数环规格不一致: {self.spec} vs {other.spec}")
        if other.mu != self.mu:
            raise SpecMismatch(f"秩不一致: {self.mu} vs {other.mu}")

    def _coerce(self, other: Union["GroupRingElement", Coefficient]) -> "GroupRingElement":
        if isinstance(other, GroupRingElement):
            self._check(other)
            return other
        return GroupRingElement.constant(self.spec, self.mu, other)

    def __add__(self, other) -> "GroupRingElement":
        other = self._coerce(other)
        terms: Dict[GroupWord, RingElement] = dict(self._terms)
        for word, coeff in other._terms.items():
            terms[word] = terms.get(word, RingElement.zero(self.spec)) + coeff
        return GroupRingElement(self.spec, self.mu, terms)

    __radd__ = __add__

    def __neg__(self) -> "GroupRingElement":
        return GroupRingElement(self.spec, self.mu, {w: -c for w, c in self._terms.items()})

    def __sub__(self, other) -> "GroupRingElement":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "GroupRingElement":
        return self._coerce(other) - self

    def __mul__(self, other) -> "GroupRingElement":
        other = self._coerce(other)
        terms: Dict[GroupWord, RingElement] = {}
        zero = RingElement.zero(self.spec)
        for w1, c1 in self._terms.items():
            for w2, c2 in other._terms.items():
                key = reduce_word(w1 + w2)
                terms[key] = terms.get(key, zero) + c1 * c2
        return GroupRingElement(self.spec, self.mu, terms)

    def __rmul__(self, other) -> "GroupRingElement":
        return self._coerce(other) * self

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            return self == GroupRingElement.constant(self.spec, self.mu, other)
        if not isinstance(other, GroupRingElement):
            return NotImplemented
        return self.spec == other.spec and self.mu == other.mu and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.spec, self.mu, frozenset(self._terms.items())))

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts: List[str] = []
        for word, coeff in self.sorted_terms():
            negative = coeff.degree() <= 0 and coeff.epsilon() < 0
            magnitude = -coeff if negative else coeff
            letters = format_group_word(word)
            if not word:
                text = str(magnitude)
            elif magnitude == 1:
                text = letters
            elif magnitude.degree() <= 0:
                text = f"{magnitude}*{letters}"
            else:
                text = f"({magnitude})*{letters}"
            if not parts:
                parts.append(("-" if negative else "") + text)
            else:
                parts.append((" - " if negative else " + ") + text)
        return "".join(parts)

    def __repr__(self) -> str:
        return f"GroupRingElement({self.spec}, mu={self.mu}, {str(self)!r})"


def group_ring_arith(a: GroupRingElement, b: Optional[GroupRingElement], kind: ArithKind) -> GroupRingElement:
    """
    群环 AF_μ 上的 a+b, a-b, -a 或 a·b

    Raises:
        SpecMismatch: 系数环或秩不一致
    """
    if kind is ArithKind.NEG:
        return -a
    if b is None:
        raise ValueError(f"{kind.value} 需要两个操作数")
    a._check(b)
    if kind is ArithKind.ADD:
        return a + b
    if kind is ArithKind.SUB:
        return a - b
    return a * b


def group_augmentation(a: GroupRingElement) -> RingElement:
    """ε: zᵢ ↦ 1"""
    total = RingElement.zero(a.spec)
    for coeff in a.terms.values():
        total = total + coeff
    return total


def _letter_series(spec: RingSpec, mu: int, order: int, letter: int) -> TruncatedSeries:
    index = abs(letter)
    if letter > 0:
        return TruncatedSeries(spec, mu, order, {(): 1, (index,): 1})
    return TruncatedSeries(spec, mu, order, {(index,) * k: (-1) ** k for k in range(order + 1)})


def magnus_expand(a: GroupRingElement, order: int) -> TruncatedSeries:
    """
    Magnus 展开 zᵢ ↦ 1 + xᵢ，zᵢ⁻¹ ↦ 1 − xᵢ + xᵢ² − …

    Args:
        a: 群环元素
        order: 截断阶数 N

    Returns:
        A⟨⟨X⟩⟩ 中截断到 N 阶的级数
    """
    cache: Dict[int, TruncatedSeries] = {}
    total = TruncatedSeries.zero(a.spec, a.mu, order)
    for word, coeff in a.terms.items():
        term = TruncatedSeries.constant(a.spec, a.mu, order, coeff)
        for letter in word:
            if letter not in cache:
                cache[letter] = _letter_series(a.spec, a.mu, order, letter)
            term = term * cache[letter]
        total = total + term
    return total


def magnus_expand_matrix(matrix: Sequence[Sequence[GroupRingElement]], order: int) -> SeriesMatrix:
    return SeriesMatrix([[magnus_expand(entry, order) for entry in row] for row in matrix])


def psi_check(matrix: Sequence[Sequence[GroupRingElement]], degree_bound: Optional[int] = None) -> bool:
    """
    判定 M 是否属于 Ψ（ε(M) 可逆）

    Raises:
        NotSquare: M 不是方阵
        BoundExceeded: 未判定
    """
    if not matrix or any(len(row) != len(matrix) for row in matrix):
        raise NotSquare("Ψ 判定需要方阵")
    spec = matrix[0][0].spec
    augmented = RingMatrix(spec, [[group_augmentation(entry) for entry in row] for row in matrix])
    try:
        mat_inverse_graded(augmented, degree_bound)
    except NotUnit:
        return False
    return True


def group_to_expr(a: GroupRingElement) -> RationalExpr:
    """zᵢ ↦ (1 + xᵢ)，zᵢ⁻¹ ↦ Inv(1 + xᵢ)"""
    spec, mu = a.spec, a.mu
    total: Optional[RationalExpr] = None
    for word, coeff in a.sorted_terms():
        term: RationalExpr = make_leaf(Polynomial.constant(spec, mu, coeff))
        for letter in word:
            base = Polynomial.constant(spec, mu, 1) + Polynomial.variable(spec, mu, abs(letter))
            factor = Atom(base) if letter > 0 else Inv(Atom(base))
            term = combine_expr(ArithKind.MUL, term, factor)
        total = term if total is None else combine_expr(ArithKind.ADD, total, term)
    if total is None:
        return make_leaf(Polynomial.constant(spec, mu, 0))
    return total


def group_to_machine(a: GroupRingElement, degree_bound: Optional[int] = None) -> LinearMachine:
    """同态 ℓ: AF_μ → Σ⁻¹A⟨X⟩，结果展开等于 magnus_expand(a, N)"""
    machine = linearize(group_to_expr(a), degree_bound)
    logger.debug("group_linearized", terms=len(a.terms), dim=machine.dim)
    return machine


def polynomial_to_group_ring(poly: Polynomial) -> GroupRingElement:
    """m: A⟨X⟩ → AF_μ，xᵢ ↦ zᵢ − 1"""
    total = GroupRingElement(poly.spec, poly.mu)
    for word, coeff in poly.terms.items():
        term = GroupRingElement.constant(poly.spec, poly.mu, coeff)
        for index in word:
            term = term * (GroupRingElement.generator(poly.spec, poly.mu, index) - 1)
        total = total + term
    return total
