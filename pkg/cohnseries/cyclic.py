"""
循环商模块

Ā = A/ℤ{ab − ba} 作为项链（单词的循环等价类）上的自由 ℤ 模，
以及迹不变量 χ 与迹对数导数映射 T。
"""

from types import MappingProxyType
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import structlog

from .core.errors import InvalidOrder, MultiVariable, NotSquare, SpecMismatch
from .graded_ring import RingElement, RingMatrix, RingSpec, Word
from .ncseries import SeriesMatrix, TruncatedSeries, series_mat_inverse

logger = structlog.get_logger(__name__)


def least_rotation(sequence: Sequence) -> int:
    """
    Booth 算法：返回字典序最小旋转的起点

    Args:
        sequence: 可比较元素的序列

    Returns:
        下标 k，使 sequence[k:] + sequence[:k] 最小
    """
    doubled = list(sequence) + list(sequence)
    failure = [-1] * len(doubled)
    k = 0
    for j in range(1, len(doubled)):
        current = doubled[j]
        i = failure[j - k - 1]
        while i != -1 and current != doubled[k + i + 1]:
            if current < doubled[k + i + 1]:
                k = j - i - 1
            i = failure[i]
        if current != doubled[k + i + 1]:
            # i == -1
            if current < doubled[k]:
                k = j
            failure[j - k] = -1
        else:
            failure[j - k] = i + 1
    return k % len(sequence) if sequence else 0


def canonical_necklace(word: Sequence[str], spec: RingSpec) -> Word:
    """按环规格的符号顺序取最小旋转"""
    word = tuple(word)
    index = spec.symbol_index
    start = least_rotation([index[symbol] for symbol in word])
    return word[start:] + word[:start]


def is_annihilated_necklace(word: Sequence[str], spec: RingSpec) -> bool:
    """某个旋转含禁止因子时项链在商中为 0"""
    word = tuple(word)
    return any(not spec.is_normal(word[k:] + word[:k]) for k in range(max(len(word), 1)))


class NecklaceElement:
    """
    Ā 中的元素：规范项链到非零整数的有限映射

    键都是自身的最小旋转，且没有任何旋转含禁止因子。
    """

    __slots__ = ("spec", "_terms")

    def __init__(self, spec: RingSpec, terms: Optional[Mapping[Sequence[str], int]] = None):
        self.spec = spec
        cleaned: Dict[Word, int] = {}
        for word, coeff in (terms or {}).items():
            spec.check_word(word)
            if not coeff or is_annihilated_necklace(word, spec):
                continue
            key = canonical_necklace(word, spec)
            cleaned[key] = cleaned.get(key, 0) + coeff
        self._terms = {w: c for w, c in cleaned.items() if c}

    @classmethod
    def zero(cls, spec: RingSpec) -> "NecklaceElement":
        return cls(spec)

    @property
    def terms(self) -> Mapping[Word, int]:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, word: Sequence[str]) -> int:
        if is_annihilated_necklace(word, self.spec):
            return 0
        return self._terms.get(canonical_necklace(word, self.spec), 0)

    def sorted_terms(self) -> List[Tuple[Word, int]]:
        return sorted(self._terms.items(), key=lambda item: self.spec.word_key(item[0]))

    def _check(self, other: "NecklaceElement") -> None:
        if other.spec != self.spec:
            raise SpecMismatch(f"环规格不一致: {self.spec} vs {other.spec}")

    def __add__(self, other: "NecklaceElement") -> "NecklaceElement":
        self._check(other)
        terms = dict(self._terms)
        for word, coeff in other._terms.items():
            terms[word] = terms.get(word, 0) + coeff
        return NecklaceElement(self.spec, terms)

    def __neg__(self) -> "NecklaceElement":
        return NecklaceElement(self.spec, {w: -c for w, c in self._terms.items()})

    def __sub__(self, other: "NecklaceElement") -> "NecklaceElement":
        return self + (-other)

    def __mul__(self, scalar: int) -> "NecklaceElement":
        return NecklaceElement(self.spec, {w: c * scalar for w, c in self._terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            return self._terms == ({(): other} if other else {})
        if not isinstance(other, NecklaceElement):
            return NotImplemented
        return self.spec == other.spec and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.spec, frozenset(self._terms.items())))

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts: List[str] = []
        for word, coeff in self.sorted_terms():
            body = f"{abs(coeff)}·[{' '.join(word)}]" if word else str(abs(coeff))
            if not parts:
                parts.append(body if coeff > 0 else "-" + body)
            else:
                parts.append(("+ " if coeff > 0 else "- ") + body)
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"NecklaceElement({self})"


def project_necklace(a: RingElement) -> NecklaceElement:
    """A → Ā：每个单词映到其规范旋转"""
    return NecklaceElement(a.spec, dict(a.terms))


def necklace_trace(matrix: RingMatrix) -> NecklaceElement:
    """迹在 Ā 中的像"""
    return project_necklace(matrix.trace())


def chi(alpha: RingMatrix, order: int) -> List[NecklaceElement]:
    """
    χ[α] = Σ_{i≥1} Trace(αⁱ)xⁱ，返回 x¹…x^N 的系数

    Raises:
        NotSquare: α 不是方阵
    """
    if not alpha.is_square:
        raise NotSquare(f"χ 需要方阵，得到 {alpha.rows}×{alpha.cols}")
    if order < 0:
        raise InvalidOrder(f"截断阶数必须非负: {order}")
    result: List[NecklaceElement] = []
    power = alpha
    for _ in range(order):
        result.append(necklace_trace(power))
        power = power * alpha
    return result


def characteristic_matrix(alpha: RingMatrix, order: int) -> SeriesMatrix:
    """1 − αx 作为 mu = 1 的级数矩阵"""
    if not alpha.is_square:
        raise NotSquare(f"需要方阵，得到 {alpha.rows}×{alpha.cols}")
    return SeriesMatrix([
        [TruncatedSeries(alpha.spec, 1, order, {(): int(i == j), (1,): -alpha[i, j]})
         for j in range(alpha.cols)]
        for i in range(alpha.rows)
    ])


def series_necklaces(series: TruncatedSeries, order: Optional[int] = None) -> List[NecklaceElement]:
    """单变量级数 x¹…x^N 系数的项链投影"""
    if series.mu != 1:
        raise MultiVariable(f"只支持 mu = 1，得到 mu = {series.mu}")
    order = series.order if order is None else order
    return [project_necklace(series.coefficient((1,) * i)) for i in range(1, order + 1)]


def tmap(matrix: SeriesMatrix, order: Optional[int] = None,
         degree_bound: Optional[int] = None) -> List[NecklaceElement]:
    """
    T[M] = −Trace((x·dM/dx)·M⁻¹)，返回 x¹…x^N 的项链系数

    Args:
        matrix: mu = 1 的方阵，常数项可逆
        order: 截断阶数，默认取矩阵自身的阶
        degree_bound: 常数项分次求逆的次数界

    Raises:
        MultiVariable: mu ≠ 1
        NotUnit: 常数项不可逆
        InvalidOrder: order 超过矩阵的截断阶数
    """
    if matrix.mu != 1:
        raise MultiVariable(f"T 只支持 mu = 1，得到 mu = {matrix.mu}")
    if not matrix.is_square:
        raise NotSquare(f"T 需要方阵，得到 {matrix.rows}×{matrix.cols}")
    if order is None:
        order = matrix.order
    matrix = matrix.truncate(order)
    inverse = series_mat_inverse(matrix, degree_bound)
    value = -(matrix.euler_derivative() * inverse).trace()
    return series_necklaces(value, order)


def necklace_list_str(values: Sequence[NecklaceElement]) -> List[str]:
    """逐阶文本：'x^i: ...'"""
    return [f"x^{i}: {value}" for i, value in enumerate(values, 1)]


def add_necklace_lists(a: Sequence[NecklaceElement],
                       b: Sequence[NecklaceElement]) -> List[NecklaceElement]:
    if len(a) != len(b):
        raise InvalidOrder(f"长度不一致: {len(a)} vs {len(b)}")
    return [x + y for x, y in zip(a, b)]


def sub_necklace_lists(a: Sequence[NecklaceElement],
                       b: Sequence[NecklaceElement]) -> List[NecklaceElement]:
    if len(a) != len(b):
        raise InvalidOrder(f"长度不一致: {len(a)} vs {len(b)}")
    return [x - y for x, y in zip(a, b)]
