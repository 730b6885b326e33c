"""
截断形式幂级数模块

系数环 A 上非交换不定元 X = {x1, …, xμ} 的截断幂级数 A⟨⟨X⟩⟩（μ = 1 时即
中心变量 x 的 A[[x]]），以及多项式 A⟨X⟩。不定元与系数可交换。
"""

from types import MappingProxyType
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import structlog

from .core.errors import InvalidOrder, MultiVariable, NotSquare, SpecMismatch
from .graded_ring import ArithKind, RingElement, RingMatrix, RingSpec, mat_inverse_graded

logger = structlog.get_logger(__name__)

# 不定元单词：下标序列，1 表示 x1
XWord = Tuple[int, ...]
Coefficient = Union[int, RingElement]


def format_xword(word: XWord) -> str:
    return " ".join(f"x{i}" for i in word)


def parse_xword(text: str, mu: int) -> XWord:
    """把 "x1 x2" 解析为 (1, 2)；空串为空单词"""
    word = []
    for token in text.split():
        if not token.startswith("x") or not token[1:].isdigit():
            raise ValueError(f"非法的不定元: {token!r}")
        index = int(token[1:])
        if not 1 <= index <= mu:
            raise ValueError(f"不定元 {token} 超出 mu = {mu}")
        word.append(index)
    return tuple(word)


def _coerce_coefficient(spec: RingSpec, value: Coefficient) -> RingElement:
    if isinstance(value, int):
        return RingElement.constant(spec, value)
    if value.spec != spec:
        raise SpecMismatch(f"系数环规格不一致: {value.spec} vs {spec}")
    return value


def _check_word(word: XWord, mu: int) -> XWord:
    word = tuple(word)
    for index in word:
        if not 1 <= index <= mu:
            raise ValueError(f"不定元下标 {index} 超出 mu = {mu}")
    return word


# === 多项式 A⟨X⟩ ===

class Polynomial:
    """
    A⟨X⟩ 中的多项式（有限支撑，精确）

    terms: 不定元单词 → 非零 RingElement 系数
    """

    __slots__ = ("spec", "mu", "_terms")

    def __init__(self, spec: RingSpec, mu: int, terms: Optional[Mapping[XWord, Coefficient]] = None):
        if mu < 1:
            raise ValueError(f"mu 必须 ≥ 1: {mu}")
        self.spec = spec
        self.mu = mu
        cleaned: Dict[XWord, RingElement] = {}
        for word, coeff in (terms or {}).items():
            word = _check_word(word, mu)
            coeff = _coerce_coefficient(spec, coeff)
            total = cleaned.get(word, RingElement.zero(spec)) + coeff
            if total:
                cleaned[word] = total
            else:
                cleaned.pop(word, None)
        self._terms = cleaned

    @classmethod
    def constant(cls, spec: RingSpec, mu: int, value: Coefficient) -> "Polynomial":
        return cls(spec, mu, {(): value})

    @classmethod
    def variable(cls, spec: RingSpec, mu: int, index: int) -> "Polynomial":
        return cls(spec, mu, {(index,): 1})

    @property
    def terms(self) -> Mapping[XWord, RingElement]:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((len(w) for w in self._terms), default=-1)

    def constant_term(self) -> RingElement:
        return self._terms.get((), RingElement.zero(self.spec))

    def coefficient(self, word: XWord) -> RingElement:
        return self._terms.get(tuple(word), RingElement.zero(self.spec))

    def sorted_terms(self) -> List[Tuple[XWord, RingElement]]:
        return sorted(self._terms.items(), key=lambda item: (len(item[0]), item[0]))

    def _check(self, other: "Polynomial") -> None:
        if other.spec != self.spec or other.mu != self.mu:
            raise SpecMismatch("多项式的环规格或 mu 不一致")

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._check(other)
        terms = dict(self._terms)
        for word, coeff in other._terms.items():
            terms[word] = terms.get(word, RingElement.zero(self.spec)) + coeff
        return Polynomial(self.spec, self.mu, terms)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.spec, self.mu, {w: -c for w, c in self._terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        self._check(other)
        terms: Dict[XWord, RingElement] = {}
        zero = RingElement.zero(self.spec)
        for u, a in self._terms.items():
            for v, b in other._terms.items():
                terms[u + v] = terms.get(u + v, zero) + a * b
        return Polynomial(self.spec, self.mu, terms)

    def to_series(self, order: int) -> "TruncatedSeries":
        return TruncatedSeries(self.spec, self.mu, order, self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.spec == other.spec and self.mu == other.mu and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.spec, self.mu, frozenset(self._terms.items())))

    def to_expr_text(self) -> str:
        """
        按表达式语法输出，例如 "1 - s*x1"

        系数按单项展开，保证能被解析器读回同一个多项式。
        """
        pieces: List[Tuple[int, List[str]]] = []
        for xword, coeff in self.sorted_terms():
            for word, c in coeff.sorted_terms():
                factors = list(word) + [f"x{i}" for i in xword]
                pieces.append((c, factors))
        if not pieces:
            return "0"
        out: List[str] = []
        for i, (c, factors) in enumerate(pieces):
            magnitude = abs(c)
            if not factors:
                body = str(magnitude)
            elif magnitude == 1:
                body = "*".join(factors)
            else:
                body = f"{magnitude}*" + "*".join(factors)
            if i == 0:
                out.append(("-" if c < 0 else "") + body)
            else:
                out.append((" - " if c < 0 else " + ") + body)
        return "".join(out)

    def __str__(self) -> str:
        return self.to_expr_text()

    def __repr__(self) -> str:
        return f"Polynomial({self.spec}, mu={self.mu}, {self.to_expr_text()!r})"


# === 截断级数 ===

class TruncatedSeries:
    """
    截断到 N 阶的幂级数

    不可变；只保存长度 ≤ N 的单词和非零正规系数。截断阶数随值携带，
    混合阶运算截断到较小的阶。
    """

    __slots__ = ("spec", "mu", "order", "_coeffs")

    def __init__(self, spec: RingSpec, mu: int, order: int,
                 coeffs: Optional[Mapping[XWord, Coefficient]] = None):
        if order < 0:
            raise InvalidOrder(f"截断阶数必须非负: {order}")
        if mu < 1:
            raise ValueError(f"mu 必须 ≥ 1: {mu}")
        self.spec = spec
        self.mu = mu
        self.order = order
        cleaned: Dict[XWord, RingElement] = {}
        for word, coeff in (coeffs or {}).items():
            word = _check_word(word, mu)
            if len(word) > order:
                continue
            coeff = _coerce_coefficient(spec, coeff)
            if coeff:
                cleaned[word] = coeff
        self._coeffs = cleaned

    @classmethod
    def _trusted(cls, spec: RingSpec, mu: int, order: int, coeffs: Dict[XWord, RingElement]) -> "TruncatedSeries":
        out = cls.__new__(cls)
        out.spec = spec
        out.mu = mu
        out.order = order
        out._coeffs = coeffs
        return out

    # --- 构造器 ---

    @classmethod
    def zero(cls, spec: RingSpec, mu: int, order: int) -> "TruncatedSeries":
        return cls(spec, mu, order)

    @classmethod
    def constant(cls, spec: RingSpec, mu: int, order: int, value: Coefficient) -> "TruncatedSeries":
        return cls(spec, mu, order, {(): value})

    @classmethod
    def one(cls, spec: RingSpec, mu: int, order: int) -> "TruncatedSeries":
        return cls.constant(spec, mu, order, 1)

    @classmethod
    def monomial(cls, spec: RingSpec, mu: int, order: int, word: XWord,
                 value: Coefficient = 1) -> "TruncatedSeries":
        return cls(spec, mu, order, {tuple(word): value})

    # --- 访问 ---

    @property
    def coeffs(self) -> Mapping[XWord, RingElement]:
        return MappingProxyType(self._coeffs)

    def coefficient(self, word: XWord) -> RingElement:
        word = tuple(word)
        if len(word) > self.order:
            raise InvalidOrder(f"单词长度 {len(word)} 超过截断阶数 {self.order}")
        return self._coeffs.get(word, RingElement.zero(self.spec))

    def is_zero(self) -> bool:
        return not self._coeffs

    def sorted_terms(self) -> List[Tuple[XWord, RingElement]]:
        return sorted(self._coeffs.items(), key=lambda item: (len(item[0]), item[0]))

    def low_order(self) -> int:
        """最低非零项的次数（零级数返回 -1）"""
        return min((len(w) for w in self._coeffs), default=-1)

    # --- 算术 ---

    def _check(self, other: "TruncatedSeries") -> None:
        if other.spec != self.spec:
            raise SpecMismatch(f"系数环规格不一致: {self.spec} vs {other.spec}")
        if other.mu != self.mu:
            raise SpecMismatch(f"不定元个数不一致: {self.mu} vs {other.mu}")

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        order = min(self.order, other.order)
        terms: Dict[XWord, RingElement] = {w: c for w, c in self._coeffs.items() if len(w) <= order}
        for word, coeff in other._coeffs.items():
            if len(word) > order:
                continue
            total = terms[word] + coeff if word in terms else coeff
            if total:
                terms[word] = total
            else:
                terms.pop(word, None)
        return TruncatedSeries._trusted(self.spec, self.mu, order, terms)

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries._trusted(self.spec, self.mu, self.order,
                                        {w: -c for w, c in self._coeffs.items()})

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return self + (-other)

    def __mul__(self, other: Union["TruncatedSeries", Coefficient]) -> "TruncatedSeries":
        if not isinstance(other, TruncatedSeries):
            scalar = _coerce_coefficient(self.spec, other)
            return TruncatedSeries._trusted(self.spec, self.mu, self.order, {
                w: p for w, c in self._coeffs.items() if (p := c * scalar)
            })
        self._check(other)
        order = min(self.order, other.order)
        terms: Dict[XWord, RingElement] = {}
        for u, a in self._coeffs.items():
            room = order - len(u)
            if room < 0:
                continue
            for v, b in other._coeffs.items():
                if len(v) > room:
                    continue
                product = a * b
                if product:
                    word = u + v
                    terms[word] = terms[word] + product if word in terms else product
        return TruncatedSeries._trusted(self.spec, self.mu, order, {w: c for w, c in terms.items() if c})

    def __rmul__(self, other: Coefficient) -> "TruncatedSeries":
        scalar = _coerce_coefficient(self.spec, other)
        return TruncatedSeries._trusted(self.spec, self.mu, self.order, {
            w: p for w, c in self._coeffs.items() if (p := scalar * c)
        })

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise InvalidOrder(f"不能把 {self.order} 阶级数扩展到 {order} 阶")
        return TruncatedSeries._trusted(self.spec, self.mu, order,
                                        {w: c for w, c in self._coeffs.items() if len(w) <= order})

    def augment(self) -> RingElement:
        return self._coeffs.get((), RingElement.zero(self.spec))

    def x_derivative(self) -> "TruncatedSeries":
        """d/dx，输出阶数 N−1（只适用于 mu = 1）"""
        if self.mu != 1:
            raise MultiVariable(f"求导只支持 mu = 1，得到 mu = {self.mu}")
        if self.order == 0:
            raise InvalidOrder("0 阶级数的导数没有已知系数")
        return TruncatedSeries._trusted(self.spec, 1, self.order - 1, {
            w[1:]: c * len(w) for w, c in self._coeffs.items() if w
        })

    def euler_derivative(self) -> "TruncatedSeries":
        """x·d/dx，保持阶数 N（只适用于 mu = 1）"""
        if self.mu != 1:
            raise MultiVariable(f"求导只支持 mu = 1，得到 mu = {self.mu}")
        return TruncatedSeries._trusted(self.spec, 1, self.order, {
            w: c * len(w) for w, c in self._coeffs.items() if w
        })

    # --- 比较与显示 ---

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (self.spec == other.spec and self.mu == other.mu
                and self.order == other.order and self._coeffs == other._coeffs)

    def __hash__(self) -> int:
        return hash((self.spec, self.mu, self.order, frozenset(self._coeffs.items())))

    def __str__(self) -> str:
        if not self._coeffs:
            return "0"
        parts = []
        for word, coeff in self.sorted_terms():
            if word:
                parts.append(f"({coeff})·{format_xword(word)}")
            else:
                parts.append(f"({coeff})")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"TruncatedSeries({self.spec}, mu={self.mu}, N={self.order}, {str(self)!r})"


def series_arith(p: TruncatedSeries, q: Optional[TruncatedSeries], kind: ArithKind) -> TruncatedSeries:
    """按 kind 计算 p+q, p−q, −p 或 Cauchy 积 p·q（截断到 min(N_p, N_q)）"""
    if kind is ArithKind.NEG:
        return -p
    if q is None:
        raise ValueError(f"{kind.value} 需要两个操作数")
    if kind is ArithKind.ADD:
        return p + q
    if kind is ArithKind.SUB:
        return p - q
    return p * q


def series_augment(p: TruncatedSeries) -> RingElement:
    """增广 ε：常数项"""
    return p.augment()


def series_x_derivative(p: TruncatedSeries) -> TruncatedSeries:
    return p.x_derivative()


def series_euler_derivative(p: TruncatedSeries) -> TruncatedSeries:
    return p.euler_derivative()


# === 级数矩阵 ===

class SeriesMatrix:
    """元素为同阶截断级数的矩阵"""

    __slots__ = ("spec", "mu", "order", "_rows", "rows", "cols")

    def __init__(self, entries: Sequence[Sequence[TruncatedSeries]]):
        if not entries or not entries[0]:
            raise ValueError("矩阵至少为 1×1")
        first = entries[0][0]
        width = len(entries[0])
        for row in entries:
            if len(row) != width:
                raise ValueError("矩阵各行长度不一致")
            for entry in row:
                if entry.spec != first.spec or entry.mu != first.mu:
                    raise SpecMismatch("矩阵元素的环规格或 mu 不一致")
                if entry.order != first.order:
                    raise InvalidOrder("矩阵元素的截断阶数不一致")
        self.spec = first.spec
        self.mu = first.mu
        self.order = first.order
        self._rows = tuple(tuple(row) for row in entries)
        self.rows = len(entries)
        self.cols = width

    # --- 构造器 ---

    @classmethod
    def identity(cls, spec: RingSpec, mu: int, order: int, n: int) -> "SeriesMatrix":
        return cls([[TruncatedSeries.constant(spec, mu, order, int(i == j)) for j in range(n)]
                    for i in range(n)])

    @classmethod
    def zero(cls, spec: RingSpec, mu: int, order: int, rows: int, cols: int) -> "SeriesMatrix":
        return cls([[TruncatedSeries.zero(spec, mu, order) for _ in range(cols)] for _ in range(rows)])

    @classmethod
    def from_ring_matrix(cls, matrix: RingMatrix, mu: int, order: int) -> "SeriesMatrix":
        """把常数矩阵嵌入级数矩阵"""
        return cls([[TruncatedSeries.constant(matrix.spec, mu, order, matrix[i, j])
                     for j in range(matrix.cols)] for i in range(matrix.rows)])

    @classmethod
    def block(cls, blocks: Sequence[Sequence["SeriesMatrix"]]) -> "SeriesMatrix":
        entries: List[List[TruncatedSeries]] = []
        for block_row in blocks:
            height = block_row[0].rows
            for r in range(height):
                line: List[TruncatedSeries] = []
                for blk in block_row:
                    if blk.rows != height:
                        raise ValueError("块行高度不一致")
                    line.extend(blk._rows[r])
                entries.append(line)
        return cls(entries)

    # --- 访问 ---

    def __getitem__(self, index: Tuple[int, int]) -> TruncatedSeries:
        i, j = index
        return self._rows[i][j]

    def to_lists(self) -> List[List[TruncatedSeries]]:
        return [list(row) for row in self._rows]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_zero(self) -> bool:
        return all(entry.is_zero() for row in self._rows for entry in row)

    def constant_matrix(self) -> RingMatrix:
        """增广 ε(M)：逐元素取常数项"""
        return RingMatrix(self.spec, [[entry.augment() for entry in row] for row in self._rows])

    def trace(self) -> TruncatedSeries:
        if not self.is_square:
            raise NotSquare(f"迹需要方阵，得到 {self.rows}×{self.cols}")
        total = TruncatedSeries.zero(self.spec, self.mu, self.order)
        for i in range(self.rows):
            total = total + self._rows[i][i]
        return total

    def with_entry(self, i: int, j: int, value: TruncatedSeries) -> "SeriesMatrix":
        entries = self.to_lists()
        entries[i][j] = value
        return SeriesMatrix(entries)

    def map_entries(self, func) -> "SeriesMatrix":
        return SeriesMatrix([[func(entry) for entry in row] for row in self._rows])

    # --- 算术 ---

    def _check(self, other: "SeriesMatrix") -> None:
        if other.spec != self.spec or other.mu != self.mu:
            raise SpecMismatch("级数矩阵的环规格或 mu 不一致")

    def __add__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        self._check(other)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("矩阵维数不一致")
        return SeriesMatrix([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self._rows, other._rows)])

    def __neg__(self) -> "SeriesMatrix":
        return self.map_entries(lambda entry: -entry)

    def __sub__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        return self + (-other)

    def __mul__(self, other: Union["SeriesMatrix", TruncatedSeries, Coefficient]) -> "SeriesMatrix":
        if not isinstance(other, SeriesMatrix):
            return self.map_entries(lambda entry: entry * other)
        self._check(other)
        if self.cols != other.rows:
            raise ValueError(f"维数不匹配: {self.rows}×{self.cols} · {other.rows}×{other.cols}")
        order = min(self.order, other.order)
        product = []
        for row in self._rows:
            line = []
            for j in range(other.cols):
                total = TruncatedSeries.zero(self.spec, self.mu, order)
                for k, a in enumerate(row):
                    b = other._rows[k][j]
                    if not a.is_zero() and not b.is_zero():
                        total = total + a * b
                line.append(total)
            product.append(line)
        return SeriesMatrix(product)

    def __rmul__(self, other: Union[TruncatedSeries, Coefficient]) -> "SeriesMatrix":
        return self.map_entries(lambda entry: other * entry)

    def truncate(self, order: int) -> "SeriesMatrix":
        return self.map_entries(lambda entry: entry.truncate(order))

    def euler_derivative(self) -> "SeriesMatrix":
        return self.map_entries(lambda entry: entry.euler_derivative())

    def x_derivative(self) -> "SeriesMatrix":
        return self.map_entries(lambda entry: entry.x_derivative())

    def __eq__(self, other) -> bool:
        if not isinstance(other, SeriesMatrix):
            return NotImplemented
        return self._rows == other._rows

    def __hash__(self) -> int:
        return hash(self._rows)

    def __str__(self) -> str:
        return "\n".join("[" + ", ".join(str(entry) for entry in row) + "]" for row in self._rows)

    def __repr__(self) -> str:
        return f"SeriesMatrix({self.spec}, mu={self.mu}, N={self.order}, {self.rows}×{self.cols})"


def series_mat_inverse(matrix: SeriesMatrix, degree_bound: Optional[int] = None) -> SeriesMatrix:
    """
    截断级数矩阵求逆

    M = M₀(I − E)，E 常数项为零，逆 = (Σ_{k≤N} E^k)·M₀⁻¹。

    Args:
        matrix: 方阵，常数项矩阵须在系数环上可逆
        degree_bound: 传给 mat_inverse_graded 的次数界

    Returns:
        M⁻¹（截断到同阶）

    Raises:
        NotUnit: 常数项不可逆（即不属于 Σ）
        BoundExceeded: 常数项的分次求逆未判定
    """
    if not matrix.is_square:
        raise NotSquare(f"求逆需要方阵，得到 {matrix.rows}×{matrix.cols}")
    n = matrix.rows
    constant_inverse = mat_inverse_graded(matrix.constant_matrix(), degree_bound)
    embedded = SeriesMatrix.from_ring_matrix(constant_inverse, matrix.mu, matrix.order)
    identity = SeriesMatrix.identity(matrix.spec, matrix.mu, matrix.order, n)
    error = identity - embedded * matrix

    total = identity
    power = identity
    for _ in range(matrix.order):
        power = power * error
        if power.is_zero():
            break
        total = total + power
    return total * embedded
