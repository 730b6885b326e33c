"""
分次环模块

自由环 ℤ⟨Y⟩ 模单项式理想的精确算术：覆盖 ℤ（空字母表）、ℤ⟨f,s,g⟩、
S_m = ℤ⟨f,s,g | fg, fsg, …, fs^m g⟩ 以及 S（所有 fs^i g）。
正规形 = 删除含禁止因子的单词，因此不需要 Gröbner 基。
"""

import re
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import structlog
import sympy

from .core.errors import BoundExceeded, NotSquare, NotUnit, SpecMismatch, UnknownSymbol

logger = structlog.get_logger(__name__)

Word = Tuple[str, ...]
Scalar = Union[int, "RingElement"]

# 不定元名称保留给级数使用
_INDETERMINATE_NAME = re.compile(r"^x\d+$")

# 默认次数界的附加常数
DEFAULT_BOUND_SLACK = 4


class ArithKind(Enum):
    """算术运算种类"""
    ADD = "add"
    SUB = "sub"
    NEG = "neg"
    MUL = "mul"


# === 禁止因子扫描器 ===

class AhoCorasickScanner:
    """
    多模式子串自动机（按符号而非字符工作）

    每个 RingSpec 只构建一次，用于判断单词是否含有任何禁止因子。
    """

    def __init__(self, patterns: Iterable[Word]):
        self._goto: List[Dict[str, int]] = [{}]
        self._fail: List[int] = [0]
        self._terminal: List[bool] = [False]
        for pattern in patterns:
            self._insert(pattern)
        self._build()

    def _insert(self, pattern: Word) -> None:
        node = 0
        for symbol in pattern:
            nxt = self._goto[node].get(symbol)
            if nxt is None:
                nxt = len(self._goto)
                self._goto[node][symbol] = nxt
                self._goto.append({})
                self._fail.append(0)
                self._terminal.append(False)
            node = nxt
        self._terminal[node] = True

    def _build(self) -> None:
        """BFS 计算失败链接，并沿失败链传播终止标记"""
        queue: deque = deque()
        for child in self._goto[0].values():
            self._fail[child] = 0
            queue.append(child)

        while queue:
            current = queue.popleft()
            for symbol, child in self._goto[current].items():
                fallback = self._fail[current]
                while fallback and symbol not in self._goto[fallback]:
                    fallback = self._fail[fallback]
                target = self._goto[fallback].get(symbol, 0)
                self._fail[child] = target if target != child else 0
                self._terminal[child] = self._terminal[child] or self._terminal[self._fail[child]]
                queue.append(child)

    def contains_factor(self, word: Sequence[str]) -> bool:
        node = 0
        for symbol in word:
            while node and symbol not in self._goto[node]:
                node = self._fail[node]
            node = self._goto[node].get(symbol, 0)
            if self._terminal[node]:
                return True
        return False


class StarScanner:
    """
    星号模式 u v^k w (k ≥ 0) 的扫描器

    armed 为真表示刚读过 u v^k，下一个 w 即命中。
    """

    def __init__(self, head: str, body: str, tail: str):
        self.head = head
        self.body = body
        self.tail = tail

    def contains_factor(self, word: Sequence[str]) -> bool:
        armed = False
        for symbol in word:
            if armed:
                if symbol == self.tail:
                    return True
                if symbol == self.body or symbol == self.head:
                    continue
                armed = False
            elif symbol == self.head:
                armed = True
        return False


class _NoFactors:
    """空禁止集（自由环）"""

    def contains_factor(self, word: Sequence[str]) -> bool:
        return False


# === 环规格 ===

@dataclass(frozen=True)
class RingSpec:
    """
    单项式商环 ℤ⟨Y⟩/(禁止单词) 的规格

    forbidden 为有限禁止单词列表；star 为星号模式 (u, v, w)，
    表示所有 u v^k w。两者只取其一。
    """
    alphabet: Tuple[str, ...] = ()
    forbidden: Tuple[Word, ...] = ()
    star: Optional[Tuple[str, str, str]] = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError(f"字母表中有重复符号: {self.alphabet}")
        for symbol in self.alphabet:
            if not symbol or _INDETERMINATE_NAME.match(symbol):
                raise ValueError(f"非法的系数符号: {symbol!r}（x<数字> 保留给不定元）")
        if self.forbidden and self.star is not None:
            raise ValueError("forbidden 与 star 不能同时给出")
        for word in self.forbidden:
            if not word:
                raise ValueError("禁止单词不能为空")
            self.check_word(word)
        if self.star is not None:
            self.check_word(self.star)

    # --- 构造器 ---

    @classmethod
    def integers(cls) -> "RingSpec":
        return cls(label="Z")

    @classmethod
    def free(cls, symbols: Sequence[str]) -> "RingSpec":
        return cls(alphabet=tuple(symbols), label="free:" + ",".join(symbols))

    @classmethod
    def quotient(cls, symbols: Sequence[str], forbidden: Iterable[Sequence[str]]) -> "RingSpec":
        words = tuple(tuple(w) for w in forbidden)
        text = ",".join("".join(w) for w in words)
        return cls(alphabet=tuple(symbols), forbidden=words,
                   label="quot:" + ",".join(symbols) + "/" + text)

    @classmethod
    def stage(cls, m: Optional[int]) -> "RingSpec":
        """
        S_m（m 为整数）或 S（m 为 None）

        Args:
            m: 阶段 m ≥ 0，None 表示 ∞
        """
        alphabet = ("f", "s", "g")
        if m is None:
            return cls(alphabet=alphabet, star=("f", "s", "g"), label="S:inf")
        if m < 0:
            raise ValueError(f"阶段 m 必须非负: {m}")
        forbidden = tuple(("f",) + ("s",) * i + ("g",) for i in range(m + 1))
        return cls(alphabet=alphabet, forbidden=forbidden, label=f"S:{m}")

    # --- 查询 ---

    @cached_property
    def symbol_index(self) -> Dict[str, int]:
        return {symbol: i for i, symbol in enumerate(self.alphabet)}

    @cached_property
    def scanner(self):
        if self.star is not None:
            return StarScanner(*self.star)
        if self.forbidden:
            return AhoCorasickScanner(self.forbidden)
        return _NoFactors()

    @property
    def is_commutative(self) -> bool:
        return not self.alphabet

    def check_word(self, word: Sequence[str]) -> None:
        index = self.symbol_index
        for symbol in word:
            if symbol not in index:
                raise UnknownSymbol(f"符号 {symbol!r} 不在字母表 {list(self.alphabet)} 中")

    def is_normal(self, word: Sequence[str]) -> bool:
        return not self.scanner.contains_factor(word)

    def word_key(self, word: Word) -> Tuple[int, Tuple[int, ...]]:
        """先按长度、再按字母表顺序的字典序"""
        index = self.symbol_index
        return (len(word), tuple(index[s] for s in word))

    def __str__(self) -> str:
        if self.label:
            return self.label
        if self.star is not None:
            return "star:" + ",".join(self.alphabet) + "/" + "".join(self.star)
        return "quot:" + ",".join(self.alphabet) + "/" + ",".join("".join(w) for w in self.forbidden)


# === 环元素 ===

class RingElement:
    """
    整系数单词线性组合（正规形）

    不可变；terms 中的单词不含禁止因子，系数非零。
    """

    __slots__ = ("_spec", "_terms", "_hash")

    def __init__(self, spec: RingSpec, terms: Optional[Mapping[Word, int]] = None):
        cleaned: Dict[Word, int] = {}
        for word, coeff in (terms or {}).items():
            word = tuple(word)
            spec.check_word(word)
            if coeff and spec.is_normal(word):
                cleaned[word] = cleaned.get(word, 0) + coeff
        self._spec = spec
        self._terms = {w: c for w, c in cleaned.items() if c}
        self._hash = None

    @classmethod
    def _trusted(cls, spec: RingSpec, terms: Dict[Word, int]) -> "RingElement":
        """跳过校验的内部构造（terms 已是正规形）"""
        out = cls.__new__(cls)
        out._spec = spec
        out._terms = terms
        out._hash = None
        return out

    # --- 基本元素 ---

    @classmethod
    def zero(cls, spec: RingSpec) -> "RingElement":
        return cls._trusted(spec, {})

    @classmethod
    def one(cls, spec: RingSpec) -> "RingElement":
        return cls.constant(spec, 1)

    @classmethod
    def constant(cls, spec: RingSpec, value: int) -> "RingElement":
        return cls._trusted(spec, {(): value} if value else {})

    @classmethod
    def symbol(cls, spec: RingSpec, name: str) -> "RingElement":
        return cls(spec, {(name,): 1})

    @classmethod
    def word(cls, spec: RingSpec, word: Sequence[str], coeff: int = 1) -> "RingElement":
        return cls(spec, {tuple(word): coeff})

    # --- 访问 ---

    @property
    def spec(self) -> RingSpec:
        return self._spec

    @property
    def terms(self) -> Mapping[Word, int]:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def coefficient(self, word: Sequence[str]) -> int:
        return self._terms.get(tuple(word), 0)

    def degree(self) -> int:
        """最高次数（零元素返回 -1）"""
        return max((len(w) for w in self._terms), default=-1)

    def sorted_terms(self) -> List[Tuple[Word, int]]:
        key = self._spec.word_key
        return sorted(self._terms.items(), key=lambda item: key(item[0]))

    # --- 算术 ---

    def _coerce(self, other: Scalar) -> "RingElement":
        if isinstance(other, RingElement):
            if other._spec != self._spec:
                raise SpecMismatch(f"环规格不一致: {self._spec} vs {other._spec}")
            return other
        if isinstance(other, int):
            return RingElement.constant(self._spec, other)
        return NotImplemented

    def __add__(self, other: Scalar) -> "RingElement":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        terms = dict(self._terms)
        for word, coeff in other._terms.items():
            total = terms.get(word, 0) + coeff
            if total:
                terms[word] = total
            else:
                terms.pop(word, None)
        return RingElement._trusted(self._spec, terms)

    __radd__ = __add__

    def __neg__(self) -> "RingElement":
        return RingElement._trusted(self._spec, {w: -c for w, c in self._terms.items()})

    def __sub__(self, other: Scalar) -> "RingElement":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Scalar) -> "RingElement":
        return (-self) + other

    def __mul__(self, other: Scalar) -> "RingElement":
        if isinstance(other, int):
            if not other:
                return RingElement.zero(self._spec)
            return RingElement._trusted(self._spec, {w: c * other for w, c in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        is_normal = self._spec.is_normal
        terms: Dict[Word, int] = {}
        for left, a in self._terms.items():
            for right, b in other._terms.items():
                word = left + right
                # 两个正规单词的乘积只可能在拼接处产生禁止因子
                if left and right and not is_normal(word):
                    continue
                terms[word] = terms.get(word, 0) + a * b
        return RingElement._trusted(self._spec, {w: c for w, c in terms.items() if c})

    def __rmul__(self, other: Scalar) -> "RingElement":
        if isinstance(other, int):
            return self * other
        return NotImplemented

    def __pow__(self, exponent: int) -> "RingElement":
        if exponent < 0:
            raise ValueError("只支持非负整数次幂")
        result = RingElement.one(self._spec)
        for _ in range(exponent):
            result = result * self
        return result

    # --- 分次结构 ---

    def graded_component(self, k: int) -> "RingElement":
        return RingElement._trusted(self._spec, {w: c for w, c in self._terms.items() if len(w) == k})

    def epsilon(self) -> int:
        return self._terms.get((), 0)

    # --- 比较与显示 ---

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            return self._terms == ({(): other} if other else {})
        if not isinstance(other, RingElement):
            return NotImplemented
        return self._spec == other._spec and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._spec, frozenset(self._terms.items())))
        return self._hash

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts: List[str] = []
        for i, (word, coeff) in enumerate(self.sorted_terms()):
            magnitude = abs(coeff)
            if not word:
                text = str(magnitude)
            elif magnitude == 1:
                text = " ".join(word)
            else:
                text = f"{magnitude} " + " ".join(word)
            if i == 0:
                parts.append(("-" if coeff < 0 else "") + text)
            else:
                parts.append((" - " if coeff < 0 else " + ") + text)
        return "".join(parts)

    def __repr__(self) -> str:
        return f"RingElement({self._spec}, {str(self)!r})"


# === 规格化操作 ===

def normalize(raw: Mapping[Sequence[str], int], spec: RingSpec) -> RingElement:
    """
    把原始 单词→系数 映射化为正规形

    Args:
        raw: 原始映射，单词可含禁止因子
        spec: 环规格

    Returns:
        删除含禁止因子单词与零系数后的正规形
    """
    return RingElement(spec, {tuple(w): c for w, c in raw.items()})


def arith(a: RingElement, b: Optional[RingElement], kind: ArithKind) -> RingElement:
    """按 kind 计算 a+b, a-b, -a 或 a·b"""
    if kind is ArithKind.NEG:
        return -a
    if b is None:
        raise ValueError(f"{kind.value} 需要两个操作数")
    if a.spec != b.spec:
        raise SpecMismatch(f"环规格不一致: {a.spec} vs {b.spec}")
    if kind is ArithKind.ADD:
        return a + b
    if kind is ArithKind.SUB:
        return a - b
    return a * b


def epsilon(a: RingElement) -> int:
    """增广：次数0部分（空单词的整数系数）"""
    return a.epsilon()


def graded_component(a: RingElement, k: int) -> RingElement:
    if k < 0:
        raise ValueError(f"次数必须非负: {k}")
    return a.graded_component(k)


# === 矩阵 ===

class RingMatrix:
    """分次环上的矩阵（不可变，所有元素共享同一环规格）"""

    __slots__ = ("_spec", "_rows", "rows", "cols")

    def __init__(self, spec: RingSpec, entries: Sequence[Sequence[Scalar]]):
        if not entries or not entries[0]:
            raise ValueError("矩阵至少为 1×1")
        width = len(entries[0])
        rows: List[Tuple[RingElement, ...]] = []
        for row in entries:
            if len(row) != width:
                raise ValueError("矩阵各行长度不一致")
            converted = []
            for value in row:
                if isinstance(value, int):
                    value = RingElement.constant(spec, value)
                elif value.spec != spec:
                    raise SpecMismatch(f"矩阵元素环规格不一致: {value.spec} vs {spec}")
                converted.append(value)
            rows.append(tuple(converted))
        self._spec = spec
        self._rows = tuple(rows)
        self.rows = len(rows)
        self.cols = width

    # --- 构造器 ---

    @classmethod
    def identity(cls, spec: RingSpec, n: int) -> "RingMatrix":
        return cls(spec, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zero(cls, spec: RingSpec, rows: int, cols: int) -> "RingMatrix":
        return cls(spec, [[0] * cols for _ in range(rows)])

    @classmethod
    def from_ints(cls, spec: RingSpec, values: Sequence[Sequence[int]]) -> "RingMatrix":
        return cls(spec, values)

    @classmethod
    def block(cls, spec: RingSpec, blocks: Sequence[Sequence["RingMatrix"]]) -> "RingMatrix":
        """按块拼装矩阵，每个块行的高度、每个块列的宽度必须一致"""
        entries: List[List[RingElement]] = []
        for block_row in blocks:
            height = block_row[0].rows
            for r in range(height):
                line: List[RingElement] = []
                for blk in block_row:
                    if blk.rows != height:
                        raise ValueError("块行高度不一致")
                    line.extend(blk._rows[r])
                entries.append(line)
        return cls(spec, entries)

    # --- 访问 ---

    @property
    def spec(self) -> RingSpec:
        return self._spec

    def __getitem__(self, index: Tuple[int, int]) -> RingElement:
        i, j = index
        return self._rows[i][j]

    def row(self, i: int) -> Tuple[RingElement, ...]:
        return self._rows[i]

    def to_lists(self) -> List[List[RingElement]]:
        return [list(row) for row in self._rows]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_zero(self) -> bool:
        return all(entry.is_zero() for row in self._rows for entry in row)

    def max_degree(self) -> int:
        return max((entry.degree() for row in self._rows for entry in row), default=-1)

    def epsilon_matrix(self) -> List[List[int]]:
        return [[entry.epsilon() for entry in row] for row in self._rows]

    def trace(self) -> RingElement:
        if not self.is_square:
            raise NotSquare(f"迹需要方阵，得到 {self.rows}×{self.cols}")
        total = RingElement.zero(self._spec)
        for i in range(self.rows):
            total = total + self._rows[i][i]
        return total

    # --- 算术 ---

    def _check(self, other: "RingMatrix") -> None:
        if other._spec != self._spec:
            raise SpecMismatch(f"环规格不一致: {self._spec} vs {other._spec}")

    def __add__(self, other: "RingMatrix") -> "RingMatrix":
        self._check(other)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("矩阵维数不一致")
        return RingMatrix(self._spec, [
            [a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self._rows, other._rows)
        ])

    def __neg__(self) -> "RingMatrix":
        return RingMatrix(self._spec, [[-a for a in row] for row in self._rows])

    def __sub__(self, other: "RingMatrix") -> "RingMatrix":
        return self + (-other)

    def __mul__(self, other: Union["RingMatrix", Scalar]) -> "RingMatrix":
        if not isinstance(other, RingMatrix):
            return RingMatrix(self._spec, [[a * other for a in row] for row in self._rows])
        self._check(other)
        if self.cols != other.rows:
            raise ValueError(f"维数不匹配: {self.rows}×{self.cols} · {other.rows}×{other.cols}")
        zero = RingElement.zero(self._spec)
        product = []
        for row in self._rows:
            line = []
            for j in range(other.cols):
                total = zero
                for k, a in enumerate(row):
                    if a:
                        b = other._rows[k][j]
                        if b:
                            total = total + a * b
                line.append(total)
            product.append(line)
        return RingMatrix(self._spec, product)

    def __rmul__(self, other: Scalar) -> "RingMatrix":
        return RingMatrix(self._spec, [[other * a for a in row] for row in self._rows])

    def power(self, k: int) -> "RingMatrix":
        result = RingMatrix.identity(self._spec, self.rows)
        for _ in range(k):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, RingMatrix):
            return NotImplemented
        return self._spec == other._spec and self._rows == other._rows

    def __hash__(self) -> int:
        return hash((self._spec, self._rows))

    def __str__(self) -> str:
        return "\n".join("[" + ", ".join(str(a) for a in row) + "]" for row in self._rows)

    def __repr__(self) -> str:
        return f"RingMatrix({self._spec}, {self.rows}×{self.cols})"


# === ℤ 上的整数矩阵 ===

def _sympy_matrix(values: Sequence[Sequence[int]]) -> sympy.Matrix:
    n = len(values)
    return sympy.Matrix(n, n, [int(v) for row in values for v in row])


def integer_det(values: Sequence[Sequence[int]]) -> int:
    """Bareiss 无分数消元求整数行列式"""
    if not values:
        return 1
    return int(_sympy_matrix(values).det(method="bareiss"))


def integer_inverse(values: Sequence[Sequence[int]]) -> List[List[int]]:
    """
    ℤ 上的逆矩阵

    Raises:
        NotUnit: 行列式不是 ±1
    """
    n = len(values)
    if not n:
        return []
    matrix = _sympy_matrix(values)
    det = int(matrix.det(method="bareiss"))
    if det not in (1, -1):
        raise NotUnit(f"次数0矩阵行列式为 {det}，不是 ℤ 的单位")

    inverse = matrix.inv()
    if not all(entry.is_Integer for entry in inverse):
        raise NotUnit("次数0矩阵的逆含非整数元素")
    return [[int(inverse[i, j]) for j in range(n)] for i in range(n)]


def default_degree_bound(matrix: RingMatrix) -> int:
    """默认次数界 2·n·(最大元素次数) + 4"""
    return 2 * matrix.rows * max(matrix.max_degree(), 0) + DEFAULT_BOUND_SLACK


def mat_inverse_graded(matrix: RingMatrix, degree_bound: Optional[int] = None) -> RingMatrix:
    """
    分次环上的矩阵求逆

    M⁻¹ = (Σ_k E^k)·M₀⁻¹，其中 E = I − M₀⁻¹M 的常数项为零；
    只有当某个 E^k = 0 且 k ≤ degree_bound 时成功。

    Args:
        matrix: 方阵 M
        degree_bound: Neumann 级数的次数界，None 时取默认值

    Returns:
        精确逆矩阵

    Raises:
        NotSquare: M 不是方阵
        NotUnit: M₀ 在 ℤ 上不可逆
        BoundExceeded: Neumann 级数未在界内终止（可逆性未判定）
    """
    if not matrix.is_square:
        raise NotSquare(f"求逆需要方阵，得到 {matrix.rows}×{matrix.cols}")
    spec = matrix.spec
    n = matrix.rows
    if degree_bound is None:
        degree_bound = default_degree_bound(matrix)

    inverse0 = RingMatrix.from_ints(spec, integer_inverse(matrix.epsilon_matrix()))
    identity = RingMatrix.identity(spec, n)
    error = identity - inverse0 * matrix

    total = identity
    power = identity
    for k in range(1, degree_bound + 1):
        power = power * error
        if power.is_zero():
            logger.debug("neumann_terminated", size=n, degree=k, spec=str(spec))
            return total * inverse0
        total = total + power
    raise BoundExceeded(f"Neumann 级数在次数界 {degree_bound} 内未终止")
