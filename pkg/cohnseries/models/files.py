"""
结构化文件格式

所有输入/输出文件都是 JSON；不定元单词写成 "x1 x2"（空串为空单词），
环元素写成 "1 - g f + 3 f s s g" 这样的元素字符串。
"""
from pathlib import Path
from typing import Dict, List, Type, TypeVar

from pydantic import AliasChoices, BaseModel, Field, ValidationError, field_validator

from ..core.errors import FileFormatError
from ..graded_ring import RingMatrix
from ..machine import LinearMachine
from ..magnus import GroupRingElement
from ..ncseries import SeriesMatrix, TruncatedSeries, format_xword, parse_xword
from ..parser import parse_element, parse_group_ring, parse_ring_spec

ModelT = TypeVar("ModelT", bound=BaseModel)


def series_to_table(series: TruncatedSeries) -> Dict[str, str]:
    return {format_xword(word): str(coeff) for word, coeff in series.sorted_terms()}


def table_to_series(table: Dict[str, str], ring: str, mu: int, order: int) -> TruncatedSeries:
    spec = parse_ring_spec(ring)
    try:
        coeffs = {parse_xword(word, mu): parse_element(text, spec) for word, text in table.items()}
        return TruncatedSeries(spec, mu, order, coeffs)
    except ValueError as exc:
        raise FileFormatError(str(exc)) from exc


def _pairs_to_table(entry):
    if isinstance(entry, list) and all(isinstance(pair, list) and len(pair) == 2 for pair in entry):
        return {str(word): str(element) for word, element in entry}
    return entry


class SeriesFile(BaseModel):
    """截断级数文件"""
    ring: str = Field(..., description="系数环规格")
    mu: int = Field(default=1, ge=1, description="不定元个数")
    order: int = Field(..., ge=0, description="截断阶数 N")
    coeffs: Dict[str, str] = Field(default_factory=dict, description="单词 → 系数")

    @classmethod
    def from_series(cls, series: TruncatedSeries) -> "SeriesFile":
        return cls(ring=str(series.spec), mu=series.mu, order=series.order, coeffs=series_to_table(series))

    def to_series(self) -> TruncatedSeries:
        return table_to_series(self.coeffs, self.ring, self.mu, self.order)


class RingMatrixFile(BaseModel):
    """系数环上的矩阵文件（χ 的输入）"""
    ring: str = Field(..., description="系数环规格")
    entries: List[List[str]] = Field(..., min_length=1, description="按行给出的元素字符串")

    @classmethod
    def from_matrix(cls, matrix: RingMatrix) -> "RingMatrixFile":
        return cls(ring=str(matrix.spec), entries=[[str(a) for a in row] for row in matrix.to_lists()])

    def to_matrix(self) -> RingMatrix:
        spec = parse_ring_spec(self.ring)
        try:
            return RingMatrix(spec, [[parse_element(text, spec) for text in row] for row in self.entries])
        except ValueError as exc:
            raise FileFormatError(str(exc)) from exc


class SeriesMatrixFile(BaseModel):
    """
    级数矩阵文件（tmap / reduce / witt 的输入）

    键 ring/order 也可写成 spec/N；每个元素既可以是 单词 → 系数 表，
    也可以是 [[单词, 元素], ...] 对列表。写出时统一用表的形式，与 SeriesFile 的 coeffs 一致。
    """
    ring: str = Field(..., validation_alias=AliasChoices("ring", "spec"), description="系数环规格")
    mu: int = Field(default=1, ge=1, description="不定元个数")
    order: int = Field(..., ge=0, validation_alias=AliasChoices("order", "N"), description="截断阶数 N")
    entries: List[List[Dict[str, str]]] = Field(..., min_length=1, description="每个元素的 单词 → 系数 表")

    @field_validator("entries", mode="before")
    @classmethod
    def accept_pair_lists(cls, value):
        if not isinstance(value, list):
            return value
        return [[_pairs_to_table(entry) for entry in row] if isinstance(row, list) else row for row in value]

    @classmethod
    def from_matrix(cls, matrix: SeriesMatrix) -> "SeriesMatrixFile":
        return cls(ring=str(matrix.spec), mu=matrix.mu, order=matrix.order,
                   entries=[[series_to_table(entry) for entry in row] for row in matrix.to_lists()])

    def to_matrix(self) -> SeriesMatrix:
        try:
            return SeriesMatrix([[table_to_series(table, self.ring, self.mu, self.order) for table in row]
                                 for row in self.entries])
        except ValueError as exc:
            raise FileFormatError(str(exc)) from exc


class MachineFile(BaseModel):
    """线性机器文件 (f, s₁…s_μ, g)"""
    ring: str = Field(..., description="系数环规格")
    mu: int = Field(..., ge=1, description="不定元个数")
    f: List[str] = Field(..., min_length=1, description="行向量 f")
    s: List[List[List[str]]] = Field(..., min_length=1, description="方阵 s₁…s_μ")
    g: List[str] = Field(..., min_length=1, description="列向量 g")

    @classmethod
    def from_machine(cls, machine: LinearMachine) -> "MachineFile":
        return cls(
            ring=str(machine.spec),
            mu=machine.mu,
            f=[str(machine.f[0, j]) for j in range(machine.dim)],
            s=[[[str(a) for a in row] for row in matrix.to_lists()] for matrix in machine.s],
            g=[str(machine.g[i, 0]) for i in range(machine.dim)],
        )

    def to_machine(self) -> LinearMachine:
        spec = parse_ring_spec(self.ring)
        if len(self.s) != self.mu:
            raise FileFormatError(f"s 的个数 {len(self.s)} 与 mu = {self.mu} 不一致")
        try:
            f = RingMatrix(spec, [[parse_element(text, spec) for text in self.f]])
            g = RingMatrix(spec, [[parse_element(text, spec)] for text in self.g])
            s = tuple(RingMatrix(spec, [[parse_element(text, spec) for text in row] for row in matrix])
                      for matrix in self.s)
            return LinearMachine(f, s, g)
        except ValueError as exc:
            raise FileFormatError(str(exc)) from exc


class GroupMatrixFile(BaseModel):
    """群环矩阵文件（Ψ 判定的输入）"""
    ring: str = Field(default="Z", description="系数环规格")
    mu: int = Field(..., ge=1, description="自由群的秩")
    entries: List[List[str]] = Field(..., min_length=1, description="群环元素字符串")

    def to_matrix(self) -> List[List[GroupRingElement]]:
        spec = parse_ring_spec(self.ring)
        return [[parse_group_ring(text, spec, self.mu) for text in row] for row in self.entries]


def load_model(path: Path, model: Type[ModelT]) -> ModelT:
    """
    读取并校验 JSON 文件

    Raises:
        FileFormatError: 文件不存在、不是合法 JSON 或不符合模式
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileFormatError(f"无法读取 {path}: {exc}") from exc
    try:
        return model.model_validate_json(text)
    except ValidationError as exc:
        raise FileFormatError(f"{path} 不符合 {model.__name__} 格式: {exc.error_count()} 处错误") from exc
