"""
错误类型定义

所有库异常都继承 CohnSeriesError，CLI 根据 code 决定退出码。
"""

from typing import Optional


class CohnSeriesError(Exception):
    """库异常基类"""

    code: str = "CohnSeriesError"

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.message = message

    def __str__(self) -> str:
        return f"{self.code}: {self.message}" if self.message else self.code


class UnknownSymbol(CohnSeriesError):
    """单词中出现字母表之外的符号"""

    code = "UnknownSymbol"


class SpecMismatch(CohnSeriesError):
    """两个运算对象的环规格（或不定元个数）不一致"""

    code = "SpecMismatch"


class NotUnit(CohnSeriesError):
    """次数0部分在 ℤ 上不可逆"""

    code = "NotUnit"


class NotSigmaInvertible(NotUnit):
    """Inv 节点的子表达式增广不可逆，即不属于 Σ"""

    code = "NotSigmaInvertible"


class BoundExceeded(CohnSeriesError):
    """Neumann 级数在给定次数界内没有终止（可逆性未判定）"""

    code = "BoundExceeded"


class MultiVariable(CohnSeriesError):
    """只支持单变量 (mu = 1) 的运算收到了多变量级数"""

    code = "MultiVariable"


class NotSquare(CohnSeriesError):
    code = "NotSquare"


class NotCommutative(CohnSeriesError):
    """行列式只在交换系数环（空字母表，即 ℤ）上定义"""

    code = "NotCommutative"


class InvalidOrder(CohnSeriesError):
    code = "InvalidOrder"


class ExprSyntaxError(CohnSeriesError):
    """表达式语法错误，附带出错位置"""

    code = "SyntaxError"

    def __init__(self, message: str = "", position: Optional[int] = None):
        if position is not None:
            message = f"{message} (位置 {position})"
        super().__init__(message)
        self.position = position


class FileFormatError(CohnSeriesError):
    """输入文件不符合结构化文件格式"""

    code = "FileFormatError"
