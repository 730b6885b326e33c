"""
表达式解析模块

环规格、环元素、有理表达式与群环元素的文本语法，以及有理表达式的打印。
有理表达式语法（优先级爬升）:

    expr   := term (('+' | '-') term)*
    term   := ['-'] factor ('*' factor)*
    factor := primary ('^' '-' '1')*
    primary:= 整数 | 系数符号 | 不定元 x<数字> | '(' expr ')'

一元负号只能出现在项首；'^-1' 比 '*' 结合得更紧；空白无意义。
"""

import re
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .core.errors import ExprSyntaxError, UnknownSymbol
from .graded_ring import ArithKind, RingElement, RingSpec
from .machine import (
    Add, Atom, IntScalar, Inv, Mul, RationalExpr, Sub, combine_expr, make_leaf,
)
from .magnus import GroupRingElement, group_ring_arith
from .ncseries import Polynomial

_TOKEN = re.compile(r"(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*()^])")
_INDETERMINATE = re.compile(r"^x(\d+)$")
_GENERATOR = re.compile(r"^z(\d+)$")


@dataclass(frozen=True)
class Token:
    kind: str      # int / name / op / end
    text: str
    position: int


def tokenize(src: str) -> List[Token]:
    """
    词法分析

    Raises:
        ExprSyntaxError: 出现无法识别的字符
    """
    tokens: List[Token] = []
    pos = 0
    while pos < len(src):
        if src[pos].isspace():
            pos += 1
            continue
        match = _TOKEN.match(src, pos)
        if match is None:
            raise ExprSyntaxError(f"无法识别的字符 {src[pos]!r}", pos)
        tokens.append(Token(match.lastgroup, match.group(), pos))
        pos = match.end()
    tokens.append(Token("end", "", len(src)))
    return tokens


class _TokenStream:
    """带一个前瞻的记号流"""

    def __init__(self, src: str):
        self.tokens = tokenize(src)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        token = self.current
        return token.kind == kind and (text is None or token.text == text)

    def advance(self) -> Token:
        token = self.current
        if token.kind != "end":
            self.index += 1
        return token

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        if not self.at(kind, text):
            wanted = text or kind
            found = self.current.text or "输入结束"
            raise ExprSyntaxError(f"期望 {wanted!r}，得到 {found!r}", self.current.position)
        return self.advance()

    def expect_end(self) -> None:
        if not self.at("end"):
            raise ExprSyntaxError(f"多余的记号 {self.current.text!r}", self.current.position)


# === 环规格 ===

def _split_word(text: str, symbols: Tuple[str, ...]) -> Tuple[str, ...]:
    """按最长匹配把 "fsg" 切成 ("f", "s", "g")"""
    if " " in text.strip():
        return tuple(text.split())
    ordered = sorted(symbols, key=len, reverse=True)
    word: List[str] = []
    pos = 0
    while pos < len(text):
        symbol = next((s for s in ordered if text.startswith(s, pos)), None)
        if symbol is None:
            raise ExprSyntaxError(f"无法把 {text!r} 切分为字母表中的符号", pos)
        word.append(symbol)
        pos += len(symbol)
    return tuple(word)


def parse_ring_spec(text: str) -> RingSpec:
    """
    解析环规格

    支持 "Z"、"free:f,s,g"、"S:m"、"S:inf"、"quot:f,s,g/fg,fsg"。

    Raises:
        ExprSyntaxError: 格式错误
    """
    text = text.strip()
    try:
        if text in ("Z", "ZZ"):
            return RingSpec.integers()
        kind, _, body = text.partition(":")
        if kind == "free" and body:
            return RingSpec.free(tuple(s.strip() for s in body.split(",") if s.strip()))
        if kind == "S" and body:
            if body in ("inf", "∞"):
                return RingSpec.stage(None)
            if body.isdigit():
                return RingSpec.stage(int(body))
        if kind == "quot" and "/" in body:
            symbols_text, _, words_text = body.partition("/")
            symbols = tuple(s.strip() for s in symbols_text.split(",") if s.strip())
            words = [_split_word(w.strip(), symbols) for w in words_text.split(",") if w.strip()]
            return RingSpec.quotient(symbols, words)
    except (ValueError, UnknownSymbol) as exc:
        raise ExprSyntaxError(f"非法的环规格 {text!r}: {exc}") from exc
    raise ExprSyntaxError(f"无法识别的环规格 {text!r}（支持 Z, free:…, S:m, S:inf, quot:…/…）")


# === 环元素 ===

def parse_element(text: str, spec: RingSpec) -> RingElement:
    """
    解析环元素，如 "1 - g f + 3 f s s g"（也接受 '*' 分隔）

    Raises:
        ExprSyntaxError: 语法错误
        UnknownSymbol: 符号不在字母表中
    """
    stream = _TokenStream(text)
    total = RingElement.zero(spec)
    sign = 1
    if stream.at("op", "-"):
        stream.advance()
        sign = -1
    while True:
        coeff = 1
        word: List[str] = []
        seen = False
        while stream.at("int") or stream.at("name") or (seen and stream.at("op", "*")):
            token = stream.advance()
            if token.kind == "op":
                continue
            seen = True
            if token.kind == "int":
                coeff *= int(token.text)
            else:
                spec.check_word((token.text,))
                word.append(token.text)
        if not seen:
            found = stream.current.text or "输入结束"
            raise ExprSyntaxError(f"期望单项式，得到 {found!r}", stream.current.position)
        total = total + RingElement.word(spec, word, sign * coeff)
        if stream.at("op", "+"):
            sign = 1
        elif stream.at("op", "-"):
            sign = -1
        else:
            break
        stream.advance()
    stream.expect_end()
    return total


# === 有理表达式 ===

class _ExprParser:
    def __init__(self, src: str, spec: RingSpec, mu: int):
        self.stream = _TokenStream(src)
        self.spec = spec
        self.mu = mu

    def parse(self) -> RationalExpr:
        expr = self.expr()
        self.stream.expect_end()
        return expr

    def expr(self) -> RationalExpr:
        node = self.term()
        while self.stream.at("op", "+") or self.stream.at("op", "-"):
            op = self.stream.advance().text
            kind = ArithKind.ADD if op == "+" else ArithKind.SUB
            node = combine_expr(kind, node, self.term())
        return node

    def term(self) -> RationalExpr:
        negate = False
        if self.stream.at("op", "-"):
            self.stream.advance()
            negate = True
        node = self.factor()
        if negate:
            node = _negate(node, self.spec, self.mu)
        while self.stream.at("op", "*"):
            self.stream.advance()
            node = combine_expr(ArithKind.MUL, node, self.factor())
        return node

    def factor(self) -> RationalExpr:
        node = self.primary()
        while self.stream.at("op", "^"):
            self.stream.advance()
            self.stream.expect("op", "-")
            exponent = self.stream.expect("int")
            if exponent.text != "1":
                raise ExprSyntaxError("只支持指数 ^-1", exponent.position)
            node = Inv(node)
        return node

    def primary(self) -> RationalExpr:
        token = self.stream.current
        if token.kind == "int":
            self.stream.advance()
            return IntScalar(int(token.text), self.spec, self.mu)
        if token.kind == "name":
            self.stream.advance()
            return Atom(self.symbol_polynomial(token))
        if token.kind == "op" and token.text == "(":
            self.stream.advance()
            node = self.expr()
            self.stream.expect("op", ")")
            return node
        found = token.text or "输入结束"
        raise ExprSyntaxError(f"期望因子，得到 {found!r}", token.position)

    def symbol_polynomial(self, token: Token) -> Polynomial:
        match = _INDETERMINATE.match(token.text)
        if match:
            index = int(match.group(1))
            if not 1 <= index <= self.mu:
                raise UnknownSymbol(f"不定元 {token.text} 超出 mu = {self.mu}")
            return Polynomial.variable(self.spec, self.mu, index)
        if token.text not in self.spec.symbol_index:
            raise UnknownSymbol(f"符号 {token.text!r} 不在字母表 {list(self.spec.alphabet)} 中")
        return Polynomial.constant(self.spec, self.mu, RingElement.symbol(self.spec, token.text))


def _negate(node: RationalExpr, spec: RingSpec, mu: int) -> RationalExpr:
    if isinstance(node, IntScalar):
        return IntScalar(-node.value, spec, mu)
    if isinstance(node, Atom):
        return make_leaf(-node.poly)
    return combine_expr(ArithKind.MUL, IntScalar(-1, spec, mu), node)


def parse_expr(src: str, spec: RingSpec, mu: int) -> RationalExpr:
    """
    解析有理表达式

    只含叶子的子表达式折叠为一个多项式叶子（整数常数为 IntScalar）。

    Raises:
        ExprSyntaxError: 语法错误（带位置）
        UnknownSymbol: 未声明的系数符号或超出 mu 的不定元
    """
    return _ExprParser(src, spec, mu).parse()


def print_expr(expr: RationalExpr) -> str:
    """完全加括号地打印，parse_expr(print_expr(e)) == canonicalize(e)"""
    if isinstance(expr, IntScalar):
        return str(expr.value) if expr.value >= 0 else f"({expr.value})"
    if isinstance(expr, Atom):
        return f"({expr.poly.to_expr_text()})"
    if isinstance(expr, Inv):
        return f"{print_expr(expr.child)}^-1"
    op = {Add: "+", Sub: "-", Mul: "*"}[type(expr)]
    return f"({print_expr(expr.left)} {op} {print_expr(expr.right)})"


# === 群环元素 ===

class _GroupParser:
    """
    群环语法：字母 z1、z1^-1、z1^2；同一单词内并列即群乘法；
    环层面使用 + - *，系数为整数或系数符号。
    """

    def __init__(self, src: str, spec: RingSpec, mu: int):
        self.stream = _TokenStream(src)
        self.spec = spec
        self.mu = mu

    def parse(self) -> GroupRingElement:
        value = self.expr()
        self.stream.expect_end()
        return value

    def expr(self) -> GroupRingElement:
        value = self.term()
        while self.stream.at("op", "+") or self.stream.at("op", "-"):
            op = self.stream.advance().text
            right = self.term()
            kind = ArithKind.ADD if op == "+" else ArithKind.SUB
            value = group_ring_arith(value, right, kind)
        return value

    def _starts_factor(self) -> bool:
        return self.stream.at("int") or self.stream.at("name") or self.stream.at("op", "(")

    def term(self) -> GroupRingElement:
        negate = False
        if self.stream.at("op", "-"):
            self.stream.advance()
            negate = True
        value = self.factor()
        while True:
            if self.stream.at("op", "*"):
                self.stream.advance()
            elif not self._starts_factor():
                break
            value = group_ring_arith(value, self.factor(), ArithKind.MUL)
        return group_ring_arith(value, None, ArithKind.NEG) if negate else value

    def factor(self) -> GroupRingElement:
        token = self.stream.current
        if token.kind == "int":
            self.stream.advance()
            return GroupRingElement.constant(self.spec, self.mu, int(token.text))
        if token.kind == "name":
            self.stream.advance()
            match = _GENERATOR.match(token.text)
            if match:
                index = int(match.group(1))
                if not 1 <= index <= self.mu:
                    raise UnknownSymbol(f"群生成元 {token.text} 超出 mu = {self.mu}")
                return GroupRingElement.generator(self.spec, self.mu, index, self.exponent())
            if token.text not in self.spec.symbol_index:
                raise UnknownSymbol(f"符号 {token.text!r} 不在字母表 {list(self.spec.alphabet)} 中")
            return GroupRingElement.constant(self.spec, self.mu, RingElement.symbol(self.spec, token.text))
        if token.kind == "op" and token.text == "(":
            self.stream.advance()
            value = self.expr()
            self.stream.expect("op", ")")
            return value
        found = token.text or "输入结束"
        raise ExprSyntaxError(f"期望因子，得到 {found!r}", token.position)

    def exponent(self) -> int:
        if not self.stream.at("op", "^"):
            return 1
        self.stream.advance()
        sign = 1
        if self.stream.at("op", "-"):
            self.stream.advance()
            sign = -1
        token = self.stream.expect("int")
        power = sign * int(token.text)
        if power == 0:
            raise ExprSyntaxError("指数不能为 0", token.position)
        return power


def parse_group_ring(src: str, spec: RingSpec, mu: int) -> GroupRingElement:
    """
    解析群环元素，如 "z1 z2 z1^-1 z2^-1 - 1"

    Raises:
        ExprSyntaxError: 语法错误
        UnknownSymbol: 未声明的符号或超出 mu 的生成元
    """
    return _GroupParser(src, spec, mu).parse()
