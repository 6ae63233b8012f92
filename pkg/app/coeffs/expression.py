"""
Coefficient expression language.

Parses closed-form expressions over {literals, variables, + - * /, integer
powers, exp, negation} into an immutable tree, differentiates symbolically
at parse time and evaluates on scalars or numpy arrays.

Grammar (whitespace insignificant):
    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' ['-'] int)?
    atom  := number | variable | 'exp' '(' expr ')' | '(' expr ')'

Unary minus binds looser than '^', so "-t^2" reads -(t^2).
"""

import logging
import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from app.errors import EvaluationError, ExpressionError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


# ─── Tree ─────────────────────────────────────────────────────────────────


class Node:
    def evaluate(self, env: Sequence[np.ndarray]) -> np.ndarray:
        raise NotImplementedError

    def derivative(self, index: int) -> "Node":
        raise NotImplementedError

    def variables(self) -> set:
        return set()


@dataclass(frozen=True)
class Const(Node):
    value: float

    def evaluate(self, env):
        return np.float64(self.value)

    def derivative(self, index):
        return ZERO

    def __str__(self):
        return repr(self.value)


@dataclass(frozen=True)
class Var(Node):
    index: int
    name: str

    def evaluate(self, env):
        return env[self.index]

    def derivative(self, index):
        return ONE if index == self.index else ZERO

    def variables(self):
        return {self.index}

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg(Node):
    arg: Node

    def evaluate(self, env):
        return -self.arg.evaluate(env)

    def derivative(self, index):
        return neg(self.arg.derivative(index))

    def variables(self):
        return self.arg.variables()

    def __str__(self):
        return f"(-{self.arg})"


@dataclass(frozen=True)
class Binary(Node):
    left: Node
    right: Node

    def variables(self):
        return self.left.variables() | self.right.variables()


class Add(Binary):
    def evaluate(self, env):
        return self.left.evaluate(env) + self.right.evaluate(env)

    def derivative(self, index):
        return add(self.left.derivative(index), self.right.derivative(index))

    def __str__(self):
        return f"({self.left} + {self.right})"


class Sub(Binary):
    def evaluate(self, env):
        return self.left.evaluate(env) - self.right.evaluate(env)

    def derivative(self, index):
        return sub(self.left.derivative(index), self.right.derivative(index))

    def __str__(self):
        return f"({self.left} - {self.right})"


class Mul(Binary):
    def evaluate(self, env):
        return self.left.evaluate(env) * self.right.evaluate(env)

    def derivative(self, index):
        return add(
            mul(self.left.derivative(index), self.right),
            mul(self.left, self.right.derivative(index)),
        )

    def __str__(self):
        return f"({self.left} * {self.right})"


class Div(Binary):
    def evaluate(self, env):
        return self.left.evaluate(env) / self.right.evaluate(env)

    def derivative(self, index):
        numerator = sub(
            mul(self.left.derivative(index), self.right),
            mul(self.left, self.right.derivative(index)),
        )
        return div(numerator, power(self.right, 2))

    def __str__(self):
        return f"({self.left} / {self.right})"


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: int

    def evaluate(self, env):
        base = np.asarray(self.base.evaluate(env), dtype=float)
        if self.exponent < 0:
            return 1.0 / np.power(base, -self.exponent)
        return np.power(base, self.exponent)

    def derivative(self, index):
        outer = mul(Const(float(self.exponent)), power(self.base, self.exponent - 1))
        return mul(outer, self.base.derivative(index))

    def variables(self):
        return self.base.variables()

    def __str__(self):
        return f"({self.base}^{self.exponent})"


@dataclass(frozen=True)
class Exp(Node):
    arg: Node

    def evaluate(self, env):
        return np.exp(self.arg.evaluate(env))

    def derivative(self, index):
        return mul(self, self.arg.derivative(index))

    def variables(self):
        return self.arg.variables()

    def __str__(self):
        return f"exp({self.arg})"


ZERO = Const(0.0)
ONE = Const(1.0)


# Constructors folding trivial constants so derivative trees stay small.

def _is(node: Node, value: float) -> bool:
    return isinstance(node, Const) and node.value == value


def add(a: Node, b: Node) -> Node:
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return Add(a, b)


def sub(a: Node, b: Node) -> Node:
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    return Sub(a, b)


def mul(a: Node, b: Node) -> Node:
    if _is(a, 0.0) or _is(b, 0.0):
        return ZERO
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    return Mul(a, b)


def div(a: Node, b: Node) -> Node:
    if _is(a, 0.0):
        return ZERO
    if _is(b, 1.0):
        return a
    return Div(a, b)


def neg(a: Node) -> Node:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def power(a: Node, exponent: int) -> Node:
    if exponent == 0:
        return ONE
    if exponent == 1:
        return a
    if isinstance(a, Const) and a.value != 0.0:
        return Const(a.value ** exponent)
    return Pow(a, exponent)


# ─── Parser ───────────────────────────────────────────────────────────────

_TOKEN_RE = re.compile(
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int


def _byte_offset(source: str, pos: int) -> int:
    return len(source[:pos].encode("utf-8"))


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    while True:
        while pos < len(source) and source[pos].isspace():
            pos += 1
        if pos >= len(source):
            break
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            raise ExpressionError(
                f"Unexpected character '{source[pos]}'", source, _byte_offset(source, pos)
            )
        tokens.append(_Token(match.lastgroup, match.group(), _byte_offset(source, pos)))
        pos = match.end()
    tokens.append(_Token("end", "", _byte_offset(source, len(source))))
    return tokens


class _Parser:
    def __init__(self, source: str, variables: Sequence[str]):
        self._source = source
        self._variables = {name: i for i, name in enumerate(variables)}
        self._tokens = _tokenize(source)
        self._pos = 0

    def parse(self) -> Node:
        node = self._expr()
        token = self._peek()
        if token.kind != "end":
            self._fail(f"Unexpected '{token.text}'", token)
        return node

    def _peek(self) -> _Token:
        return self._tokens[self._pos]

    def _next(self) -> _Token:
        token = self._tokens[self._pos]
        self._pos += 1
        return token

    def _accept(self, text: str) -> bool:
        token = self._peek()
        if token.kind == "op" and token.text == text:
            self._pos += 1
            return True
        return False

    def _expect(self, text: str):
        token = self._peek()
        if not self._accept(text):
            found = token.text or "end of input"
            self._fail(f"Expected '{text}' but found '{found}'", token)

    def _fail(self, message: str, token: _Token):
        raise ExpressionError(message, self._source, token.offset)

    def _expr(self) -> Node:
        node = self._term()
        while True:
            if self._accept("+"):
                node = Add(node, self._term())
            elif self._accept("-"):
                node = Sub(node, self._term())
            else:
                return node

    def _term(self) -> Node:
        node = self._unary()
        while True:
            if self._accept("*"):
                node = Mul(node, self._unary())
            elif self._accept("/"):
                node = Div(node, self._unary())
            else:
                return node

    def _unary(self) -> Node:
        if self._accept("-"):
            return Neg(self._unary())
        return self._power()

    def _power(self) -> Node:
        base = self._atom()
        if not self._accept("^"):
            return base
        sign = -1 if self._accept("-") else 1
        token = self._next()
        if token.kind != "number":
            self._fail("Exponent must be an integer literal", token)
        if not re.fullmatch(r"\d+", token.text):
            self._fail(f"Non-integer exponent '{token.text}'", token)
        return Pow(base, sign * int(token.text))

    def _atom(self) -> Node:
        token = self._next()
        if token.kind == "number":
            return Const(float(token.text))
        if token.kind == "ident":
            if token.text == "exp":
                self._expect("(")
                arg = self._expr()
                self._expect(")")
                return Exp(arg)
            if token.text in self._variables:
                return Var(self._variables[token.text], token.text)
            self._fail(f"Unknown identifier '{token.text}'", token)
        if token.kind == "op" and token.text == "(":
            node = self._expr()
            self._expect(")")
            return node
        found = token.text or "end of input"
        self._fail(f"Unexpected '{found}'", token)


def parse_expression(source: str, variables: Sequence[str] = ("t",)) -> Node:
    return _Parser(source, variables).parse()


def evaluate_node(node: Node, env: Sequence[ArrayLike]) -> np.ndarray:
    """Evaluate with floating-point faults turned into EvaluationError."""
    arrays = [np.asarray(v, dtype=float) for v in env]
    with np.errstate(divide="raise", over="raise", invalid="raise", under="ignore"):
        try:
            return node.evaluate(arrays)
        except (FloatingPointError, ZeroDivisionError) as e:
            raise EvaluationError(f"Cannot evaluate {node}: {e}") from e


# ─── Coefficients ─────────────────────────────────────────────────────────


@dataclass(frozen=True)
class CoeffExpr:
    source: str
    ast: Node
    derivative_ast: Node

    @property
    def is_constant(self) -> bool:
        return not self.ast.variables()

    def eval(self, t: ArrayLike) -> ArrayLike:
        return _as_output(evaluate_node(self.ast, [t]), t)

    def prime(self, t: ArrayLike) -> ArrayLike:
        return _as_output(evaluate_node(self.derivative_ast, [t]), t)

    def __str__(self):
        return self.source


def _as_output(value, t):
    value = np.asarray(value, dtype=float)
    if np.ndim(t) == 0:
        return float(value)
    return np.broadcast_to(value, np.shape(t)).copy()


def parse_coefficient(source: str) -> CoeffExpr:
    ast = parse_expression(source, ("t",))
    derivative_ast = ast.derivative(0)
    logger.debug("Parsed coefficient %r, derivative %s", source, derivative_ast)
    return CoeffExpr(source=source, ast=ast, derivative_ast=derivative_ast)


def constant_coefficient(value: float) -> CoeffExpr:
    return CoeffExpr(source=repr(float(value)), ast=Const(float(value)), derivative_ast=ZERO)


def evaluate(expr: CoeffExpr, t: ArrayLike) -> ArrayLike:
    return expr.eval(t)
