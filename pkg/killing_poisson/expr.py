"""
Closed-form scalar expressions over chart coordinates

Grammar (EBNF)::

    expression := term { ("+" | "-") term }
    term       := unary { ("*" | "/") unary }
    unary      := ("-" | "+") unary | power
    power      := primary [ ("^" | "**") unary ]
    primary    := number | function "(" expression ")" | identifier
                | "(" expression ")"
    number     := digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
    function   := "sin" | "cos" | "exp" | "log" | "sqrt" | "abs"

Identifiers are coordinate names, or the constants ``pi`` and ``e`` when no
coordinate shadows them. Powers are right-associative and bind tighter than
unary minus, so ``-x^2`` is ``-(x^2)``.

Expressions are evaluated either to a plain value or to a second-order
``Jet2`` (value, gradient, Hessian) by jet arithmetic; nothing is
differentiated symbolically or by finite differences.
"""

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union

from .errors import (
    DimensionError,
    DomainError,
    EvaluationError,
    ExprSyntaxError,
    SpecError,
    UnknownIdentifierError,
)
from .jet import Jet2

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "abs")
CONSTANTS = {"pi": math.pi, "e": math.e}


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int
    name: str


@dataclass(frozen=True)
class Unary:
    """Negation (op ``neg``) or one of FUNCTIONS applied to ``arg``"""

    op: str
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    """One of ``add``, ``sub``, ``mul``, ``div``, ``pow``"""

    op: str
    left: "Node"
    right: "Node"


Node = Union[Const, Var, Unary, Binary]

_SYMBOLS = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}


@dataclass(frozen=True)
class ScalarExpr:
    """Parsed expression bound to the coordinate names of a chart"""

    root: Node
    coords: Tuple[str, ...]
    source: str = ""

    @property
    def dim(self) -> int:
        return len(self.coords)

    def to_source(self) -> str:
        return to_source(self.root)

    def eval_value(self, point: Sequence[float]) -> float:
        return eval_value(self, point)

    def eval_jet2(self, point: Sequence[float]) -> Jet2:
        return eval_jet2(self, point)

    def __str__(self) -> str:
        return self.source or self.to_source()


# ----------------------------------------------------------------------
# tokenizer
# ----------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[^\W\d]\w*)
  | (?P<op>\*\*|[-+*/^(),])
    """,
    re.VERBOSE | re.UNICODE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int  # byte offset into the UTF-8 source


def _tokenize(source: str) -> List[_Token]:
    tokens: List[_Token] = []
    pos = 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            raise ExprSyntaxError(source, _byte_offset(source, pos), "a token")
        kind = match.lastgroup
        if kind != "ws":
            text = match.group(kind)
            if kind == "op" and text == "**":
                text = "^"
            tokens.append(_Token(kind, text, _byte_offset(source, pos)))
        pos = match.end()
    tokens.append(_Token("eof", "", _byte_offset(source, len(source))))
    return tokens


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


# ----------------------------------------------------------------------
# recursive descent parser
# ----------------------------------------------------------------------


class _Parser:
    def __init__(self, source: str, coords: Sequence[str]):
        self.source = source
        self.coords = {name: i for i, name in enumerate(coords)}
        self.tokens = _tokenize(source)
        self.pos = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def _advance(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def _accept(self, *texts: str) -> Optional[_Token]:
        if self.current.kind == "op" and self.current.text in texts:
            return self._advance()
        return None

    def _expect(self, text: str) -> None:
        if self._accept(text) is None:
            raise ExprSyntaxError(self.source, self.current.offset, repr(text))

    def parse(self) -> Node:
        node = self.expression()
        if self.current.kind != "eof":
            raise ExprSyntaxError(self.source, self.current.offset, "an operator or end of input")
        return node

    def expression(self) -> Node:
        node = self.term()
        while True:
            token = self._accept("+", "-")
            if token is None:
                return node
            node = Binary("add" if token.text == "+" else "sub", node, self.term())

    def term(self) -> Node:
        node = self.unary()
        while True:
            token = self._accept("*", "/")
            if token is None:
                return node
            node = Binary("mul" if token.text == "*" else "div", node, self.unary())

    def unary(self) -> Node:
        if self._accept("-") is not None:
            return Unary("neg", self.unary())
        if self._accept("+") is not None:
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        if self._accept("^") is not None:
            return Binary("pow", base, self.unary())
        return base

    def primary(self) -> Node:
        token = self.current
        if token.kind == "number":
            self._advance()
            return Const(float(token.text))
        if token.kind == "ident":
            self._advance()
            if token.text in self.coords:
                return Var(self.coords[token.text], token.text)
            if token.text in FUNCTIONS:
                self._expect("(")
                arg = self.expression()
                self._expect(")")
                return Unary(token.text, arg)
            if token.text in CONSTANTS:
                return Const(CONSTANTS[token.text])
            raise UnknownIdentifierError(token.text, token.offset)
        if self._accept("(") is not None:
            node = self.expression()
            self._expect(")")
            return node
        raise ExprSyntaxError(self.source, token.offset, "a number, an identifier or '('")


def parse(source: str, coords: Sequence[str]) -> ScalarExpr:
    """Parse ``source`` into an expression over the coordinates ``coords``

    Raises:
        ExprSyntaxError: text does not follow the grammar
        UnknownIdentifierError: identifier is not a coordinate, function or constant
    """
    coords = tuple(coords)
    if len(set(coords)) != len(coords):
        raise SpecError(f"coordinate names must be distinct: {coords}")
    for name in coords:
        if not name.isidentifier():
            raise SpecError(f"coordinate name {name!r} is not an identifier")
    return ScalarExpr(_Parser(source, coords).parse(), coords, source)


def to_source(node: Node) -> str:
    """Fully parenthesised text that parses back to the same tree"""
    if isinstance(node, Const):
        text = repr(float(node.value))
        return f"({text})" if text.startswith("-") else text
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        if node.op == "neg":
            return f"(-{to_source(node.arg)})"
        return f"{node.op}({to_source(node.arg)})"
    return f"({to_source(node.left)} {_SYMBOLS[node.op]} {to_source(node.right)})"


@lru_cache(maxsize=4096)
def _static_value(node: Node) -> Optional[float]:
    """Value of a coordinate-free subtree, None if it depends on a coordinate"""
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return None
    if isinstance(node, Unary):
        arg = _static_value(node.arg)
        return None if arg is None else _apply_unary_value(node, arg, ())
    left, right = _static_value(node.left), _static_value(node.right)
    if left is None or right is None:
        return None
    return _apply_binary_value(node, left, right, ())


# ----------------------------------------------------------------------
# value evaluation
# ----------------------------------------------------------------------


def _check_point(expr: ScalarExpr, point: Sequence[float]) -> Tuple[float, ...]:
    point = tuple(float(x) for x in point)
    if len(point) != expr.dim:
        raise DimensionError(f"point has {len(point)} coordinates, chart has {expr.dim}")
    return point


def _domain(node: Node, point, reason: str) -> DomainError:
    return DomainError(to_source(node), point, reason)


def _integral(c: float) -> bool:
    return float(c).is_integer() and abs(c) < 2 ** 31


def _apply_unary_value(node: Unary, v: float, point) -> float:
    op = node.op
    if op == "neg":
        return -v
    if op == "sin":
        return math.sin(v)
    if op == "cos":
        return math.cos(v)
    if op == "exp":
        try:
            return math.exp(v)
        except OverflowError:
            raise _domain(node, point, "exp overflow") from None
    if op == "log":
        if v <= 0.0:
            raise _domain(node, point, f"log of non-positive value {v}")
        return math.log(v)
    if op == "sqrt":
        if v < 0.0:
            raise _domain(node, point, f"sqrt of negative value {v}")
        return math.sqrt(v)
    if op == "abs":
        if v == 0.0:
            raise _domain(node, point, "abs evaluated at 0")
        return abs(v)
    raise ValueError(f"unknown unary operator {op!r}")


def _apply_binary_value(node: Binary, a: float, b: float, point) -> float:
    op = node.op
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b == 0.0:
            raise _domain(node, point, "division by zero")
        return a / b
    if _integral(b):
        k = int(b)
        if k < 0 and a == 0.0:
            raise _domain(node, point, "zero raised to a negative power")
        return a ** k
    if a <= 0.0:
        raise _domain(node, point, f"non-integer power of non-positive base {a}")
    return a ** b


def _value(node: Node, point: Tuple[float, ...]) -> float:
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return point[node.index]
    if isinstance(node, Unary):
        return _apply_unary_value(node, _value(node.arg, point), point)
    left = _value(node.left, point)
    right = _value(node.right, point)
    if node.op == "pow" and left <= 0.0 and _static_value(node.right) is None:
        raise _domain(node, point, f"variable power of non-positive base {left}")
    return _apply_binary_value(node, left, right, point)


def eval_value(expr: ScalarExpr, point: Sequence[float]) -> float:
    """Value of ``expr`` at ``point`` without derivative propagation"""
    point = _check_point(expr, point)
    try:
        return float(_value(expr.root, point))
    except OverflowError as e:
        raise EvaluationError(f"overflow evaluating {expr}: {e}") from None


# ----------------------------------------------------------------------
# jet evaluation
# ----------------------------------------------------------------------


def _power_jet(node: Binary, base: Jet2, point) -> Jet2:
    c = _static_value(node.right)
    v = float(base.value)
    if _integral(c):
        k = int(c)
        if k < 0 and v == 0.0:
            raise _domain(node, point, "zero raised to a negative power")
        d1 = k * v ** (k - 1) if k != 0 else 0.0
        d2 = k * (k - 1) * v ** (k - 2) if k * (k - 1) != 0 else 0.0
        return base.chain(v ** k, d1, d2)
    if v <= 0.0:
        raise _domain(node, point, f"non-integer power of non-positive base {v}")
    return base.chain(v ** c, c * v ** (c - 1), c * (c - 1) * v ** (c - 2))


def _jet(node: Node, point: Tuple[float, ...]) -> Jet2:
    n = len(point)
    if isinstance(node, Const):
        return Jet2.constant(node.value, n)
    if isinstance(node, Var):
        return Jet2.variable(point, node.index)
    if isinstance(node, Unary):
        arg = _jet(node.arg, point)
        v = float(arg.value)
        op = node.op
        if op == "neg":
            return -arg
        if op == "sin":
            return arg.chain(math.sin(v), math.cos(v), -math.sin(v))
        if op == "cos":
            return arg.chain(math.cos(v), -math.sin(v), -math.cos(v))
        if op == "exp":
            e = _apply_unary_value(node, v, point)
            return arg.chain(e, e, e)
        if op == "log":
            _apply_unary_value(node, v, point)
            return arg.chain(math.log(v), 1.0 / v, -1.0 / v ** 2)
        if op == "sqrt":
            if v <= 0.0:
                raise _domain(node, point, f"sqrt is not differentiable at {v}")
            s = math.sqrt(v)
            return arg.chain(s, 0.5 / s, -0.25 / (s * v))
        if op == "abs":
            _apply_unary_value(node, v, point)
            return arg.chain(abs(v), math.copysign(1.0, v), 0.0)
        raise ValueError(f"unknown unary operator {op!r}")
    left = _jet(node.left, point)
    op = node.op
    if op == "pow" and _static_value(node.right) is not None:
        return _power_jet(node, left, point)
    right = _jet(node.right, point)
    if op == "add":
        return left + right
    if op == "sub":
        return left - right
    if op == "mul":
        return left * right
    if op == "div":
        if float(right.value) == 0.0:
            raise _domain(node, point, "division by zero")
        return left / right
    # variable exponent: a^b = exp(b log a)
    a = float(left.value)
    if a <= 0.0:
        raise _domain(node, point, f"variable power of non-positive base {a}")
    log_a = left.chain(math.log(a), 1.0 / a, -1.0 / a ** 2)
    exponent = right * log_a
    e = math.exp(float(exponent.value))
    return exponent.chain(e, e, e)


def eval_jet2(expr: ScalarExpr, point: Sequence[float]) -> Jet2:
    """Value, gradient and Hessian of ``expr`` at ``point``

    Raises:
        DomainError: a node is evaluated outside its domain
        DimensionError: ``point`` does not match the chart dimension
    """
    point = _check_point(expr, point)
    try:
        return _jet(expr.root, point)
    except OverflowError as e:
        raise EvaluationError(f"overflow evaluating {expr}: {e}") from None


def eval_jets(exprs: Sequence[ScalarExpr], point: Sequence[float]) -> Jet2:
    """Stack the jets of several expressions into one tensor jet"""
    return Jet2.stack([eval_jet2(e, point) for e in exprs])


def constant_expr(value: float, coords: Sequence[str]) -> ScalarExpr:
    return ScalarExpr(Const(float(value)), tuple(coords), repr(float(value)))


def variable_expr(index: int, coords: Sequence[str]) -> ScalarExpr:
    coords = tuple(coords)
    return ScalarExpr(Var(index, coords[index]), coords, coords[index])


def linear_combination(
    terms: Sequence[Tuple[float, Sequence[ScalarExpr]]], coords: Sequence[str]
) -> ScalarExpr:
    """Build sum_t c_t * prod(factors_t) as a new expression

    Zero coefficients and factors that are the constant 0 drop their term;
    constant factors are folded into the coefficient.
    """
    coords = tuple(coords)
    nodes: List[Node] = []
    for coef, factors in terms:
        coef = float(coef)
        rest: List[Node] = []
        for factor in factors:
            if isinstance(factor.root, Const):
                coef *= factor.root.value
            else:
                rest.append(factor.root)
        if coef == 0.0:
            continue
        if not rest:
            nodes.append(Const(coef))
            continue
        node = rest[0]
        for other in rest[1:]:
            node = Binary("mul", node, other)
        if coef == -1.0:
            node = Unary("neg", node)
        elif coef != 1.0:
            node = Binary("mul", Const(coef), node)
        nodes.append(node)
    if not nodes:
        return constant_expr(0.0, coords)
    root = nodes[0]
    for node in nodes[1:]:
        root = Binary("add", root, node)
    return ScalarExpr(root, coords, to_source(root))
