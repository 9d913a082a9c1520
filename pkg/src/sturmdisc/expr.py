"""Potential expressions: a tiny arithmetic language over the variable ``x``.

Potentials are entered as strings like ``"cos(x) + 0.5i*sin(2*x)"`` and kept
as ASTs so they can be differentiated symbolically (the higher-order
expansion tables need exact derivatives of polynomial potentials) and
compiled to fast numpy callables for the ODE right-hand sides.

Grammar (no implicit multiplication, ``^`` only with unsigned integer
exponents)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' unsigned-int)?
    base   := number | number 'i' | 'x' | func '(' expr ')'
            | '(' expr ')' | '-' base
    func   := 'sin' | 'cos' | 'exp' | 'sinh' | 'cosh'

A :class:`PotentialExpr` is a piecewise list of such ASTs tiling an interval
``[0, L]``; a plain expression is the single-piece special case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

FUNCTIONS = ("sin", "cos", "exp", "sinh", "cosh")

_NUMPY_ENV = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "__builtins__": {},
}


class ExprError(ValueError):
    """Parse or evaluation error carrying the offending source offset."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)


# ---------------------------------------------------------------------------
# AST nodes
# ---------------------------------------------------------------------------


class Node:
    __slots__ = ()


@dataclass(frozen=True)
class Const(Node):
    value: complex


@dataclass(frozen=True)
class Var(Node):
    pass


@dataclass(frozen=True)
class BinOp(Node):
    op: str  # one of + - * /
    left: Node
    right: Node


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: int  # unsigned per grammar


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node


@dataclass(frozen=True)
class Neg(Node):
    arg: Node


X = Var()
ZERO = Const(0.0)
ONE = Const(1.0)


def _is_const(node: Node, value: complex | None = None) -> bool:
    if not isinstance(node, Const):
        return False
    return value is None or node.value == value


# Smart constructors with light constant folding, so printed derivatives do
# not drown in `0*...` noise.


def add(a: Node, b: Node) -> Node:
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return BinOp("+", a, b)


def sub(a: Node, b: Node) -> Node:
    if _is_const(b, 0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if _is_const(a, 0):
        return neg(b)
    return BinOp("-", a, b)


def mul(a: Node, b: Node) -> Node:
    if _is_const(a, 0) or _is_const(b, 0):
        return ZERO
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    return BinOp("*", a, b)


def div(a: Node, b: Node) -> Node:
    if _is_const(a, 0):
        return ZERO
    if _is_const(b, 1):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        if b.value == 0:
            raise ExprError("division by constant zero")
        return Const(a.value / b.value)
    return BinOp("/", a, b)


def neg(a: Node) -> Node:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def powi(base: Node, n: int) -> Node:
    if n < 0:
        raise ExprError("exponent must be an unsigned integer")
    if n == 0:
        return ONE
    if n == 1:
        return base
    if isinstance(base, Const):
        return Const(base.value**n)
    return Pow(base, n)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, source: str):
        self.src = source
        self.pos = 0

    def _skip_ws(self) -> None:
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        self._skip_ws()
        return self.src[self.pos] if self.pos < len(self.src) else ""

    def _expect(self, ch: str) -> None:
        if self._peek() != ch:
            raise ExprError(f"expected {ch!r}", self.pos)
        self.pos += 1

    def parse(self) -> Node:
        node = self.expr()
        self._skip_ws()
        if self.pos != len(self.src):
            raise ExprError("unexpected trailing input", self.pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self._peek() and self._peek() in "+-":
            op = self.src[self.pos]
            self.pos += 1
            rhs = self.term()
            node = BinOp(op, node, rhs)
        return node

    def term(self) -> Node:
        node = self.factor()
        while self._peek() and self._peek() in "*/":
            op = self.src[self.pos]
            self.pos += 1
            rhs = self.factor()
            node = BinOp(op, node, rhs)
        return node

    def factor(self) -> Node:
        node = self.base()
        if self._peek() == "^":
            self.pos += 1
            self._skip_ws()
            start = self.pos
            while self.pos < len(self.src) and self.src[self.pos].isdigit():
                self.pos += 1
            if self.pos == start:
                raise ExprError("exponent must be an unsigned integer", start)
            node = Pow(node, int(self.src[start : self.pos])) if not isinstance(
                node, Const
            ) else Const(node.value ** int(self.src[start : self.pos]))
        return node

    def base(self) -> Node:
        ch = self._peek()
        if ch == "":
            raise ExprError("unexpected end of input", self.pos)
        if ch == "-":
            self.pos += 1
            return Neg(self.base())
        if ch == "(":
            self.pos += 1
            node = self.expr()
            self._expect(")")
            return node
        if ch.isdigit() or ch == ".":
            return self.number()
        if ch.isalpha():
            start = self.pos
            while self.pos < len(self.src) and self.src[self.pos].isalnum():
                self.pos += 1
            name = self.src[start : self.pos]
            if name == "x":
                return X
            if name in FUNCTIONS:
                self._expect("(")
                arg = self.expr()
                self._expect(")")
                return Call(name, arg)
            raise ExprError(f"unknown identifier {name!r}", start)
        raise ExprError(f"unexpected character {ch!r}", self.pos)

    def number(self) -> Node:
        self._skip_ws()
        start = self.pos
        while self.pos < len(self.src) and self.src[self.pos].isdigit():
            self.pos += 1
        if self.pos < len(self.src) and self.src[self.pos] == ".":
            self.pos += 1
            while self.pos < len(self.src) and self.src[self.pos].isdigit():
                self.pos += 1
        if self.pos < len(self.src) and self.src[self.pos] in "eE":
            mark = self.pos
            self.pos += 1
            if self.pos < len(self.src) and self.src[self.pos] in "+-":
                self.pos += 1
            if self.pos < len(self.src) and self.src[self.pos].isdigit():
                while self.pos < len(self.src) and self.src[self.pos].isdigit():
                    self.pos += 1
            else:
                self.pos = mark  # not an exponent after all
        text = self.src[start : self.pos]
        try:
            value = float(text)
        except ValueError:
            raise ExprError(f"bad number {text!r}", start) from None
        if self.pos < len(self.src) and self.src[self.pos] == "i":
            self.pos += 1
            return Const(value * 1j)
        return Const(value)


def parse_expr(source: str) -> Node:
    """Parse a single expression string into an AST."""

    return _Parser(source).parse()


# ---------------------------------------------------------------------------
# AST operations
# ---------------------------------------------------------------------------


def differentiate(node: Node) -> Node:
    """Symbolic derivative with respect to ``x``."""

    if isinstance(node, Const):
        return ZERO
    if isinstance(node, Var):
        return ONE
    if isinstance(node, Neg):
        return neg(differentiate(node.arg))
    if isinstance(node, BinOp):
        da, db = differentiate(node.left), differentiate(node.right)
        if node.op == "+":
            return add(da, db)
        if node.op == "-":
            return sub(da, db)
        if node.op == "*":
            return add(mul(da, node.right), mul(node.left, db))
        if node.op == "/":
            num = sub(mul(da, node.right), mul(node.left, db))
            return div(num, powi(node.right, 2))
    if isinstance(node, Pow):
        inner = differentiate(node.base)
        return mul(mul(Const(node.exponent), powi(node.base, node.exponent - 1)), inner)
    if isinstance(node, Call):
        inner = differentiate(node.arg)
        outer = {
            "sin": lambda u: Call("cos", u),
            "cos": lambda u: neg(Call("sin", u)),
            "exp": lambda u: Call("exp", u),
            "sinh": lambda u: Call("cosh", u),
            "cosh": lambda u: Call("sinh", u),
        }[node.func](node.arg)
        return mul(outer, inner)
    raise TypeError(f"unknown node {node!r}")


def _fmt_const(value: complex) -> str:
    if value.imag == 0:
        real = value.real
        if real == int(real) and abs(real) < 1e16:
            return str(int(real))
        return repr(real)
    if value.real == 0:
        imag = value.imag
        if imag == int(imag) and abs(imag) < 1e16:
            return f"{int(imag)}i"
        return f"{imag!r}i"
    return f"({_fmt_const(value.real)}+{_fmt_const(value.imag * 1j)})"


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


def to_source(node: Node) -> str:
    """Render the AST back to grammar-conformant source text."""

    def render(n: Node, parent_prec: int, right_side: bool = False) -> str:
        if isinstance(n, Const):
            text = _fmt_const(n.value)
            prec = _PREC["atom"] if not text.startswith("-") else _PREC["neg"]
        elif isinstance(n, Var):
            text, prec = "x", _PREC["atom"]
        elif isinstance(n, Call):
            text, prec = f"{n.func}({render(n.arg, 0)})", _PREC["atom"]
        elif isinstance(n, Neg):
            # grammar: '-' applies to a base, so any non-atom argument
            # (including a power) must keep its parentheses
            text, prec = f"-{render(n.arg, _PREC['atom'])}", _PREC["neg"]
        elif isinstance(n, Pow):
            # '^' is non-associative: a power base must be parenthesized
            text = f"{render(n.base, _PREC['^'] + 1)}^{n.exponent}"
            prec = _PREC["^"]
        elif isinstance(n, BinOp):
            prec = _PREC[n.op]
            left = render(n.left, prec)
            right = render(n.right, prec, right_side=True)
            text = f"{left} {n.op} {right}"
        else:
            raise TypeError(f"unknown node {n!r}")
        needs_parens = prec < parent_prec or (
            right_side and prec == parent_prec
        )
        return f"({text})" if needs_parens else text

    return render(node, 0)


def _compile_src(node: Node) -> str:
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Neg):
        return f"(-{_compile_src(node.arg)})"
    if isinstance(node, BinOp):
        return f"({_compile_src(node.left)} {node.op} {_compile_src(node.right)})"
    if isinstance(node, Pow):
        return f"({_compile_src(node.base)} ** {node.exponent})"
    if isinstance(node, Call):
        return f"{node.func}({_compile_src(node.arg)})"
    raise TypeError(f"unknown node {node!r}")


def compile_node(node: Node) -> Callable:
    """Compile the AST to a numpy-aware callable of ``x``."""

    return eval(f"lambda x: ({_compile_src(node)}) + 0*x", dict(_NUMPY_ENV))


def as_polynomial(node: Node):
    """Return the AST as a ``numpy.polynomial.Polynomial`` with complex
    coefficients, or ``None`` if it involves a transcendental function or a
    non-constant divisor."""

    P = np.polynomial.Polynomial
    if isinstance(node, Const):
        return P([node.value])
    if isinstance(node, Var):
        return P([0.0, 1.0])
    if isinstance(node, Neg):
        inner = as_polynomial(node.arg)
        return None if inner is None else -inner
    if isinstance(node, Pow):
        inner = as_polynomial(node.base)
        return None if inner is None else inner**node.exponent
    if isinstance(node, BinOp):
        left = as_polynomial(node.left)
        right = as_polynomial(node.right)
        if left is None or right is None:
            return None
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            if right.degree() == 0:
                return left / right.coef[0]
            return None
    return None


# ---------------------------------------------------------------------------
# Piecewise potential
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    node: Node

    @property
    def source(self) -> str:
        return to_source(self.node)


class PotentialExpr:
    """A potential on ``[0, length]`` given piecewise by expression ASTs.

    Pieces must tile the interval in order.  Evaluation at an interior
    breakpoint takes the left piece by default; the one-sided value is
    available via ``side``.
    """

    def __init__(self, pieces: Sequence[Piece], length: float = math.pi):
        pieces = list(pieces)
        if not pieces:
            raise ExprError("potential needs at least one piece")
        if abs(pieces[0].lo) > 1e-12:
            raise ExprError("first piece must start at 0")
        if abs(pieces[-1].hi - length) > 1e-9:
            raise ExprError(f"last piece must end at {length!r}")
        for a, b in zip(pieces, pieces[1:]):
            if abs(a.hi - b.lo) > 1e-12:
                raise ExprError("pieces must tile the interval without gaps")
        for p in pieces:
            if not p.hi > p.lo:
                raise ExprError("piece endpoints must be increasing")
        self.pieces = pieces
        self.length = float(length)
        self._fns = [compile_node(p.node) for p in pieces]

    # -- constructors -----------------------------------------------------

    @classmethod
    def parse(cls, source: str, length: float = math.pi) -> "PotentialExpr":
        return cls([Piece(0.0, length, parse_expr(source))], length)

    @classmethod
    def from_spec(cls, spec, length: float = math.pi) -> "PotentialExpr":
        """Build from a string or a list of ``{"interval": [a, b], "expr": s}``."""

        if isinstance(spec, str):
            return cls.parse(spec, length)
        if isinstance(spec, PotentialExpr):
            return spec
        pieces = []
        for item in spec:
            lo, hi = item["interval"]
            pieces.append(Piece(float(lo), float(hi), parse_expr(item["expr"])))
        return cls(pieces, length)

    def to_spec(self):
        if len(self.pieces) == 1:
            return self.pieces[0].source
        return [
            {"interval": [p.lo, p.hi], "expr": p.source} for p in self.pieces
        ]

    # -- evaluation -------------------------------------------------------

    def piece_index(self, x: float, side: str = "left") -> int:
        if x < self.pieces[0].lo - 1e-9 or x > self.length + 1e-9:
            raise ExprError(f"x={x!r} outside [0, {self.length!r}]")
        for i, p in enumerate(self.pieces):
            if x < p.hi or (side == "left" and x <= p.hi):
                if x >= p.lo or i == 0:
                    return i
        return len(self.pieces) - 1

    def __call__(self, x, side: str = "left"):
        if np.isscalar(x):
            return complex(self._fns[self.piece_index(float(x), side)](x))
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for i, p in enumerate(self.pieces):
            if i == 0:
                mask = x <= p.hi
            elif i == len(self.pieces) - 1:
                mask = x > p.lo
            else:
                mask = (x > p.lo) & (x <= p.hi)
            out[mask] = self._fns[i](x[mask])
        return out

    def piece_fn(self, lo: float, hi: float) -> Callable:
        """Compiled callable valid on ``[lo, hi]`` (which must lie inside
        one piece)."""

        mid = 0.5 * (lo + hi)
        for i, p in enumerate(self.pieces):
            if p.lo - 1e-12 <= mid <= p.hi + 1e-12:
                return self._fns[i]
        raise ExprError(f"[{lo}, {hi}] spans a piece boundary")

    # -- calculus ---------------------------------------------------------

    def derivative(self, order: int = 1) -> "PotentialExpr":
        pieces = self.pieces
        for _ in range(order):
            pieces = [Piece(p.lo, p.hi, differentiate(p.node)) for p in pieces]
        return PotentialExpr(pieces, self.length)

    def breakpoints(self) -> list[float]:
        pts = [p.lo for p in self.pieces] + [self.length]
        return pts

    @property
    def is_polynomial(self) -> bool:
        return all(as_polynomial(p.node) is not None for p in self.pieces)

    def __repr__(self) -> str:
        return f"PotentialExpr({self.to_spec()!r})"
