"""Scalar field expressions: parsing, printing and jet evaluation.

Expressions are immutable trees over the chart variables ``u`` and ``v`` (or
the curve parameter ``t``).  Evaluation goes through :mod:`curvatura.jets`, so
values and partial derivatives come out together and without truncation
error.  Trees built programmatically may also contain :class:`Diff` nodes
(partial derivatives of a sub-tree), which is how connection and curvature
fields are assembled from the metric coefficients.

Grammar, loosest binding first::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := primary ("^" exponent)*          # left-associative
    exponent:= "-" exponent | primary
    primary := NUMBER | NAME | NAME "(" expr ("," expr)* ")" | "(" expr ")"
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .jets import Jet, JetDomainError, atan2

__all__ = [
    "ArityError",
    "BinOp",
    "Call",
    "Const",
    "Diff",
    "Expr",
    "ExprDomainError",
    "ExprError",
    "ExprSyntaxError",
    "FUNCTIONS",
    "Neg",
    "Num",
    "UnknownIdentifierError",
    "Var",
    "as_expr",
    "eval_jet2",
    "evaluate",
    "parse",
]

CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = {
    "sin": 1,
    "cos": 1,
    "tan": 1,
    "exp": 1,
    "log": 1,
    "sqrt": 1,
    "abs": 1,
    "asin": 1,
    "acos": 1,
    "atan": 1,
    "atan2": 2,
}
# the jet slot each variable name occupies
SLOTS = {"u": 0, "v": 1, "t": 0}


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.text = text


class UnknownIdentifierError(ExprError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r} at offset {offset}")
        self.name = name
        self.offset = offset


class ArityError(ExprError):
    def __init__(self, name: str, expected: int, got: int, offset: int):
        super().__init__(
            f"{name}() takes {expected} argument(s), got {got} at offset {offset}"
        )
        self.offset = offset


class ExprDomainError(ExprError, ArithmeticError):
    """Evaluation left the real domain (log of 0, division by zero, NaN...)."""

    def __init__(self, message: str, node: "Expr"):
        super().__init__(f"{message} in `{node}`")
        self.node = node


# --------------------------------------------------------------------------
# tree


class Expr:
    """Base class of expression nodes.  Supports arithmetic with numbers."""

    __slots__ = ()

    def __add__(self, other):
        if not _operand(other):
            return NotImplemented
        return add(self, as_expr(other))

    def __radd__(self, other):
        if not _operand(other):
            return NotImplemented
        return add(as_expr(other), self)

    def __sub__(self, other):
        if not _operand(other):
            return NotImplemented
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        if not _operand(other):
            return NotImplemented
        return sub(as_expr(other), self)

    def __mul__(self, other):
        if not _operand(other):
            return NotImplemented
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        if not _operand(other):
            return NotImplemented
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        if not _operand(other):
            return NotImplemented
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        if not _operand(other):
            return NotImplemented
        return div(as_expr(other), self)

    def __pow__(self, other):
        if not _operand(other):
            return NotImplemented
        return power(self, as_expr(other))

    def __neg__(self):
        return neg(self)

    def __str__(self) -> str:
        return to_text(self)

    def diff(self, var: str) -> "Expr":
        return diff(self, var)

    def __call__(self, u, v=0.0):
        """Value at a point (or arrays of points) in the u, v chart."""
        return value(self, u, v)

    @property
    def variables(self) -> frozenset[str]:
        cached = self.__dict__.get("_vars")
        if cached is None:
            if isinstance(self, Var):
                cached = frozenset((self.name,))
            else:
                cached = frozenset().union(*(c.variables for c in _children(self)))
            object.__setattr__(self, "_vars", cached)
        return cached

    @property
    def is_constant(self) -> bool:
        return not self.variables


@dataclass(frozen=True, eq=True, repr=False)
class Num(Expr):
    value: float

    def __repr__(self):
        return f"Num({self.value!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Const(Expr):
    name: str

    def __repr__(self):
        return f"Const({self.name!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Var(Expr):
    name: str

    def __repr__(self):
        return f"Var({self.name!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Neg(Expr):
    arg: Expr

    def __repr__(self):
        return f"Neg({self.arg!r})"


@dataclass(frozen=True, eq=True, repr=False)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def __repr__(self):
        return f"BinOp({self.op!r}, {self.left!r}, {self.right!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Call(Expr):
    func: str
    args: tuple

    def __repr__(self):
        return f"Call({self.func!r}, {self.args!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Diff(Expr):
    """Partial derivative of ``arg`` with respect to ``var``."""

    arg: Expr
    var: str

    def __repr__(self):
        return f"Diff({self.arg!r}, {self.var!r})"


ZERO = Num(0.0)
ONE = Num(1.0)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, str):
        return parse(x)
    x = float(x)
    if not math.isfinite(x):
        raise ExprError(f"non-finite constant {x!r}")
    return Num(x)


def _operand(x) -> bool:
    return isinstance(x, (Expr, int, float, np.floating, np.integer))


def _num(x: Expr):
    return x.value if isinstance(x, Num) else None


# Builders fold numeric constants and the identities x+0, x*1, x*0 so that
# trees assembled from frames and Christoffel symbols stay small.


def add(a: Expr, b: Expr) -> Expr:
    na, nb = _num(a), _num(b)
    if na is not None and nb is not None:
        return Num(na + nb)
    if na == 0.0:
        return b
    if nb == 0.0:
        return a
    return BinOp("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    na, nb = _num(a), _num(b)
    if na is not None and nb is not None:
        return Num(na - nb)
    if nb == 0.0:
        return a
    if na == 0.0:
        return neg(b)
    return BinOp("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    na, nb = _num(a), _num(b)
    if na is not None and nb is not None:
        return Num(na * nb)
    if na == 0.0 or nb == 0.0:
        return ZERO
    if na == 1.0:
        return b
    if nb == 1.0:
        return a
    if na == -1.0:
        return neg(b)
    if nb == -1.0:
        return neg(a)
    return BinOp("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    na, nb = _num(a), _num(b)
    if nb == 0.0:
        raise ExprError("division by the constant zero")
    if na is not None and nb is not None:
        return Num(na / nb)
    if na == 0.0:
        return ZERO
    if nb == 1.0:
        return a
    return BinOp("/", a, b)


def power(a: Expr, b: Expr) -> Expr:
    nb = _num(b)
    if nb == 1.0:
        return a
    if nb == 0.0:
        return ONE
    return BinOp("^", a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def call(func: str, *args) -> Expr:
    if FUNCTIONS.get(func) != len(args):
        raise ExprError(f"bad call {func}/{len(args)}")
    return Call(func, tuple(as_expr(a) for a in args))


def sin(x):
    return call("sin", x)


def cos(x):
    return call("cos", x)


def sqrt(x):
    return call("sqrt", x)


def diff(e: Expr, var: str) -> Expr:
    if var not in SLOTS:
        raise ExprError(f"cannot differentiate with respect to {var!r}")
    if var not in e.variables:
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == var else ZERO
    return Diff(e, var)


def _children(n: Expr) -> tuple:
    if isinstance(n, BinOp):
        return (n.left, n.right)
    if isinstance(n, (Neg, Diff)):
        return (n.arg,)
    if isinstance(n, Call):
        return n.args
    return ()


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace variables by expressions.  Not defined through ``Diff`` nodes."""
    memo: dict[int, Expr] = {}

    def go(n: Expr) -> Expr:
        key = id(n)
        if key in memo:
            return memo[key]
        if isinstance(n, Var):
            out = mapping.get(n.name, n)
        elif isinstance(n, BinOp):
            out = BinOp(n.op, go(n.left), go(n.right))
        elif isinstance(n, Neg):
            out = Neg(go(n.arg))
        elif isinstance(n, Call):
            out = Call(n.func, tuple(go(a) for a in n.args))
        elif isinstance(n, Diff):
            if n.variables & set(mapping):
                raise ExprError("cannot substitute inside a derivative node")
            out = n
        else:
            out = n
        memo[key] = out
        return out

    return go(e)


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^(),])
    """,
    re.VERBOSE,
)


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            tok = m.group()
            if tok == "**":
                tok = "^"
            out.append((kind, tok, pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, variables: Iterable[str]):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables = frozenset(variables)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, op: str):
        kind, tok, pos = self.take()
        if tok != op or kind != "op":
            found = repr(tok) if kind != "end" else "end of input"
            raise ExprSyntaxError(f"expected {op!r}, found {found}", pos, self.text)

    def parse(self) -> Expr:
        e = self.expr()
        kind, tok, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {tok!r}", pos, self.text)
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            left = BinOp(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        left = self.primary()
        while self.peek()[:2] == ("op", "^"):
            self.take()
            left = BinOp("^", left, self.exponent())
        return left

    def exponent(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.exponent())
        return self.primary()

    def primary(self) -> Expr:
        kind, tok, pos = self.take()
        if kind == "num":
            return Num(float(tok))
        if kind == "name":
            if self.peek()[:2] == ("op", "("):
                if tok not in FUNCTIONS:
                    raise UnknownIdentifierError(tok, pos)
                self.take()
                args = [self.expr()]
                while self.peek()[:2] == ("op", ","):
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != FUNCTIONS[tok]:
                    raise ArityError(tok, FUNCTIONS[tok], len(args), pos)
                return Call(tok, tuple(args))
            if tok in CONSTANTS:
                return Const(tok)
            if tok in self.variables:
                return Var(tok)
            if tok in FUNCTIONS:
                raise ExprSyntaxError(f"function {tok!r} needs arguments", pos, self.text)
            raise UnknownIdentifierError(tok, pos)
        if (kind, tok) == ("op", "("):
            e = self.expr()
            self.expect(")")
            return e
        found = repr(tok) if kind != "end" else "end of input"
        raise ExprSyntaxError(f"unexpected {found}", pos, self.text)


def parse(text: str, variables: Sequence[str] = ("u", "v")) -> Expr:
    """Parse ``text`` into an expression tree over ``variables``.

    Raises ExprSyntaxError (with the byte offset), UnknownIdentifierError or
    ArityError.
    """
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0, text)
    if not text.isascii():
        bad = next(i for i, ch in enumerate(text) if not ch.isascii())
        raise ExprSyntaxError("non-ASCII character", len(text[:bad].encode()), text)
    return _Parser(text, variables).parse()


# --------------------------------------------------------------------------
# printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _prec(n: Expr) -> int:
    if isinstance(n, BinOp):
        return _PREC[n.op]
    if isinstance(n, Neg):
        return _PREC["neg"]
    if isinstance(n, Num) and (n.value < 0 or math.copysign(1, n.value) < 0):
        return _PREC["neg"]
    return 5


def to_text(n: Expr) -> str:
    """Render with the minimal parentheses that re-parse to the same tree."""
    if isinstance(n, Num):
        return repr(float(n.value))
    if isinstance(n, (Const, Var)):
        return n.name
    if isinstance(n, Call):
        return f"{n.func}({', '.join(to_text(a) for a in n.args)})"
    if isinstance(n, Diff):
        return f"d_{n.var}({to_text(n.arg)})"
    if isinstance(n, Neg):
        inner = to_text(n.arg)
        if _prec(n.arg) < _PREC["neg"]:
            inner = f"({inner})"
        return f"-{inner}"
    p = _PREC[n.op]
    left, right = to_text(n.left), to_text(n.right)
    if _prec(n.left) < p or (n.op == "^" and _prec(n.left) <= _PREC["neg"]):
        left = f"({left})"
    if _prec(n.right) <= p:
        right = f"({right})"
    return f"{left} {n.op} {right}" if p < 4 else f"{left}^{right}"


# --------------------------------------------------------------------------
# evaluation


def _point_jets(values: Mapping[str, np.ndarray], order: int) -> dict[str, Jet]:
    return {name: Jet.variable(x, SLOTS[name], order) for name, x in values.items()}


class _Evaluator:
    def __init__(self, values: Mapping[str, np.ndarray]):
        self.values = values
        self.n = next(iter(values.values())).size if values else 1
        # id(node) -> (node, jet); the node is kept alive so ids stay unique
        self.memo: dict[int, tuple[Expr, Jet]] = {}

    def jet(self, n: Expr, order: int) -> Jet:
        hit = self.memo.get(id(n))
        if hit is not None and hit[1].order >= order:
            return hit[1].truncate(order)
        out = self._compute(n, order)
        if not out.is_finite():
            raise ExprDomainError("non-finite value", n)
        self.memo[id(n)] = (n, out)
        return out

    def _compute(self, n: Expr, order: int) -> Jet:
        if isinstance(n, Num):
            return Jet.constant(n.value, order, self.n)
        if isinstance(n, Const):
            return Jet.constant(CONSTANTS[n.name], order, self.n)
        if isinstance(n, Var):
            if n.name not in self.values:
                raise ExprError(f"no value bound for variable {n.name!r}")
            return Jet.variable(self.values[n.name], SLOTS[n.name], order)
        if isinstance(n, Diff):
            return self.jet(n.arg, order + 1).diff(SLOTS[n.var])
        try:
            if isinstance(n, Neg):
                return -self.jet(n.arg, order)
            if isinstance(n, BinOp):
                return self._binop(n, order)
            if isinstance(n, Call):
                args = [self.jet(a, order) for a in n.args]
                if n.func == "atan2":
                    return atan2(args[0], args[1])
                return getattr(args[0], n.func)()
        except JetDomainError as exc:
            raise ExprDomainError(str(exc), n) from None
        raise TypeError(f"unknown node {n!r}")

    def _binop(self, n: BinOp, order: int) -> Jet:
        a = self.jet(n.left, order)
        if n.op == "^" and n.right.is_constant:
            exponent = self.jet(n.right, 0).value
            return a.power(float(exponent[0]))
        b = self.jet(n.right, order)
        if n.op == "+":
            return a + b
        if n.op == "-":
            return a - b
        if n.op == "*":
            return a * b
        if n.op == "/":
            return a / b
        return a**b


def evaluate(e: Expr, values: Mapping[str, object], order: int = 0) -> Jet:
    """Jet of ``e`` of the given order at the points in ``values``.

    ``values`` maps variable names to scalars or equally-shaped arrays; the
    returned jet is flattened over points.
    """
    arrays = {
        k: np.asarray(x, dtype=float).reshape(-1) for k, x in values.items()
    }
    sizes = {a.size for a in arrays.values()}
    if len(sizes) > 1:
        n = max(sizes)
        arrays = {k: np.broadcast_to(a, (n,)) if a.size == 1 else a for k, a in arrays.items()}
    return _Evaluator(arrays).jet(e, order)


def evaluate_many(exprs: Sequence[Expr], values: Mapping[str, object], order: int = 0) -> list[Jet]:
    """Evaluate several trees sharing one memo (common sub-trees computed once)."""
    arrays = {k: np.asarray(x, dtype=float).reshape(-1) for k, x in values.items()}
    sizes = {a.size for a in arrays.values()}
    if len(sizes) > 1:
        n = max(sizes)
        arrays = {k: np.broadcast_to(a, (n,)) if a.size == 1 else a for k, a in arrays.items()}
    ev = _Evaluator(arrays)
    return [ev.jet(e, order) for e in exprs]


def value(e: Expr, u, v=0.0):
    """Values of ``e`` on the chart; the result has the broadcast shape of u, v."""
    u_arr, v_arr = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    out = evaluate(e, {"u": u_arr, "v": v_arr}).value.reshape(u_arr.shape)
    return float(out) if out.ndim == 0 else out


def eval_jet2(f: Expr, at: tuple[float, float]):
    """Value, gradient ``(f_u, f_v)`` and Hessian ``(f_uu, f_uv, f_vv)`` at a point."""
    j = evaluate(f, {"u": at[0], "v": at[1]}, order=2)
    grad = tuple(float(x[0]) for x in j.gradient())
    hess = tuple(float(x[0]) for x in j.hessian())
    return float(j.value[0]), grad, hess
