"""Expression language for real-analytic functions of complex variables.

Every function handled by levilab enters through this module: it is parsed
from a small DSL into an immutable tree (:class:`Expr`), printed back, and
evaluated pointwise or in batches with double-precision complex arithmetic.

Grammar (see ``docs/grammar.md`` for the full EBNF)::

    expr  = term  { ("+" | "-") term } ;
    term  = unary { ("*" | "/") unary } ;
    unary = "-" unary | power ;
    power = atom [ "^" unary ] ;
    atom  = number | imag | "i" | var | call | name | "(" expr ")" ;

A ``-`` directly in front of a numeric literal folds into a negative
constant unless the literal is the base of a ``^``.  Rational literals are
written without spaces (``3/4``); ``3 / 4`` is a division node.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DomainError,
    ExprSyntaxError,
    UnknownIdentifierError,
    VariableIndexError,
)

FUNCTIONS = ("conj", "re", "im", "abs", "abs2", "log", "exp", "sqrt")
UNARY_OPS = ("neg",) + FUNCTIONS
BINARY_OPS = ("+", "-", "*", "/", "^")

# printing precedences
_P_ADD, _P_MUL, _P_UNARY, _P_POW, _P_ATOM = 1, 2, 3, 4, 5


class Expr:
    """Immutable expression node with structural equality and a cached hash."""

    __slots__ = ("_key", "_hash", "_vars")

    def _freeze(self, key):
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))
        object.__setattr__(self, "_vars", None)

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    def __eq__(self, other):
        if self is other:
            return True
        return type(other) is type(self) and self._key == other._key

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return self._hash

    @property
    def children(self) -> tuple:
        return ()

    def variables(self) -> frozenset:
        """Indices of the variables occurring in the tree."""
        if self._vars is None:
            out = set()
            for c in self.children:
                out |= c.variables()
            object.__setattr__(self, "_vars", frozenset(out))
        return self._vars

    def max_var_index(self) -> int:
        return max(self.variables(), default=0)

    def __str__(self):
        return print_expr(self)

    def __repr__(self):
        return f"Expr({print_expr(self)!r})"

    # operator sugar builds raw (unsimplified) nodes
    def __add__(self, other):
        return Binary("+", self, as_expr(other))

    def __radd__(self, other):
        return Binary("+", as_expr(other), self)

    def __sub__(self, other):
        return Binary("-", self, as_expr(other))

    def __rsub__(self, other):
        return Binary("-", as_expr(other), self)

    def __mul__(self, other):
        return Binary("*", self, as_expr(other))

    def __rmul__(self, other):
        return Binary("*", as_expr(other), self)

    def __truediv__(self, other):
        return Binary("/", self, as_expr(other))

    def __rtruediv__(self, other):
        return Binary("/", as_expr(other), self)

    def __pow__(self, other):
        return Binary("^", self, as_expr(other))

    def __neg__(self):
        return Unary("neg", self)


class Const(Expr):
    """Real or purely imaginary constant.

    ``value`` is a :class:`~fractions.Fraction` (exact) or a finite float;
    ``imag=True`` multiplies it by ``i``.  General complex constants are
    sums of two nodes, see :func:`const`.
    """

    __slots__ = ("value", "imag")

    def __init__(self, value, imag: bool = False):
        if isinstance(value, bool):
            raise TypeError("boolean constants are not allowed")
        if isinstance(value, int):
            value = Fraction(value)
        elif isinstance(value, Fraction):
            pass
        elif isinstance(value, float):
            if not math.isfinite(value):
                raise ValueError("constants must be finite")
        else:
            raise TypeError(f"unsupported constant type {type(value).__name__}")
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "imag", bool(imag))
        exact = isinstance(value, Fraction)
        self._freeze(("const", exact, value, bool(imag)))

    @property
    def complex_value(self) -> complex:
        v = float(self.value)
        return complex(0.0, v) if self.imag else complex(v, 0.0)

    @property
    def is_zero(self) -> bool:
        return self.value == 0

    @property
    def is_one(self) -> bool:
        return not self.imag and self.value == 1

    def variables(self):
        return frozenset()


class Var(Expr):
    """Coordinate ``z_index`` (1-based)."""

    __slots__ = ("index",)

    def __init__(self, index: int):
        if not isinstance(index, int) or index < 1:
            raise ValueError("variable index must be a positive integer")
        object.__setattr__(self, "index", index)
        self._freeze(("var", index))

    def variables(self):
        return frozenset((self.index,))


class Unary(Expr):
    __slots__ = ("op", "arg")

    def __init__(self, op: str, arg: Expr):
        if op not in UNARY_OPS:
            raise ValueError(f"unknown unary op {op!r}")
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "arg", arg)
        self._freeze(("unary", op, arg))

    @property
    def children(self):
        return (self.arg,)


class Binary(Expr):
    __slots__ = ("op", "left", "right")

    def __init__(self, op: str, left: Expr, right: Expr):
        if op not in BINARY_OPS:
            raise ValueError(f"unknown binary op {op!r}")
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        self._freeze(("binary", op, left, right))

    @property
    def children(self):
        return (self.left, self.right)


class Max(Expr):
    """Pointwise maximum of real-valued arguments; not differentiable."""

    __slots__ = ("args",)

    def __init__(self, args: Sequence[Expr]):
        args = tuple(args)
        if not args:
            raise ValueError("max needs at least one argument")
        object.__setattr__(self, "args", args)
        self._freeze(("max", args))

    @property
    def children(self):
        return self.args


class Ref(Expr):
    """Named reference to a reusable sub-expression; printed by name."""

    __slots__ = ("name", "body")

    def __init__(self, name: str, body: Expr):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "body", body)
        self._freeze(("ref", name, body))

    @property
    def children(self):
        return (self.body,)


class Guard(Expr):
    """``default`` where ``cond`` is exactly zero, ``body`` elsewhere.

    With ``default=None`` the guard set is excluded from the domain.
    Derivatives of a guard are always undefined on the guard set.
    """

    __slots__ = ("cond", "default", "body")

    def __init__(self, cond: Expr, default: Expr | None, body: Expr):
        object.__setattr__(self, "cond", cond)
        object.__setattr__(self, "default", default)
        object.__setattr__(self, "body", body)
        self._freeze(("guard", cond, default, body))

    @property
    def children(self):
        if self.default is None:
            return (self.cond, self.body)
        return (self.cond, self.default, self.body)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    return const(x)


def const(c) -> Expr:
    """Expression for an arbitrary number; complex values become ``a + b*i``."""
    if isinstance(c, Expr):
        return c
    if isinstance(c, (int, Fraction)) and not isinstance(c, bool):
        return Const(c)
    c = complex(c)
    if c.imag == 0.0:
        return Const(float(c.real))
    if c.real == 0.0:
        return Const(float(c.imag), imag=True)
    return Binary("+", Const(float(c.real)), Const(float(c.imag), imag=True))


def var(i: int) -> Var:
    return Var(i)


def fn(op: str, arg) -> Unary:
    return Unary(op, as_expr(arg))


def conj(e):
    return fn("conj", e)


def re_(e):
    return fn("re", e)


def im_(e):
    return fn("im", e)


def abs_(e):
    return fn("abs", e)


def abs2(e):
    return fn("abs2", e)


def log(e):
    return fn("log", e)


def exp(e):
    return fn("exp", e)


def sqrt(e):
    return fn("sqrt", e)


def emax(*args):
    return Max([as_expr(a) for a in args])


# ---------------------------------------------------------------------------
# tree utilities


def walk(e: Expr):
    """Pre-order iteration over distinct nodes."""
    seen = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        yield node
        stack.extend(reversed(node.children))


def contains(e: Expr, predicate) -> bool:
    return any(predicate(n) for n in walk(e))


def is_smooth(e: Expr) -> bool:
    """No ``max`` node anywhere in the tree."""
    return not contains(e, lambda n: isinstance(n, Max))


def is_holomorphic(e: Expr) -> bool:
    """Syntactic holomorphy: no conj/re/im/abs/abs2 nodes."""
    bad = {"conj", "re", "im", "abs", "abs2"}
    return not contains(
        e, lambda n: (isinstance(n, Unary) and n.op in bad) or isinstance(n, Max)
    )


def substitute(e: Expr, mapping: Mapping[int, Expr]) -> Expr:
    """Replace variables by expressions (simultaneously)."""
    cache: dict[int, Expr] = {}

    def go(node):
        key = id(node)
        if key in cache:
            return cache[key]
        if isinstance(node, Var):
            out = mapping.get(node.index, node)
        elif isinstance(node, Const):
            out = node
        elif isinstance(node, Unary):
            out = Unary(node.op, go(node.arg))
        elif isinstance(node, Binary):
            out = Binary(node.op, go(node.left), go(node.right))
        elif isinstance(node, Max):
            out = Max([go(a) for a in node.args])
        elif isinstance(node, Ref):
            out = Ref(node.name, go(node.body))
        elif isinstance(node, Guard):
            d = None if node.default is None else go(node.default)
            out = Guard(go(node.cond), d, go(node.body))
        else:  # pragma: no cover
            raise TypeError(type(node))
        cache[key] = out
        return out

    return go(e)


# ---------------------------------------------------------------------------
# printing


def _num_text(v) -> str:
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        return f"{v.numerator}/{v.denominator}"
    return repr(float(v))


def _const_text(c: Const) -> str:
    if not c.imag:
        return _num_text(c.value)
    if isinstance(c.value, Fraction) and c.value == 1:
        return "i"
    if isinstance(c.value, Fraction) and c.value == -1:
        return "-i"
    return _num_text(c.value) + "i"


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return {"+": _P_ADD, "-": _P_ADD, "*": _P_MUL, "/": _P_MUL, "^": _P_POW}[e.op]
    if isinstance(e, Unary) and e.op == "neg":
        return _P_UNARY
    if isinstance(e, Const) and _const_text(e).startswith("-"):
        return _P_UNARY
    return _P_ATOM


def print_expr(e: Expr) -> str:
    """Render ``e`` in the DSL; ``parse(print_expr(e)) == e`` for every tree."""

    def wrap(node, cond):
        s = go(node)
        return f"({s})" if cond else s

    def go(node):
        if isinstance(node, Const):
            return _const_text(node)
        if isinstance(node, Var):
            return f"z{node.index}"
        if isinstance(node, Unary):
            if node.op == "neg":
                arg = node.arg
                bare_literal = isinstance(arg, Const) and not _const_text(arg).startswith("-")
                return "-" + wrap(arg, _prec(arg) < _P_UNARY or bare_literal)
            return f"{node.op}({go(node.arg)})"
        if isinstance(node, Binary):
            op = node.op
            if op == "^":
                base = wrap(node.left, _prec(node.left) < _P_ATOM)
                expo = wrap(node.right, _prec(node.right) < _P_UNARY)
                return f"{base} ^ {expo}"
            p = _P_ADD if op in "+-" else _P_MUL
            left = wrap(node.left, _prec(node.left) < p)
            right = wrap(node.right, _prec(node.right) <= p)
            return f"{left} {op} {right}"
        if isinstance(node, Max):
            return "max(" + ", ".join(go(a) for a in node.args) + ")"
        if isinstance(node, Ref):
            return node.name
        if isinstance(node, Guard):
            parts = [go(node.cond)]
            if node.default is not None:
                parts.append(go(node.default))
            parts.append(go(node.body))
            return "guard(" + ", ".join(parts) + ")"
        raise TypeError(type(node))  # pragma: no cover

    return go(e)


# ---------------------------------------------------------------------------
# parsing

_NUM = r"(?:\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+|\d+)"
_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)"
    r"|(?P<rat>\d+/\d+(?![\d.eE]))(?P<rat_i>i(?![A-Za-z0-9_]))?"
    rf"|(?P<num>{_NUM})(?P<num_i>i(?![A-Za-z0-9_]))?"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),])"
)
_VAR_RE = re.compile(r"z([1-9]\d*)\Z")


@dataclass(frozen=True)
class _Tok:
    kind: str  # "num", "ident", "op", "eof"
    text: str
    line: int
    col: int
    value: object = None
    imag: bool = False


def _tokenize(src: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        col = pos - line_start + 1
        if m is None:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group(0)
        if m.group("ws") is not None:
            for k, ch in enumerate(text):
                if ch == "\n":
                    line += 1
                    line_start = pos + k + 1
        elif m.group("rat") is not None:
            p, q = m.group("rat").split("/")
            if int(q) == 0:
                raise ExprSyntaxError("zero denominator in rational literal", line, col)
            toks.append(_Tok("num", text, line, col, Fraction(int(p), int(q)),
                             m.group("rat_i") is not None))
        elif m.group("num") is not None:
            t = m.group("num")
            val = Fraction(int(t)) if t.isdigit() else float(t)
            if isinstance(val, float) and not math.isfinite(val):
                raise ExprSyntaxError("numeric literal overflows", line, col)
            toks.append(_Tok("num", text, line, col, val, m.group("num_i") is not None))
        elif kind == "ident":
            toks.append(_Tok("ident", text, line, col))
        else:
            toks.append(_Tok("op", text, line, col))
        pos = m.end()
    col = pos - line_start + 1
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, src, dim, defs, aliases):
        self.toks = _tokenize(src)
        self.i = 0
        self.dim = dim
        self.defs = dict(defs or {})
        self.aliases = dict(aliases or {})

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.next()
        if t.kind != "op" or t.text != text:
            shown = t.text or "end of input"
            raise ExprSyntaxError(f"expected {text!r}, found {shown!r}", t.line, t.col)
        return t

    def is_op(self, text, k=0):
        t = self.peek(k)
        return t.kind == "op" and t.text == text

    def parse(self):
        e = self.expr()
        t = self.peek()
        if t.kind != "eof":
            raise ExprSyntaxError(f"unexpected {t.text!r}", t.line, t.col)
        return e

    def expr(self):
        e = self.term()
        while self.is_op("+") or self.is_op("-"):
            op = self.next().text
            e = Binary(op, e, self.term())
        return e

    def term(self):
        e = self.unary()
        while self.is_op("*") or self.is_op("/"):
            op = self.next().text
            e = Binary(op, e, self.unary())
        return e

    def unary(self):
        if self.is_op("-"):
            lit = self.peek(1)
            if lit.kind == "num" and not self.is_op("^", 2):
                self.next()
                self.next()
                return Const(-lit.value, lit.imag)
            if lit.kind == "ident" and lit.text == "i" and not self.is_op("^", 2) \
                    and not self.is_op("(", 2) and "i" not in self.defs:
                self.next()
                self.next()
                return Const(-1, imag=True)
            self.next()
            return Unary("neg", self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.is_op("^"):
            self.next()
            return Binary("^", base, self.unary())
        return base

    def atom(self):
        t = self.next()
        if t.kind == "num":
            return Const(t.value, t.imag)
        if t.kind == "op" and t.text == "(":
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "ident":
            return self.identifier(t)
        shown = t.text or "end of input"
        raise ExprSyntaxError(f"unexpected {shown!r}", t.line, t.col)

    def args(self):
        self.expect("(")
        out = [self.expr()]
        while self.is_op(","):
            self.next()
            out.append(self.expr())
        self.expect(")")
        return out

    def identifier(self, t):
        name = t.text
        calls = self.is_op("(")
        if calls and name in FUNCTIONS:
            a = self.args()
            if len(a) != 1:
                raise ExprSyntaxError(f"{name} takes one argument", t.line, t.col)
            return Unary(name, a[0])
        if calls and name == "max":
            return Max(self.args())
        if calls and name == "guard":
            a = self.args()
            if len(a) == 2:
                return Guard(a[0], None, a[1])
            if len(a) == 3:
                return Guard(a[0], a[1], a[2])
            raise ExprSyntaxError("guard takes two or three arguments", t.line, t.col)
        if name in self.defs:
            return Ref(name, self.defs[name])
        if name in self.aliases:
            return self.variable(self.aliases[name], t)
        if name == "i":
            return Const(1, imag=True)
        m = _VAR_RE.match(name)
        if m:
            return self.variable(int(m.group(1)), t)
        if name in FUNCTIONS or name in ("max", "guard"):
            raise ExprSyntaxError(f"{name} must be called with parentheses", t.line, t.col)
        raise UnknownIdentifierError(f"unknown identifier {name!r}", t.line, t.col)

    def variable(self, idx, t):
        if self.dim is not None and idx > self.dim:
            raise VariableIndexError(
                f"variable z{idx} exceeds ambient dimension {self.dim}", t.line, t.col)
        return Var(idx)


def parse(source: str, ambient_dim: int | None = None, *,
          defs: Mapping[str, Expr] | None = None,
          aliases: Mapping[str, int] | None = None) -> Expr:
    """Parse DSL text into an :class:`Expr`.

    ``defs`` makes named sub-expressions available as identifiers (they
    become :class:`Ref` nodes); ``aliases`` maps extra identifier names to
    variable indices, e.g. ``{"t": 1, "s1": 2}`` for family specs.
    """
    if not isinstance(source, str):
        raise TypeError("source must be text")
    e = _Parser(source, ambient_dim, defs, aliases).parse()
    if ambient_dim is not None:
        for name, body in (defs or {}).items():
            if body.max_var_index() > ambient_dim:
                raise VariableIndexError(
                    f"definition {name!r} uses variables beyond dimension {ambient_dim}", 1, 1)
    return e


# ---------------------------------------------------------------------------
# points and evaluation


@dataclass(frozen=True)
class Point:
    """A point of C^N, optionally marking coordinates constrained to be real."""

    coords: tuple
    real_mask: tuple | None = None

    def __post_init__(self):
        coords = tuple(complex(c) for c in self.coords)
        object.__setattr__(self, "coords", coords)
        if self.real_mask is not None:
            mask = tuple(bool(m) for m in self.real_mask)
            if len(mask) != len(coords):
                raise ValueError("real_mask length differs from the number of coordinates")
            for c, m in zip(coords, mask):
                if m and abs(c.imag) > 1e-14:
                    raise ValueError(f"coordinate {c} is marked real but has imaginary part")
            object.__setattr__(self, "real_mask", mask)

    @classmethod
    def of(cls, *coords, real_mask=None) -> "Point":
        return cls(tuple(coords), real_mask)

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=complex)


def as_point(p) -> Point:
    if isinstance(p, Point):
        return p
    return Point(tuple(np.asarray(p, dtype=complex).ravel()))


def _ipow(x, n: int):
    """x**n by repeated multiplication (n >= 0)."""
    result = None
    base = x
    while n:
        if n & 1:
            result = base if result is None else result * base
        n >>= 1
        if n:
            base = base * base
    if result is None:
        return np.ones_like(x) if isinstance(x, np.ndarray) else complex(1.0)
    return result


def _integer_exponent(node: Expr):
    if isinstance(node, Const) and not node.imag:
        v = node.value
        if isinstance(v, Fraction) and v.denominator == 1:
            return int(v)
        if isinstance(v, float) and v.is_integer() and abs(v) < 2**31:
            return int(v)
    return None


class _Evaluator:
    """Tree-walking evaluator over batches of points.

    Values are complex arrays of shape (M,) or Python complex scalars for
    constant subtrees.  ``raise_errors`` selects between raising
    :class:`DomainError` and writing NaN at offending points.
    """

    def __init__(self, Z: np.ndarray, raise_errors: bool):
        self.Z = Z
        self.M = Z.shape[0]
        self.raise_errors = raise_errors
        self.memo = {}
        self.full = np.ones(self.M, dtype=bool)

    def bad(self, mask, values, message, path, active):
        mask = np.asarray(mask) & active if np.ndim(mask) else (bool(mask) and active)
        if not np.any(mask):
            return values
        if self.raise_errors:
            raise DomainError(message, path)
        values = np.array(np.broadcast_to(values, (self.M,)), dtype=complex)
        values[np.broadcast_to(mask, (self.M,))] = np.nan
        return values

    def run(self, node, path=(), active=None):
        if active is None:
            active = self.full
        key = (id(node), id(active))
        if key in self.memo:
            return self.memo[key]
        with np.errstate(all="ignore"):
            out = self._eval(node, path, active)
        self.memo[key] = out
        return out

    def _eval(self, node, path, active):
        if isinstance(node, Const):
            return node.complex_value
        if isinstance(node, Var):
            if node.index > self.Z.shape[1]:
                raise DomainError(
                    f"variable z{node.index} exceeds point dimension {self.Z.shape[1]}", path)
            return self.Z[:, node.index - 1]
        if isinstance(node, Ref):
            return self.run(node.body, path + (0,), active)
        if isinstance(node, Unary):
            x = self.run(node.arg, path + (0,), active)
            return self._unary(node.op, x, path, active)
        if isinstance(node, Binary):
            if node.op == "^":
                return self._pow(node, path, active)
            a = self.run(node.left, path + (0,), active)
            b = self.run(node.right, path + (1,), active)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            out = a / b if np.ndim(b) else (a / b if b != 0 else a * complex("nan"))
            return self.bad(np.asarray(b) == 0, out, "division by zero", path, active)
        if isinstance(node, Max):
            vals = [self.run(a, path + (k,), active) for k, a in enumerate(node.args)]
            arr = np.array([np.broadcast_to(v, (self.M,)) for v in vals])
            nonreal = np.abs(arr.imag) > 1e-12 * (1.0 + np.abs(arr.real))
            out = np.max(arr.real, axis=0).astype(complex)
            return self.bad(np.any(nonreal, axis=0), out, "max of non-real values", path, active)
        if isinstance(node, Guard):
            c = np.broadcast_to(self.run(node.cond, path + (0,), active), (self.M,))
            zero = c == 0
            body_mask = active & ~zero
            body = self.run(node.body, path + (len(node.children) - 1,), body_mask)
            if node.default is None:
                out = np.array(np.broadcast_to(body, (self.M,)), dtype=complex)
                return self.bad(zero, out, "evaluation on the guard set", path, active)
            dflt = self.run(node.default, path + (1,), active & zero)
            return np.where(zero, dflt, body)
        raise TypeError(type(node))  # pragma: no cover

    def _unary(self, op, x, path, active):
        if op == "neg":
            return -x
        if op == "conj":
            return np.conj(x) if np.ndim(x) else x.conjugate()
        if op == "re":
            return np.real(x) + 0j
        if op == "im":
            return np.imag(x) + 0j
        if op == "abs":
            return np.abs(x) + 0j
        if op == "abs2":
            return np.real(x) ** 2 + np.imag(x) ** 2 + 0j
        if op == "exp":
            return np.exp(x)
        if op == "sqrt":
            return np.sqrt(x + 0j)
        if op == "log":
            zero = np.asarray(x) == 0
            out = np.log(np.where(zero, 1.0, x) + 0j)
            return self.bad(zero, out, "log of zero", path, active)
        raise ValueError(op)  # pragma: no cover

    def _pow(self, node, path, active):
        base = self.run(node.left, path + (0,), active)
        n = _integer_exponent(node.right)
        if n is not None:
            if n >= 0:
                return _ipow(base, n)
            zero = np.asarray(base) == 0
            safe = np.where(zero, 1.0, base) if np.ndim(base) else (1.0 if base == 0 else base)
            out = 1.0 / _ipow(safe + 0j, -n)
            return self.bad(zero, out, "negative power of zero", path, active)
        expo = self.run(node.right, path + (1,), active)
        b = np.asarray(base, dtype=complex)
        nonpos = (b.imag == 0) & (b.real <= 0)
        safe = np.where(nonpos, 1.0, b)
        out = np.exp(expo * np.log(safe))
        if not np.ndim(base) and not np.ndim(expo):
            out = complex(out)
        return self.bad(nonpos, out, "real power of a non-positive real base", path, active)


def evaluate(e: Expr, p) -> complex:
    """Value of ``e`` at a single point; raises :class:`DomainError` on singularities."""
    p = as_point(p)
    Z = p.array.reshape(1, -1)
    if e.max_var_index() > Z.shape[1]:
        raise DomainError(f"expression needs {e.max_var_index()} coordinates, point has {Z.shape[1]}")
    v = _Evaluator(Z, True).run(e)
    return complex(np.broadcast_to(v, (1,))[0])


def evaluate_batch(e: Expr, Z, *, errors: str = "raise") -> np.ndarray:
    """Vectorised evaluation at the rows of ``Z`` (shape (M, N)).

    ``errors="nan"`` replaces domain errors by NaN instead of raising.
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    if errors not in ("raise", "nan"):
        raise ValueError("errors must be 'raise' or 'nan'")
    if e.max_var_index() > Z.shape[1]:
        raise DomainError(f"expression needs {e.max_var_index()} coordinates, point has {Z.shape[1]}")
    v = _Evaluator(Z, errors == "raise").run(e)
    return np.array(np.broadcast_to(v, (Z.shape[0],)), dtype=complex)


def evaluate_many(exprs: Iterable[Expr], Z, *, errors: str = "raise") -> np.ndarray:
    """Evaluate several expressions sharing one memo table; shape (len(exprs), M)."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    ev = _Evaluator(Z, errors == "raise")
    rows = []
    for e in exprs:
        if e.max_var_index() > Z.shape[1]:
            raise DomainError(f"expression needs {e.max_var_index()} coordinates")
        rows.append(np.broadcast_to(ev.run(e), (Z.shape[0],)))
    return np.array(rows, dtype=complex).reshape(-1, Z.shape[0])
