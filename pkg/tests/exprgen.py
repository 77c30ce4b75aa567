"""Random expression generators shared by the test modules.

``smooth_expr`` draws trees that are real-analytic on all of C^N: every
division, logarithm and square root is applied to ``1 + abs2(...)`` and
every exponential to an argument bounded by 1/2 in modulus.  Evaluation at
points whose value or gradient is huge is rejected by ``good_points``,
because a fixed absolute difference step is ill-conditioned there.

``exprs`` is a hypothesis strategy over *all* node types, used for the
printer/parser round trip.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from levilab.calculus import jet2
from levilab.expr import (
    BINARY_OPS,
    FUNCTIONS,
    Binary,
    Const,
    Guard,
    Max,
    Unary,
    Var,
    abs2,
    conj,
    exp,
    im_,
    log,
    re_,
    sqrt,
)

ONE = Const(1)


def _bounded(x):
    # |re(x) / (1 + |x|^2)| <= 1/2
    return re_(x) / (ONE + abs2(x))


def _leaf(rng, dim):
    if rng.random() < 0.7:
        return Var(int(rng.integers(1, dim + 1)))
    num = int(rng.integers(-5, 6)) or 1
    den = int(rng.integers(1, 5))
    return Const(Fraction(num, den), imag=bool(rng.random() < 0.3))


def smooth_expr(rng: np.random.Generator, dim: int, depth: int = 6):
    """Random entire expression whose tree depth is at most ``depth``."""
    if depth <= 1 or rng.random() < 0.15:
        return _leaf(rng, dim)
    d = depth - 1
    # wrappers of the form f(1 + abs2(a)) need three extra levels
    kind = int(rng.integers(0, 12 if depth > 3 else 8))
    if kind == 0:
        return smooth_expr(rng, dim, d) + smooth_expr(rng, dim, d)
    if kind == 1:
        return smooth_expr(rng, dim, d) - smooth_expr(rng, dim, d)
    if kind == 2:
        return smooth_expr(rng, dim, d) * smooth_expr(rng, dim, d)
    if kind == 3:
        return conj(smooth_expr(rng, dim, d))
    if kind == 4:
        return re_(smooth_expr(rng, dim, d))
    if kind == 5:
        return im_(smooth_expr(rng, dim, d))
    if kind == 6:
        return abs2(smooth_expr(rng, dim, d))
    if kind == 7:
        return smooth_expr(rng, dim, d) ** int(rng.integers(2, 4))
    a = smooth_expr(rng, dim, depth - 4)
    if kind == 8:
        return exp(_bounded(a))
    if kind == 9:
        return log(ONE + abs2(a))
    if kind == 10:
        return sqrt(ONE + abs2(a))
    return smooth_expr(rng, dim, d) / (ONE + abs2(a))


def tree_depth(e) -> int:
    kids = e.children
    return 1 + max((tree_depth(c) for c in kids), default=0)


def good_points(e, dim, rng, count, radius=1.0, cap=1e6, max_tries=200):
    """Up to ``count`` points in the ball where the jet of ``e`` is moderate."""
    pts = []
    for _ in range(max_tries):
        if len(pts) == count:
            break
        z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        z *= radius * rng.random() ** (1 / (2 * dim)) / np.linalg.norm(z)
        j = jet2(e, z, real=False)
        size = max(abs(j.value), np.max(np.abs(j.grad_z)), np.max(np.abs(j.grad_zbar)),
                   np.max(np.abs(j.levi)))
        if np.isfinite(size) and size <= cap:
            pts.append(z)
    return pts


def random_corpus(n_exprs: int, dim: int, depth: int, seed: int):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n_exprs:
        e = smooth_expr(rng, dim, depth)
        if e.variables() and 3 <= tree_depth(e) <= depth:
            out.append(e)
    return out


# ---------------------------------------------------------------------------
# hypothesis strategies

_fractions = st.fractions(min_value=-50, max_value=50, max_denominator=20)
_floats = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)
consts = st.builds(Const, st.one_of(_fractions, _floats), st.booleans())


def leaves(dim):
    return st.one_of(st.builds(Var, st.integers(1, dim)), consts)


def exprs(dim: int = 3, max_leaves: int = 40):
    """All node types: unary functions, negation, binary ops, max, guard."""

    def extend(children):
        return st.one_of(
            st.builds(Unary, st.sampled_from(("neg",) + FUNCTIONS), children),
            st.builds(Binary, st.sampled_from(BINARY_OPS), children, children),
            st.builds(lambda xs: Max(xs), st.lists(children, min_size=1, max_size=3)),
            st.builds(Guard, children, st.one_of(st.none(), children), children),
        )

    return st.recursive(leaves(dim), extend, max_leaves=max_leaves)


def depth_limited(dim: int, depth: int):
    """Trees of depth at most ``depth``."""
    return exprs(dim).filter(lambda e: tree_depth(e) <= depth)
