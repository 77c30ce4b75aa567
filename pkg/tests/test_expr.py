import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from exprgen import depth_limited, smooth_expr
from levilab.errors import (
    DomainError,
    ExprSyntaxError,
    UnknownIdentifierError,
    VariableIndexError,
)
from levilab.expr import (
    Binary,
    Const,
    Guard,
    Max,
    Point,
    Ref,
    Unary,
    Var,
    abs2,
    conj,
    evaluate,
    evaluate_batch,
    is_holomorphic,
    parse,
    print_expr,
    substitute,
)
from levilab.graphs import ex58_expr


# ---------------------------------------------------------------------------
# parsing


def test_parse_example_graph_function():
    e = parse("conj(z1)*z2^4/conj(z2)", 2)
    expected = Binary("/", Binary("*", Unary("conj", Var(1)), Binary("^", Var(2), Const(4))),
                      Unary("conj", Var(2)))
    assert e == expected


def test_parse_zero():
    e = parse("0", 1)
    assert e == Const(0)
    assert print_expr(e) == "0"


def test_parse_sup_norm_log():
    e = parse("-log(max(abs(z1),abs(z2)))", 2)
    assert e == Unary("neg", Unary("log", Max([Unary("abs", Var(1)), Unary("abs", Var(2))])))


def test_parse_precedence_and_literals():
    assert parse("1 + 2*z1^2") == Binary("+", Const(1), Binary("*", Const(2), Binary("^", Var(1), Const(2))))
    assert parse("3/4") == Const(Fraction(3, 4))
    assert parse("3 / 4") == Binary("/", Const(3), Const(4))
    assert parse("2.5i") == Const(2.5, imag=True)
    assert parse("i") == Const(1, imag=True)
    assert parse("-2") == Const(-2)
    assert parse("-2^2") == Unary("neg", Binary("^", Const(2), Const(2)))
    assert parse("z1^-1") == Binary("^", Var(1), Const(-1))


def test_parse_defs_and_aliases():
    body = parse("abs2(z1)")
    e = parse("r + t", defs={"r": body}, aliases={"t": 2})
    assert e == Binary("+", Ref("r", body), Var(2))
    assert evaluate(e, (1j, 3)) == 4


def test_parse_errors_carry_positions():
    with pytest.raises(ExprSyntaxError) as ei:
        parse("z1 +\n  * z2", 2)
    assert ei.value.line == 2 and ei.value.column == 3
    with pytest.raises(UnknownIdentifierError):
        parse("sin(z1)", 1)
    with pytest.raises(VariableIndexError):
        parse("z3", 2)
    with pytest.raises(ExprSyntaxError):
        parse("conj z1", 1)
    with pytest.raises(ExprSyntaxError):
        parse("(z1", 1)


# ---------------------------------------------------------------------------
# evaluation


def test_evaluate_abs2():
    assert evaluate(abs2(Var(1)), (3 + 4j,)) == 25


def test_evaluate_example_graph_function():
    h = ex58_expr(2)
    assert evaluate(h, (1, 1)) == pytest.approx(1)
    lam = 2j
    assert evaluate(h, (lam, lam)) == pytest.approx(lam ** 4)
    assert evaluate(h, (lam, lam)) == pytest.approx(16)
    assert evaluate(h, (1, 0)) == 0  # guarded value on {z2 = 0}


def test_evaluate_sup_norm_log():
    u = parse("-log(max(abs(z1),abs(z2)))", 2)
    assert evaluate(u, (0.5, 0.25)).real == pytest.approx(math.log(2), abs=1e-15)


def test_domain_errors_name_the_node():
    with pytest.raises(DomainError) as ei:
        evaluate(parse("1 + log(z1)"), (0,))
    assert ei.value.path == (1,)
    with pytest.raises(DomainError):
        evaluate(parse("1/z1"), (0,))
    with pytest.raises(DomainError):
        evaluate(parse("z1^0.5"), (-1,))
    out = evaluate_batch(parse("1/z1"), np.array([[0], [2]]), errors="nan")
    assert np.isnan(out[0]) and out[1] == 0.5


def test_guard_without_default_refuses_guard_set():
    g = Guard(Var(1), None, Binary("/", Const(1), Var(1)))
    assert evaluate(g, (2,)) == 0.5
    with pytest.raises(DomainError):
        evaluate(g, (0,))


def test_real_power_route():
    assert evaluate(parse("z1^0.5"), (4,)) == pytest.approx(2)


def test_point_reality_mask():
    p = Point.of(1 + 2j, 3.0, real_mask=(False, True))
    assert p.dim == 2
    with pytest.raises(ValueError):
        Point.of(1j, real_mask=(True,))


def test_substitute_is_simultaneous():
    e = parse("z1 - z2")
    swapped = substitute(e, {1: Var(2), 2: Var(1)})
    assert swapped == parse("z2 - z1")


def test_holomorphy_is_syntactic():
    assert is_holomorphic(parse("z1^2 + exp(z2)"))
    assert not is_holomorphic(parse("z1*conj(z2)"))


# ---------------------------------------------------------------------------
# properties


@settings(max_examples=1000, deadline=None)
@given(depth_limited(3, 8))
def test_round_trip(e):
    assert parse(print_expr(e)) == e


def test_round_trip_example_graph_function():
    h = ex58_expr(2)
    assert parse(print_expr(h)) == h


def _oracle(e, z):
    """Independent scalar evaluator using Python's complex arithmetic."""
    if isinstance(e, Const):
        v = complex(float(e.value))
        return v * 1j if e.imag else v
    if isinstance(e, Var):
        return complex(z[e.index - 1])
    if isinstance(e, Unary):
        x = _oracle(e.arg, z)
        return {
            "neg": lambda: -x,
            "conj": lambda: x.conjugate(),
            "re": lambda: complex(x.real),
            "im": lambda: complex(x.imag),
            "abs": lambda: complex(abs(x)),
            "abs2": lambda: x * x.conjugate(),
            "exp": lambda: cmath.exp(x),
            "log": lambda: cmath.log(x),
            "sqrt": lambda: cmath.sqrt(x),
        }[e.op]()
    a, b = _oracle(e.left, z), _oracle(e.right, z)
    if e.op == "^":
        return a ** int(b.real)
    return {"+": a + b, "-": a - b, "*": a * b, "/": a / b}[e.op]


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_evaluation_homomorphism(seed):
    rng = np.random.default_rng(seed)
    e = smooth_expr(rng, 3, 6)
    z = rng.normal(size=3) + 1j * rng.normal(size=3)
    got = evaluate(e, z)
    try:
        want = _oracle(e, z)
    except (OverflowError, ZeroDivisionError):  # overflow to inf in a deep tree
        want = complex("nan")
    assume(cmath.isfinite(want) and abs(want) < 1e100)
    assert abs(got - want) <= 1e-12 * max(1.0, abs(want))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_abs2_is_product_with_conjugate(seed):
    rng = np.random.default_rng(seed)
    e = smooth_expr(rng, 2, 4)
    Z = rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2))
    a = evaluate_batch(abs2(e), Z)
    b = evaluate_batch(Binary("*", e, conj(e)), Z)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-300)
    assert np.all(np.abs(a.imag) == 0)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.complex_numbers(min_magnitude=1e-2, max_magnitude=1e2))
def test_example_graph_homogeneity(seed, lam):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v[1] += 0.1 * np.sign(v[1].real or 1.0)
    h = ex58_expr(2)
    fv = evaluate(h, v)
    assert abs(evaluate(h, lam * v) - lam ** 4 * fv) <= 1e-10 * (1 + abs(lam) ** 4 * abs(fv))


def test_expressions_are_immutable_and_hashable():
    e = parse("z1 + 1")
    with pytest.raises(AttributeError):
        e.left = Var(2)
    assert len({e, parse("z1 + 1")}) == 1
