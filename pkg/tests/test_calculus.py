import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exprgen import smooth_expr
from levilab.calculus import (
    add,
    d_z,
    d_zbar,
    fd_jet,
    jet2,
    jet_program,
    real_hessian,
    levi_from_real_hessian,
    validate_jet_fd,
    wirtinger_derive,
)
from levilab.errors import NonSmoothError
from levilab.expr import Binary, Const, Unary, abs2, const, evaluate, evaluate_batch, parse
from levilab.graphs import ex58_expr


def test_derivative_of_abs2_is_conj():
    e = wirtinger_derive(parse("abs2(z1)"), 1)
    for z in (0.3 + 2j, -1.5j, 4.0):
        assert evaluate(e, (z,)) == pytest.approx(np.conj(z))


def test_holomorphic_has_no_zbar_derivative():
    assert d_zbar(parse("z1^2"), 1) == Const(0)
    j = jet2(parse("exp(z1)*z2^3 - z1/(1 + z2^2)"), (0.3, 0.2j), real=False)
    assert np.all(j.grad_zbar == 0) and np.all(j.levi == 0)


def test_log_modulus_is_pluriharmonic_in_one_variable():
    e = parse("-log(abs2(z1))")
    assert jet2(e, (2,)).levi[0, 0] == pytest.approx(0, abs=1e-15)
    fd = fd_jet(lambda Z: evaluate_batch(e, Z), np.array([2.0]), 1e-5)
    assert abs(fd[2][0, 0]) <= 1e-5  # pure value differences, rounding-limited
    assert validate_jet_fd(e, (2,), 1e-5).levi_error <= 1e-6


def test_real_part_derivatives():
    assert evaluate(d_z(parse("re(z1)"), 1), (1j,)) == 0.5
    assert evaluate(d_z(parse("im(z1)"), 1), (1j,)) == -0.5j
    assert evaluate(d_zbar(parse("im(z1)"), 1), (1j,)) == 0.5j


def test_max_is_rejected_with_path():
    with pytest.raises(NonSmoothError) as ei:
        wirtinger_derive(parse("1 + max(re(z1), 0)"), 1)
    assert ei.value.path == (1,)


def test_jet_of_euclidean_norm_squared():
    j = jet2(parse("abs2(z1) + abs2(z2)"), (0.7 - 1j, 2j))
    assert np.allclose(j.levi, np.eye(2), atol=0)
    assert j.real_valued


def test_jet_of_pluriharmonic_defining_function():
    e = parse("im(z1^2 - z2)")
    for p in [(0, 0), (1 + 1j, -2), (0.3j, 5)]:
        assert np.allclose(jet2(e, p).levi, 0, atol=1e-15)


def test_jet_of_log_of_imaginary_parts():
    e = parse("-log(im(z1)^2 + im(z2)^2)")
    j = jet2(e, (1j, 0))
    y = np.array([1.0, 0.0])
    s = y @ y
    expected = (np.outer(y, y) - 0.5 * s * np.eye(2)) / s ** 2
    assert np.allclose(j.levi, expected, atol=1e-14)
    eig = np.linalg.eigvalsh(j.levi)
    assert eig[0] < 0 < eig[1]
    assert validate_jet_fd(e, (1j, 0)).max_rel_error <= 1e-6


def test_validate_fd_examples():
    assert validate_jet_fd(parse("abs2(z1)^2"), (1 + 1j,), 1e-5).max_rel_error <= 1e-6
    assert validate_jet_fd(ex58_expr(2), (1, 1 + 1j), 1e-5).max_rel_error <= 1e-5
    rep = validate_jet_fd(parse("7/3"), (0.5j,), 1e-5)
    assert rep.max_rel_error == 0 and rep.ok


def test_validate_fd_reports_instead_of_raising():
    rep = validate_jet_fd(parse("log(abs2(z1))"), (0,), 1e-5)
    assert not rep.ok and rep.nan_flags
    with pytest.raises(ValueError):
        validate_jet_fd(parse("z1"), (0,), 1e-2)


def test_real_hessian_round_trip():
    e = parse("abs2(z1)^2 + re(z1*conj(z2)) + im(z2^3)")
    j = jet2(e, (0.4 - 0.1j, 0.9j), with_hol_hessian=True)
    Hr = real_hessian(j)
    assert np.allclose(levi_from_real_hessian(Hr), j.levi, atol=1e-12)


def test_symmetrization_warning_for_non_real_input():
    with pytest.warns(RuntimeWarning):
        jet2(parse("z1*conj(z1)*z1"), (1 + 1j,), real=True)


# ---------------------------------------------------------------------------
# properties


def _real_expr(rng, dim, depth):
    return Unary("re", smooth_expr(rng, dim, depth))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_conjugation_symmetry(seed):
    rng = np.random.default_rng(seed)
    e = _real_expr(rng, 2, 5)
    z = 0.7 * (rng.normal(size=2) + 1j * rng.normal(size=2))
    for j in (1, 2):
        a = evaluate(d_z(e, j), z)
        b = evaluate(d_zbar(e, j), z)
        assert abs(b - np.conj(a)) <= 1e-12 * max(1.0, abs(a))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_jet_linearity(seed, alpha, beta):
    rng = np.random.default_rng(seed)
    e1, e2 = _real_expr(rng, 2, 4), _real_expr(rng, 2, 4)
    z = 0.7 * (rng.normal(size=2) + 1j * rng.normal(size=2))
    comb = Binary("+", Binary("*", const(alpha), e1), Binary("*", const(beta), e2))
    j, j1, j2 = (jet2(x, z, real=False) for x in (comb, e1, e2))
    for name in ("grad_z", "grad_zbar", "levi"):
        lhs = getattr(j, name)
        rhs = alpha * getattr(j1, name) + beta * getattr(j2, name)
        scale = max(1.0, np.max(np.abs(alpha * getattr(j1, name))), np.max(np.abs(beta * getattr(j2, name))))
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_levi_additivity_is_symbolic(seed):
    rng = np.random.default_rng(seed)
    e1, e2 = _real_expr(rng, 2, 4), _real_expr(rng, 2, 4)
    s = Binary("+", e1, e2)
    ps, p1, p2 = (jet_program(x, 2) for x in (s, e1, e2))
    for ls, l1, l2 in zip(ps.levi_exprs, p1.levi_exprs, p2.levi_exprs):
        assert ls == add(l1, l2)
