import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levilab.calculus import jet2
from levilab.domains import ball
from levilab.errors import PreconditionError
from levilab.expr import evaluate, evaluate_batch, parse
from levilab.hartogs import (
    HYPOTHESIS_FAILURE,
    IN_H,
    IN_P_ONLY,
    NO_VIOLATION,
    OUTSIDE,
    VIOLATION,
    AnalyticFamily,
    HartogsFigure,
    build_thm41_family,
    build_u_sup,
    build_uk,
    complement,
    kontinuitaetssatz_sweep,
    max_strictify_eps,
    merge_defining,
    r2_touching_family,
    real_plane_depth,
    strictify,
    thm41_model_domain,
    verify_levi_identity,
)
from levilab.levi import YES, Subspace, classify_qpsh, holomorphic_tangent

# ---------------------------------------------------------------------------
# Hartogs figures


def test_membership_examples():
    F = HartogsFigure(2, 1, 0.3, 0.7)
    assert F.membership((0.5, 0.2)) == IN_H
    assert F.membership((0.9, 0.9j)) == IN_H
    assert F.membership((0.5, 0.9)) == IN_P_ONLY
    assert F.membership((1.1, 0)) == OUTSIDE


def test_figure_rejects_bad_parameters():
    with pytest.raises(ValueError):
        HartogsFigure(2, 2, 0.3, 0.7)
    with pytest.raises(ValueError):
        HartogsFigure(3, 1, 1.3, 0.7)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_figure_lies_in_polydisc_and_grows_with_r(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    q = int(rng.integers(1, n))
    r, R = rng.uniform(0.05, 0.95, 2)
    z = rng.uniform(0, 1.2, n) * np.exp(2j * np.pi * rng.uniform(size=n))
    small = HartogsFigure(n, q, r, R).membership(z)
    big = HartogsFigure(n, q, min(0.99, r + 0.04), R).membership(z)
    if small == IN_H:
        assert np.max(np.abs(z)) < 1
        assert big == IN_H
    assert (small == OUTSIDE) == (np.max(np.abs(z)) >= 1)


# ---------------------------------------------------------------------------
# sweeps


def test_thm41_family_geometry():
    fam = build_thm41_family(0.1, 0.2, 3, 1)
    assert fam.m == 1 and fam.param_radius == 0.2
    S = np.array([[0.2], [0.1j], [0]])
    A0 = fam.points(0.0, S)
    assert np.allclose(A0[:, 0], 0.1) and np.allclose(A0[:, 1], S[:, 0]) and np.allclose(A0[:, 2], 0)
    assert np.allclose(fam.points(1.0, [[0]]), 0)
    assert fam.cr_residual(0.5, S) <= 1e-12


def test_thm41_sweep_against_model_domain():
    rep = kontinuitaetssatz_sweep(complement(thm41_model_domain(3, 1)),
                                  build_thm41_family(0.1, 0.2, 3, 1), 32, 8, 32)
    assert rep.verdict == VIOLATION
    assert np.allclose(rep.touching_point, [[0, 0]] * 3, atol=1e-6)


def test_real_plane_touching_family_refines():
    D = real_plane_depth()
    coarse = kontinuitaetssatz_sweep(D, r2_touching_family(), 32, 8, 32)
    fine = kontinuitaetssatz_sweep(D, r2_touching_family(), 64, 16, 64)
    for rep in (coarse, fine):
        assert rep.verdict == VIOLATION
        assert np.max(np.abs(np.array(rep.touching_point, dtype=float))) <= 1e-3


def test_ball_admits_no_touching_disc():
    fam = r2_touching_family(0.4)
    rep = kontinuitaetssatz_sweep(complement(ball(2, 0.3)), fam, 32, 8, 32)
    assert rep.verdict in (NO_VIOLATION, HYPOTHESIS_FAILURE)
    rep = kontinuitaetssatz_sweep(ball(2, 2), fam, 32, 8, 32)
    assert rep.verdict == NO_VIOLATION and rep.margin < 0


def test_family_leaving_domain_is_a_hypothesis_failure():
    fam = AnalyticFamily.from_exprs([parse("3*z1"), parse("z2")], 1)
    rep = kontinuitaetssatz_sweep(ball(2), fam, 16, 4, 16)
    assert rep.verdict == HYPOTHESIS_FAILURE and rep.notes


def test_non_holomorphic_family_is_flagged():
    fam = AnalyticFamily.from_exprs([parse("0.1*z1"), parse("0.1*conj(z2)")], 1)
    rep = kontinuitaetssatz_sweep(ball(2), fam, 8, 4, 8)
    assert rep.verdict == HYPOTHESIS_FAILURE and rep.cr_residual > 0.05


# ---------------------------------------------------------------------------
# u_k


def test_u1_formula():
    w = (0.3 + 0.4j, 0.1)
    s = sum(abs(x) ** 2 for x in w)
    assert evaluate(build_uk(1, 2), w).real == pytest.approx(-0.5 * np.log(s) + s, abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 20), st.floats(0.1, 10), st.integers(0, 2 ** 32 - 1))
def test_uk_scaling_defect(k, lam, seed):
    rng = np.random.default_rng(seed)
    w = rng.normal(size=2) + 1j * rng.normal(size=2)
    uk = build_uk(k, 2)
    n2 = np.sum(np.abs(w) ** 2)
    lhs = evaluate(uk, lam * w).real
    rhs = evaluate(uk, w).real - np.log(lam) + (lam ** 2 - 1) * n2 / k
    assert abs(lhs - rhs) <= 1e-10 * (1 + abs(rhs))


def test_uk_approaches_sup_log():
    W = np.array([[0.5, 0.2j], [0.3, -0.6], [0.8j, 0.8]])
    u = evaluate_batch(build_u_sup(2), W).real
    gaps = [np.max(np.abs(evaluate_batch(build_uk(k, 2), W).real - u)) for k in (2, 8, 32)]
    assert gaps[0] > gaps[1] > gaps[2]


# ---------------------------------------------------------------------------
# strictification and the merged defining function


def test_strictify_shifts_levi_by_eps():
    psi0 = parse("abs2(z1) + 2*abs2(z2)")
    phi = strictify(psi0, (0.1, 0.2j), 0.25)
    L = jet2(phi, (0.7, -0.3)).levi
    assert np.allclose(L, np.diag([0.75, 1.75]), atol=1e-14)
    assert evaluate(phi, (0.1, 0.2j)).real == pytest.approx(evaluate(psi0, (0.1, 0.2j)).real)
    with pytest.raises(ValueError):
        strictify(psi0, (0, 0), 0)


def test_max_strictify_eps():
    psi0 = parse("abs2(z1) + 2*abs2(z2)")
    samples = [(0.1, 0.1), (0.5j, -0.2)]
    eps = max_strictify_eps(psi0, (0, 0), 0, samples, 5.0)
    # smallest eigenvalue 1 - eps must clear the band tol * max(1, 2 - eps) = 1e-8
    assert eps == pytest.approx(1.0 - 1e-8, abs=1e-9)
    assert classify_qpsh(strictify(psi0, (0, 0), 0.5 * eps), samples[0], 0, strict=True).verdict == YES
    assert max_strictify_eps(parse("-abs2(z1)"), (0,), 0, [(0.1,)], 1.0) == 0.0


def test_identity_on_conjugate_graph():
    phis = [parse("re(z2 - conj(z1))"), parse("im(z2 - conj(z1))")]
    res = verify_levi_identity(parse("abs2(z1)"), phis, 3.0, (0.4j, -0.4j), np.zeros(2))
    assert res.residual == 0 and res.R == 0


def test_identity_on_levi_flat_surface():
    phi = parse("im(z1^2 - z2)")
    p = (1, 1)
    g = jet2(phi, p).grad_z
    H = holomorphic_tangent([g])
    X = H.basis[:, 0]
    res = verify_levi_identity(parse("abs2(z1) - abs2(z2)"), [phi], 2.0, p, X)
    assert res.residual <= 1e-13
    assert res.R == pytest.approx(0, abs=1e-28)


def test_identity_with_transverse_vector():
    # X in the full space: the quadratic term picks up |dphi_j(X)|^2
    phis = [parse("re(z2 - z1^2)"), parse("im(z2 - z1^2)")]
    p = (0.5, 0.25)
    X = np.array([0.3, -1j])
    res = verify_levi_identity(parse("re(z1)"), phis, 5.0, p, X, H=Subspace.full(2))
    assert res.R > 0
    assert res.residual <= 1e-12 * (1 + abs(res.lhs))
    assert res.rhs == pytest.approx(10 * res.R)


def test_identity_preconditions():
    phi = parse("im(z1^2 - z2)")
    with pytest.raises(PreconditionError):
        verify_levi_identity(parse("abs2(z1)"), [phi], 1.0, (1, 2j), np.array([1, 0]))
    with pytest.raises(PreconditionError):
        verify_levi_identity(parse("abs2(z1)"), [phi], 1.0, (1, 1), np.array([0, 1]))


def test_merge_without_constraints_is_identity():
    e = parse("abs2(z1)")
    assert merge_defining(e, [], 4.0) is e
