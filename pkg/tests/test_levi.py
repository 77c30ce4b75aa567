import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levilab.calculus import jet2
from levilab.errors import DegenerateGradientError, NotHermitianError
from levilab.expr import Binary, Unary, Var, const, parse, substitute
from levilab.graphs import ex58_expr
from levilab.hartogs import build_uk
from levilab.levi import (
    INCONCLUSIVE,
    NO,
    YES,
    Subspace,
    classify_matrix,
    classify_qpsh,
    holomorphic_tangent,
    inertia,
    levi_null_space,
    restrict_form,
    restricted_levi,
    verdict_from_matrix,
)


def random_hermitian(rng, n, scale=1.0):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (A + A.conj().T) / 2


def random_unitary(rng, n):
    Q, R = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


# ---------------------------------------------------------------------------
# inertia


def test_inertia_of_diagonal():
    assert inertia(np.diag([1.0, -1.0, 0.0]), 1e-9).as_tuple() == (1, 1, 1)


def test_inertia_of_euclidean_levi():
    L = jet2(parse("abs2(z1) + abs2(z2)"), (0.1, 0.2)).levi
    assert inertia(L).as_tuple() == (0, 0, 2)


def test_inertia_matches_characteristic_polynomial_roots():
    rng = np.random.default_rng(0)
    for _ in range(20):
        H = random_hermitian(rng, 5)
        roots = np.roots(np.poly(H)).real  # independent root finder
        expected = (int(np.sum(roots < 0)), 0, int(np.sum(roots > 0)))
        assert inertia(H).as_tuple() == expected


def test_inertia_rejects_bad_input():
    with pytest.raises(NotHermitianError):
        inertia(np.array([[0, 1], [0, 0]]))
    with pytest.raises(NotHermitianError):
        inertia(np.ones((2, 3)))
    with pytest.raises(ValueError):
        inertia(np.eye(2), tol=2.0)


def test_inertia_band_is_relative_to_spectral_radius():
    # band = tol * 1e6
    assert inertia(np.diag([1e6, 1e-3]), 1e-8).as_tuple() == (0, 1, 1)
    assert inertia(np.diag([1e6, 1e-3]), 1e-10).as_tuple() == (0, 0, 2)
    assert inertia(np.diag([0.5, 1e-9]), 1e-8).as_tuple() == (0, 1, 1)


# ---------------------------------------------------------------------------
# tangent spaces and restriction


def test_tangent_of_sphere():
    rho = parse("abs2(z1) + abs2(z2) + abs2(z3) - 1")
    H = holomorphic_tangent([jet2(rho, (1, 0, 0)).grad_z])
    assert H.dim == 2
    assert np.allclose(H.basis[0], 0)
    assert np.allclose(H.basis.conj().T @ H.basis, np.eye(2), atol=1e-12)


def test_tangent_of_conjugate_graph_is_zero():
    phis = [parse("re(z2) - re(z1)"), parse("im(z2) + im(z1)")]
    grads = [jet2(f, (0.3, 0.3)).grad_z for f in phis]
    assert np.allclose(grads[0], [-0.5, 0.5]) and np.allclose(grads[1], [-0.5j, -0.5j])
    assert holomorphic_tangent(grads).dim == 0


def test_tangent_of_levi_flat_hypersurface():
    g = jet2(parse("im(z1^2 - z2)"), (0, 0)).grad_z
    assert np.allclose(g, [0, 0.5j])
    H = holomorphic_tangent([g])
    assert H.dim == 1 and abs(abs(H.basis[0, 0]) - 1) < 1e-12


def test_vanishing_gradient_is_an_error():
    with pytest.raises(DegenerateGradientError):
        holomorphic_tangent([np.zeros(2)])


def test_restrict_examples():
    S = Subspace.span(np.array([[1], [1]]) / np.sqrt(2))
    assert np.allclose(restrict_form(np.diag([1, -1]), S), [[0]])
    rng = np.random.default_rng(1)
    B = Subspace.span(rng.normal(size=(5, 3)) + 1j * rng.normal(size=(5, 3)))
    assert np.allclose(restrict_form(np.eye(5), B), np.eye(3))


def test_restriction_interlaces():
    rng = np.random.default_rng(2)
    for _ in range(50):
        n, k = 6, int(rng.integers(1, 6))
        H = random_hermitian(rng, n)
        S = Subspace.span(rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k)))
        mu = np.linalg.eigvalsh(restrict_form(H, S))
        lam = np.linalg.eigvalsh(H)
        for j in range(k):
            assert lam[j] - 1e-12 <= mu[j] <= lam[j + n - k] + 1e-12


# ---------------------------------------------------------------------------
# Levi null space


def test_null_space_of_levi_flat():
    phi = parse("im(z1^2 - z2)")
    j = jet2(phi, (0.4, 0.16))
    H = holomorphic_tangent([j.grad_z])
    N = levi_null_space([j.grad_z], [j.levi], H)
    assert N.dim == H.dim == 1


def test_null_space_of_sphere():
    rho = parse("abs2(z1) + abs2(z2) - 1")
    j = jet2(rho, (1, 0))
    H = holomorphic_tangent([j.grad_z])
    assert np.allclose(restricted_levi(j.levi, H), [[1]])
    assert levi_null_space([j.grad_z], [j.levi], H).dim == 0


def test_null_space_of_holomorphic_graph():
    phis = [parse("re(z2 - z1^3)"), parse("im(z2 - z1^3)")]
    rng = np.random.default_rng(3)
    for _ in range(10):
        z = complex(*rng.normal(size=2))
        p = (z, z ** 3)
        jets = [jet2(f, p) for f in phis]
        grads = [jt.grad_z for jt in jets]
        H = holomorphic_tangent(grads)
        N = levi_null_space(grads, [jt.levi for jt in jets], H)
        assert H.dim == N.dim == 1


# ---------------------------------------------------------------------------
# classification


def test_classify_indefinite_quadratic():
    e = parse("-abs2(z1) + abs2(z2)")
    assert classify_qpsh(e, (0.2, 0.1j), 1).verdict == YES
    v = classify_qpsh(e, (0.2, 0.1j), 0)
    assert v.verdict == NO and v.margin > 0


def test_classify_uk_strict():
    assert classify_qpsh(build_uk(5, 2), (0.5, 0.3j), 1, strict=True).verdict == YES


def test_classify_log_distance_to_graph():
    h = ex58_expr(2)
    hw = Binary("-", h, Var(3))
    psi = Unary("neg", Unary("log", Unary("abs2", hw)))
    assert classify_qpsh(psi, (1, 1 + 1j, 0), 1).verdict == YES


def test_q_at_least_dimension_is_yes():
    v = classify_qpsh(parse("-abs2(z1)"), (0.5,), 1)
    assert v.verdict == YES and v.margin is None


def test_non_smooth_is_inconclusive():
    v = classify_qpsh(parse("max(abs2(z1), abs2(z2))"), (0.5, 0.1), 0)
    assert v.verdict == INCONCLUSIVE


def test_error_bound_gives_inconclusive():
    v = verdict_from_matrix(np.diag([-1e-4, 1.0]), 0, error_bound=1e-3)
    assert v.verdict == INCONCLUSIVE
    assert verdict_from_matrix(np.diag([-1e-4, 1.0]), 0).verdict == NO


def test_strict_and_nonstrict_on_zero_eigenvalue():
    assert verdict_from_matrix(np.zeros((1, 1)), 0).verdict == YES
    assert verdict_from_matrix(np.zeros((1, 1)), 0, strict=True).verdict == NO


# ---------------------------------------------------------------------------
# invariants


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    lam = rng.choice([-1, 1], n) * rng.uniform(0.1, 2, n)
    lam[rng.random(n) < 0.2] = 0.0
    U = random_unitary(rng, n)
    H = U @ np.diag(lam) @ U.conj().T
    V = random_unitary(rng, n)
    assert inertia(H).as_tuple() == inertia(V.conj().T @ H @ V).as_tuple()


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.booleans())
def test_monotonicity_in_q(seed, strict):
    rng = np.random.default_rng(seed)
    H = random_hermitian(rng, 4)
    verdicts = [classify_matrix(H, q, strict).verdict for q in range(6)]
    for a, b in zip(verdicts, verdicts[1:]):
        assert not (a == YES and b != YES)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_weyl_sum_rule(seed):
    rng = np.random.default_rng(seed)
    A, B = random_hermitian(rng, 5), random_hermitian(rng, 5)
    assert inertia(A + B).n_neg <= inertia(A).n_neg + inertia(B).n_neg


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_holomorphic_slice_compatibility(seed):
    rng = np.random.default_rng(seed)
    N, q = 3, int(rng.integers(0, 2))
    lam = rng.choice([-1.0, 1.0], N) * rng.uniform(0.2, 2.0, N)
    U = random_unitary(rng, N)
    A = U @ np.diag(lam) @ U.conj().T
    terms = [Binary("*", const(complex(A[j, k])), Binary("*", Var(j + 1), Unary("conj", Var(k + 1))))
             for j in range(N) for k in range(N)]
    e = terms[0]
    for t in terms[1:]:
        e = Binary("+", e, t)
    e = Unary("re", e)
    M = rng.normal(size=(N, q + 1)) + 1j * rng.normal(size=(N, q + 1))
    c = rng.normal(size=N) + 1j * rng.normal(size=N)
    emb = {j + 1: Binary("+", const(complex(c[j])), _linear(M[j])) for j in range(N)}
    pulled = substitute(e, emb)
    s = rng.normal(size=q + 1) + 1j * rng.normal(size=q + 1)
    z = c + M @ s
    if classify_qpsh(e, z, q).verdict == YES:
        assert classify_qpsh(pulled, s, q).verdict == YES


def _linear(row):
    out = None
    for k, a in enumerate(row, start=1):
        t = Binary("*", const(complex(a)), Var(k))
        out = t if out is None else Binary("+", out, t)
    return out
