"""Hermitian inertia, Levi forms on subspaces and q-plurisubharmonicity verdicts.

Convention: the Levi matrix ``L`` of a function has entries
``L[k, l] = ∂²ψ/∂z_k∂z̄_l`` and its form is
``L(X, Y) = Σ L[k, l] X_k conj(Y_l)``.  In matrix language this is
``Y^H L^T X``, so forms on a subspace with orthonormal basis ``B`` are
``B^H L^T B``; :func:`restricted_levi` does exactly that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .calculus import Jet2, jet2
from .errors import DegenerateGradientError, NotHermitianError, PreconditionError
from .expr import Expr, as_point, is_smooth

YES = "certified_yes"
NO = "certified_no"
INCONCLUSIVE = "inconclusive"
VERDICTS = (YES, NO, INCONCLUSIVE)

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class HermitianInertia:
    """Eigenvalue sign counts of a Hermitian matrix under a tolerance band.

    An eigenvalue λ counts as zero iff ``|λ| <= band`` where
    ``band = tolerance * max(1, spectral radius)``.
    """

    n_neg: int
    n_zero: int
    n_pos: int
    tolerance: float
    band: float
    eigenvalues: tuple = ()

    @property
    def dim(self) -> int:
        return self.n_neg + self.n_zero + self.n_pos

    def as_tuple(self) -> tuple:
        return (self.n_neg, self.n_zero, self.n_pos)

    def to_dict(self) -> dict:
        return {
            "n_neg": self.n_neg,
            "n_zero": self.n_zero,
            "n_pos": self.n_pos,
            "tolerance": self.tolerance,
            "eigenvalues": [float(x) for x in self.eigenvalues],
        }


def check_hermitian(H: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise NotHermitianError(f"expected a square matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise NotHermitianError("matrix has non-finite entries")
    defect = float(np.max(np.abs(H - H.conj().T), initial=0.0))
    scale = 1.0 + float(np.max(np.abs(H), initial=0.0))
    if defect > rtol * scale:
        raise NotHermitianError(f"matrix is not Hermitian (defect {defect:.3g})")
    return 0.5 * (H + H.conj().T)


def inertia(H, tol: float = DEFAULT_TOL) -> HermitianInertia:
    """Counts of negative, zero and positive eigenvalues of ``H``."""
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    H = check_hermitian(H)
    if H.shape[0] == 0:
        return HermitianInertia(0, 0, 0, tol, tol, ())
    eig = np.linalg.eigvalsh(H)
    band = tol * max(1.0, float(np.max(np.abs(eig))))
    n_neg = int(np.sum(eig < -band))
    n_pos = int(np.sum(eig > band))
    return HermitianInertia(n_neg, len(eig) - n_neg - n_pos, n_pos, tol, band,
                            tuple(float(x) for x in eig))


@dataclass(frozen=True)
class Subspace:
    """Complex subspace of C^N given by an orthonormal basis (columns)."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=complex).reshape(self.ambient_dim, -1)
        gram = B.conj().T @ B
        if B.shape[1] and np.max(np.abs(gram - np.eye(B.shape[1]))) > 1e-10:
            raise ValueError("basis columns are not orthonormal")
        object.__setattr__(self, "basis", B)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def full(cls, N: int) -> "Subspace":
        return cls(N, np.eye(N, dtype=complex))

    @classmethod
    def zero(cls, N: int) -> "Subspace":
        return cls(N, np.zeros((N, 0), dtype=complex))

    @classmethod
    def span(cls, vectors, tol: float = 1e-12) -> "Subspace":
        """Orthonormalised span of the given column vectors."""
        V = np.atleast_2d(np.asarray(vectors, dtype=complex))
        if V.shape[1] == 0:
            return cls.zero(V.shape[0])
        U, s, _ = np.linalg.svd(V, full_matrices=False)
        rank = int(np.sum(s > tol * max(1.0, s[0])))
        return cls(V.shape[0], U[:, :rank])

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def contains(self, X, tol: float = 1e-9) -> bool:
        X = np.asarray(X, dtype=complex).ravel()
        residual = X - self.projector() @ X
        return bool(np.linalg.norm(residual) <= tol * (1.0 + np.linalg.norm(X)))

    def orthogonal_complement_in(self, other: "Subspace") -> "Subspace":
        """Orthogonal complement of ``self`` inside ``other``."""
        if other.dim == 0:
            return Subspace.zero(self.ambient_dim)
        M = other.basis - self.projector() @ other.basis
        return Subspace.span(M, tol=1e-9)


def joint_kernel(M: np.ndarray, cutoff: float):
    """Orthonormal basis of ``{X : M X = 0}`` with absolute singular-value cutoff."""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    N = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(N, dtype=complex), np.zeros(0)
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(s > cutoff))
    return Vh[rank:].conj().T, s


def holomorphic_tangent(grads, tol: float = DEFAULT_TOL) -> Subspace:
    """Joint kernel of the rows ``∂φ_j(p)`` (pairing ``Σ_k ∂φ_j/∂z_k X_k``).

    Raises :class:`DegenerateGradientError` when some ``‖∂φ_j(p)‖ <= tol``.
    """
    G = np.atleast_2d(np.asarray(grads, dtype=complex))
    for j, row in enumerate(G):
        norm = float(np.linalg.norm(row))
        if not math.isfinite(norm) or norm <= tol:
            raise DegenerateGradientError(
                f"gradient of defining function {j + 1} vanishes (norm {norm:.3g})")
    smax = float(np.linalg.norm(G, 2))
    basis, _ = joint_kernel(G, tol * smax)
    return Subspace(G.shape[1], basis)


def restrict_form(H, S: Subspace) -> np.ndarray:
    """``B^H H B`` for the orthonormal basis ``B`` of ``S``."""
    H = np.asarray(H, dtype=complex)
    if H.shape != (S.ambient_dim, S.ambient_dim):
        raise ValueError("matrix and subspace dimensions differ")
    B = S.basis
    R = B.conj().T @ H @ B
    return 0.5 * (R + R.conj().T)


def restricted_levi(levi, S: Subspace) -> np.ndarray:
    """Matrix of the Levi form ``X ↦ Σ L_kl X_k conj(X_l)`` on ``S``."""
    return restrict_form(np.asarray(levi).T, S)


def levi_form_value(levi, X, Y=None) -> complex:
    """``Σ L_kl X_k conj(Y_l)``."""
    X = np.asarray(X, dtype=complex).ravel()
    Y = X if Y is None else np.asarray(Y, dtype=complex).ravel()
    return complex(X @ np.asarray(levi) @ Y.conj())


def levi_null_space(grads, levis, H: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
    """Vectors of ``H`` that every Levi form ``L_j`` annihilates against ``H``.

    The stacked restricted matrices are handled by a single SVD.
    """
    if H.dim == 0:
        return Subspace.zero(H.ambient_dim)
    G = np.atleast_2d(np.asarray(grads, dtype=complex))
    if G.size:
        leak = float(np.max(np.abs(G @ H.basis), initial=0.0))
        if leak > 1e-6 * (1.0 + float(np.max(np.abs(G)))):
            raise PreconditionError("subspace is not contained in the holomorphic tangent space")
    blocks = [restricted_levi(L, H) for L in levis]
    if not blocks:
        return H
    scale = max([1.0] + [float(np.max(np.abs(L))) for L in levis])
    coeffs, _ = joint_kernel(np.vstack(blocks), tol * scale)
    if coeffs.shape[1] == 0:
        return Subspace.zero(H.ambient_dim)
    return Subspace.span(H.basis @ coeffs)


@dataclass(frozen=True)
class PshVerdict:
    """Tri-state outcome of a (strict) q-psh test.

    ``margin`` is the distance of the deciding eigenvalue from the edge of
    the tolerance band (``None`` when no eigenvalue decides, e.g. q ≥ N).
    """

    verdict: str
    inertia: HermitianInertia | None
    margin: float | None
    notes: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "inertia": None if self.inertia is None else self.inertia.to_dict(),
            "margin": self.margin,
            "notes": list(self.notes),
        }


def verdict_from_matrix(H, q: int, strict: bool = False, tol: float = DEFAULT_TOL,
                        error_bound: float = 0.0, notes=()) -> PshVerdict:
    """Judge "at most q negative (strict: non-positive) eigenvalues".

    ``error_bound`` is an estimate of the absolute eigenvalue error of an
    approximate matrix; it widens the band so that unresolved cases come
    out ``inconclusive``.  For exact matrices band eigenvalues count as zero.
    """
    if q < 0:
        raise ValueError("q must be non-negative")
    inert = inertia(H, tol)
    eig = inert.eigenvalues
    if q >= len(eig):
        return PshVerdict(YES, inert, None, tuple(notes) + ("q >= dimension",))
    lam = eig[q]
    band = inert.band
    e = float(error_bound)
    if strict:
        if lam - e > band:
            return PshVerdict(YES, inert, lam - e - band, tuple(notes))
        if lam + e <= band:
            return PshVerdict(NO, inert, band - lam - e, tuple(notes))
    else:
        if lam - e >= -band:
            return PshVerdict(YES, inert, lam - e + band, tuple(notes))
        if lam + e < -band:
            return PshVerdict(NO, inert, -band - lam - e, tuple(notes))
    return PshVerdict(INCONCLUSIVE, inert, -abs(lam) + e, tuple(notes) + (
        "deciding eigenvalue within the error-widened tolerance band",))


def _assert_monotone(H, q, strict, tol, error_bound, verdict):
    # every q-psh function is (q+1)-psh
    if verdict.verdict == YES:
        nxt = verdict_from_matrix(H, q + 1, strict, tol, error_bound)
        assert nxt.verdict == YES, "monotonicity in q violated"


def classify_matrix(H, q: int, strict: bool = False, tol: float = DEFAULT_TOL,
                    error_bound: float = 0.0, notes=()) -> PshVerdict:
    v = verdict_from_matrix(H, q, strict, tol, error_bound, notes)
    _assert_monotone(H, q, strict, tol, error_bound, v)
    return v


def classify_qpsh(e: Expr, p, q: int, strict: bool = False, tol: float = DEFAULT_TOL,
                  *, jet: Jet2 | None = None) -> PshVerdict:
    """Pointwise (strict) q-plurisubharmonicity of a C² real function.

    Uses the Levi-matrix eigenvalue criterion.  Non-smooth expressions
    and non-finite jets are ``inconclusive``.
    """
    if q < 0:
        raise ValueError("q must be non-negative")
    p = as_point(p)
    if not is_smooth(e):
        if q >= p.dim:
            return PshVerdict(YES, None, None, ("q >= dimension",))
        return PshVerdict(INCONCLUSIVE, None, None, ("non-smooth expression (max)",))
    if jet is None:
        jet = jet2(e, p, real=True)
    if not np.all(np.isfinite(jet.levi)):
        return PshVerdict(INCONCLUSIVE, None, None, ("Levi matrix not finite",))
    return classify_matrix(jet.levi, q, strict, tol)
