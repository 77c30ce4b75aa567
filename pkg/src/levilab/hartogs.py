"""Hartogs figures, analytic disc families and continuity-principle sweeps.

Also houses the explicit constructions used around the duality between
strictly q-pseudoconvex sets and their complements: the affine disc
family through a touching point, the u_k approximants of ``-log|w|_∞``,
the ``ψ₀ − ε|z − z₀|²`` strictification and the merged defining function
``φ₁ + μ Σ φ_j²``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .calculus import d_z, d_zbar, jet2
from .domains import SublevelDomain, point_json, to_complex, to_real
from .errors import PreconditionError
from .expr import (
    Binary,
    Const,
    Expr,
    Max,
    Unary,
    Var,
    as_point,
    const,
    evaluate_batch,
    evaluate_many,
)
from .levi import (
    DEFAULT_TOL,
    YES,
    Subspace,
    classify_qpsh,
    holomorphic_tangent,
    levi_form_value,
    restricted_levi,
)

IN_H = "in_H"
IN_P_ONLY = "in_P_only"
OUTSIDE = "outside"

VIOLATION = "VIOLATION"
NO_VIOLATION = "NO_VIOLATION"
HYPOTHESIS_FAILURE = "HYPOTHESIS_FAILURE"


# ---------------------------------------------------------------------------
# Hartogs figures


@dataclass(frozen=True)
class HartogsFigure:
    """Euclidean (n−q, q) Hartogs figure inside the unit polydisc.

    ``H = (Δ^{n−q}_1 × Δ^q_r) ∪ (A^{n−q}_{R,1} × Δ^q_1)`` where
    ``A_{R,1} = Δ_1 \\ closure(Δ_R)`` (sup norm throughout).
    """

    n: int
    q: int
    r: float
    R: float

    def __post_init__(self):
        if not 1 <= self.q <= self.n - 1:
            raise ValueError("need 1 <= q <= n - 1")
        if not (0 < self.r < 1 and 0 < self.R < 1):
            raise ValueError("r and R must lie in (0, 1)")

    def membership(self, z) -> str:
        z = as_point(z).array
        if z.size != self.n:
            raise ValueError("point dimension differs from n")
        a = np.abs(z)
        zp, w = a[: self.n - self.q], a[self.n - self.q:]
        zp_sup, w_sup = float(np.max(zp)), float(np.max(w))
        if zp_sup < 1 and w_sup < self.r:
            return IN_H
        if self.R < zp_sup < 1 and w_sup < 1:
            return IN_H
        if zp_sup < 1 and w_sup < 1:
            return IN_P_ONLY
        return OUTSIDE


def hartogs_membership(F: HartogsFigure, z) -> str:
    return F.membership(z)


# ---------------------------------------------------------------------------
# analytic families


@dataclass
class AnalyticFamily:
    """Family ``A_t = {map(t, s) : s in the closed parameter domain}``.

    ``map(t, S)`` takes a real ``t`` in [0, 1] and an (M, m) complex array
    of parameters and returns (M, N) points.  The parameter domain is the
    closed ball or polydisc of radius ``param_radius`` in C^m.
    """

    N: int
    m: int
    map: Callable
    param_radius: float = 1.0
    param_kind: str = "ball"
    name: str = ""
    exprs: tuple | None = None

    def __post_init__(self):
        if self.param_kind not in ("ball", "polydisc"):
            raise ValueError("param_kind must be 'ball' or 'polydisc'")

    @classmethod
    def from_exprs(cls, exprs: Sequence[Expr], m: int, param_radius: float = 1.0,
                   param_kind: str = "ball", name: str = "") -> "AnalyticFamily":
        """Family whose components are expressions in ``z1 = t`` and ``z2.. = s``."""
        exprs = tuple(exprs)

        def fmap(t, S):
            S = np.atleast_2d(np.asarray(S, dtype=complex)).reshape(-1, m)
            Z = np.concatenate([np.full((S.shape[0], 1), complex(t)), S], axis=1)
            return evaluate_many(exprs, Z).T

        return cls(len(exprs), m, fmap, param_radius, param_kind, name, exprs)

    def points(self, t: float, S) -> np.ndarray:
        S = np.asarray(S, dtype=complex).reshape(-1, self.m)
        return np.asarray(self.map(float(t), S), dtype=complex).reshape(S.shape[0], self.N)

    def clip(self, S) -> np.ndarray:
        """Project parameters into the closed parameter domain."""
        S = np.asarray(S, dtype=complex).reshape(-1, self.m)
        R = self.param_radius
        if self.param_kind == "ball":
            n = np.linalg.norm(S, axis=1, keepdims=True)
            return np.where(n > R, S * (R / np.maximum(n, 1e-300)), S)
        a = np.abs(S)
        return np.where(a > R, S * (R / np.maximum(a, 1e-300)), S)

    def param_grid(self, n_radial: int = 16, n_angle: int = 64, seed: int = 0):
        """``(interior, boundary)`` parameter samples; the centre is always included."""
        m, R = self.m, self.param_radius
        if m == 0:
            return np.zeros((1, 0), dtype=complex), np.zeros((0, 0), dtype=complex)
        if m == 1:
            radii = R * np.arange(1, n_radial + 1) / n_radial
            ang = np.exp(2j * np.pi * np.arange(n_angle) / n_angle)
            inner = np.concatenate([[0j], (radii[:-1, None] * ang[None, :]).ravel()])
            return inner[:, None], (R * ang)[:, None]
        rng = np.random.default_rng(seed)
        k = n_radial * n_angle
        G = rng.standard_normal((k, m)) + 1j * rng.standard_normal((k, m))
        if self.param_kind == "ball":
            G /= np.linalg.norm(G, axis=1, keepdims=True)
            inner = G * (R * rng.uniform(size=(k, 1)) ** (1 / (2 * m)))
            B = rng.standard_normal((4 * n_angle, m)) + 1j * rng.standard_normal((4 * n_angle, m))
            bnd = R * B / np.linalg.norm(B, axis=1, keepdims=True)
        else:
            inner = R * np.sqrt(rng.uniform(size=(k, m))) * np.exp(2j * np.pi * rng.uniform(size=(k, m)))
            bnd = R * np.sqrt(rng.uniform(size=(4 * n_angle, m))) * np.exp(
                2j * np.pi * rng.uniform(size=(4 * n_angle, m)))
            j = rng.integers(0, m, size=4 * n_angle)
            bnd[np.arange(4 * n_angle), j] = R * np.exp(2j * np.pi * rng.uniform(size=4 * n_angle))
        return np.vstack([np.zeros((1, m)), inner]), bnd

    def cr_residual(self, t: float, S, h: float = 1e-3) -> float:
        """Max ``|∂A_t/∂s̄_j|`` over the samples.

        Symbolic when the family is given by expressions, otherwise a
        fourth-order central difference with step ``h``.
        """
        S = np.asarray(S, dtype=complex).reshape(-1, self.m)
        if self.m == 0 or S.shape[0] == 0:
            return 0.0
        if self.exprs is not None:
            ders = [d_zbar(e, j + 2) for e in self.exprs for j in range(self.m)]
            Z = np.concatenate([np.full((S.shape[0], 1), complex(t)), S], axis=1)
            return float(np.max(np.abs(evaluate_many(ders, Z))))
        worst = 0.0
        for j in range(self.m):
            E = np.zeros(self.m, dtype=complex)
            E[j] = 1.0

            def deriv(direction):
                f = lambda k: self.points(t, S + k * h * direction * E)  # noqa: E731
                return (-f(2) + 8 * f(1) - 8 * f(-1) + f(-2)) / (12 * h)

            dbar = 0.5 * (deriv(1.0) + 1j * deriv(1j))
            worst = max(worst, float(np.max(np.abs(dbar))))
        return worst

    def t_continuity(self, ts, S) -> float:
        """Largest sup-distance between consecutive members on the sample grid."""
        pts = [self.points(t, S) for t in ts]
        return max((float(np.max(np.abs(b - a))) for a, b in zip(pts, pts[1:])), default=0.0)


def _depth_fn(domain) -> Callable:
    if isinstance(domain, SublevelDomain):
        return domain.rho_values
    return lambda Z: np.asarray(domain(np.atleast_2d(Z)), dtype=float)


@dataclass
class SweepReport:
    verdict: str
    margin: float
    touching_point: list | None
    touching_param: list | None
    min_clearance: float
    boundary_clearance: float
    cr_residual: float
    t_jump: float
    grid: dict
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def kontinuitaetssatz_sweep(domain, fam: AnalyticFamily, t_steps: int = 64,
                            n_radial: int = 16, n_angle: int = 64, *,
                            touch_tol: float = 1e-9, seed: int = 0) -> SweepReport:
    """Continuity-principle test of ``Ω = {depth < 0}`` against a disc family.

    ``domain`` is a :class:`SublevelDomain` or a callable returning the
    depth function at the rows of an array.  The hypotheses (``A_t ⊂ Ω``
    for sampled t < 1 and ``∂A_1 ⊂ Ω``) are checked first; a failure gives
    ``HYPOTHESIS_FAILURE``.  Otherwise the maximum of the depth over
    ``A_1`` is refined by a Nelder–Mead search in the parameter; a value
    ``>= -touch_tol`` gives ``VIOLATION`` with the touching point.
    ``margin`` is that maximum.
    """
    depth = _depth_fn(domain)
    inner, bnd = fam.param_grid(n_radial, n_angle, seed)
    S_all = np.vstack([inner, bnd]) if bnd.size else inner
    ts = np.linspace(0.0, 1.0, t_steps + 1)
    grid = {"t_steps": t_steps, "n_radial": n_radial, "n_angle": n_angle}
    cr = fam.cr_residual(0.5, S_all[: min(len(S_all), 64)])
    jump = fam.t_continuity(ts, S_all)
    notes = []
    if cr > 1e-8:
        notes.append(f"family is not holomorphic in s (CR residual {cr:.3g})")
    clearance = -np.inf
    for t in ts[:-1]:
        vals = depth(fam.points(t, S_all))
        worst = float(np.max(np.where(np.isfinite(vals), vals, np.inf)))
        clearance = max(clearance, worst)
        if not worst < 0:
            worst += 0.0
            notes.append(f"A_t leaves the domain at t = {t:.6g} (depth {worst:.3g})")
            return SweepReport(HYPOTHESIS_FAILURE, worst, None, None, clearance, float("nan"),
                               cr, jump, grid, notes)
    bclear = -np.inf
    if bnd.size:
        vals = depth(fam.points(1.0, bnd))
        bclear = float(np.max(np.where(np.isfinite(vals), vals, np.inf)))
        if not bclear < 0:
            notes.append(f"boundary of A_1 leaves the domain (depth {bclear:.3g})")
            return SweepReport(HYPOTHESIS_FAILURE, bclear, None, None, clearance, bclear,
                               cr, jump, grid, notes)
    if cr > 1e-8:
        return SweepReport(HYPOTHESIS_FAILURE, float("nan"), None, None, clearance, bclear,
                           cr, jump, grid, notes)
    vals = depth(fam.points(1.0, S_all))
    vals = np.where(np.isfinite(vals), vals, np.inf)
    k = int(np.argmax(vals))
    s_best, v_best = S_all[k], float(vals[k])
    if fam.m > 0 and np.isfinite(v_best):
        def neg_depth(x):
            s = fam.clip(to_complex(x)[None, :])
            v = depth(fam.points(1.0, s))[0]
            return -v if np.isfinite(v) else np.inf

        res = minimize(neg_depth, to_real(s_best), method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-16, "maxiter": 4000})
        if np.isfinite(res.fun) and -res.fun > v_best:
            s_best = fam.clip(to_complex(res.x)[None, :])[0]
            v_best = -float(res.fun)
    v_best += 0.0  # normalise a negative zero
    touch = fam.points(1.0, s_best[None, :])[0]
    verdict = VIOLATION if v_best >= -touch_tol else NO_VIOLATION
    return SweepReport(verdict, v_best, point_json(touch), point_json(s_best), clearance,
                       bclear, cr, jump, grid, notes)


# ---------------------------------------------------------------------------
# explicit families


def _check_biholomorphism(coords, N: int, samples: np.ndarray):
    """Coordinate change given by N expressions: holomorphic with invertible Jacobian."""
    if len(coords) != N:
        raise ValueError("coordinate change needs one expression per coordinate")
    jac = [d_z(c, j) for c in coords for j in range(1, N + 1)]
    anti = [d_zbar(c, j) for c in coords for j in range(1, N + 1)]
    J = evaluate_many(jac, samples).T.reshape(-1, N, N)
    A = evaluate_many(anti, samples)
    if np.max(np.abs(A)) > 1e-10:
        raise ValueError("coordinate change is not holomorphic")
    if np.min(np.abs(np.linalg.det(J))) < 1e-12:
        raise ValueError("coordinate change has a singular Jacobian at a sample")


def build_thm41_family(eps: float, r: float, n: int, q: int, coords=None) -> AnalyticFamily:
    """``A_t = {(1−t)ε} × B^{n−q−1}_r(0) × {0}^q`` in ``C^n``.

    ``coords`` optionally composes the family with a holomorphic change of
    coordinates given by ``n`` expressions in ``z1..zn``.
    """
    if eps <= 0 or r <= 0:
        raise ValueError("eps and r must be positive")
    if not 0 <= q <= n - 1:
        raise ValueError("need 0 <= q <= n - 1")
    m = n - q - 1

    def base(t, S):
        M = S.shape[0]
        Z = np.zeros((M, n), dtype=complex)
        Z[:, 0] = (1.0 - t) * eps
        Z[:, 1:1 + m] = S
        return Z

    fmap = base
    if coords is not None:
        coords = tuple(coords)
        probe = base(0.0, np.zeros((1, m))) if m else base(0.0, np.zeros((1, 0)))
        _check_biholomorphism(coords, n, np.vstack([probe, base(1.0, np.zeros((1, m)))]))

        def fmap(t, S):
            return evaluate_many(coords, base(t, S)).T

    return AnalyticFamily(n, m, fmap, r, "ball", f"thm41(eps={eps}, r={r}, n={n}, q={q})")


def thm41_model_domain(n: int, q: int) -> SublevelDomain:
    """``{Re z1 + |z1|² + ‖z'‖² − ‖z''‖² < 0}``, strictly q-pseudoconvex at 0.

    ``z'`` are the coordinates 2..n−q and ``z''`` the last q.  Its Levi
    form on the tangent space at 0 has exactly q negative eigenvalues.
    """
    e = Binary("+", Unary("re", Var(1)), Unary("abs2", Var(1)))
    for j in range(2, n + 1):
        t = Unary("abs2", Var(j))
        e = Binary("+", e, t) if j <= n - q else Binary("-", e, t)
    return SublevelDomain(e, n, half_width=2.0, name=f"thm41_model(n={n}, q={q})")


def complement(D: SublevelDomain) -> SublevelDomain:
    """``{−ρ < 0}``, the exterior of the closure of ``{ρ < 0}``."""
    return SublevelDomain(Unary("neg", D.rho), D.dim, D.center, D.half_width,
                          D.boundary_tol, f"complement({D.name})")


def real_plane_depth() -> SublevelDomain:
    """``C² \\ R²`` as ``{−(Im z1)² − (Im z2)² < 0}``."""
    rho = Unary("neg", Binary("+", Binary("^", Unary("im", Var(1)), Const(2)),
                              Binary("^", Unary("im", Var(2)), Const(2))))
    return SublevelDomain(rho, 2, name="C2 minus R2")


def r2_touching_family(scale: float = 1.0, conj_graph: bool = False) -> AnalyticFamily:
    """Discs ``ζ ↦ scale·(ζ, i(1−t) + iζ²)``, ``|ζ| <= 1``.

    They avoid ``R²`` for t < 1 and touch it only at the origin for t = 1.
    With ``conj_graph`` they are mapped into the coordinates in which
    ``R²`` becomes the graph ``{w = conj(z)}``: ``z = Z1 + i Z2``,
    ``w = Z1 − i Z2``.
    """

    def fmap(t, S):
        s = S[:, 0]
        Z = scale * np.stack([s, 1j * (1.0 - t) + 1j * s ** 2], axis=1)
        if conj_graph:
            Z = np.stack([Z[:, 0] + 1j * Z[:, 1], Z[:, 0] - 1j * Z[:, 1]], axis=1)
        return Z

    name = "r2_touching" + ("(conj graph)" if conj_graph else "") + f"(scale={scale})"
    return AnalyticFamily(2, 1, fmap, 1.0, "ball", name)


def conj_graph_depth() -> SublevelDomain:
    """``C² \\ {w = conj(z)}`` with depth ``−|w − conj(z)|²``."""
    rho = Unary("neg", Unary("abs2", Binary("-", Var(2), Unary("conj", Var(1)))))
    return SublevelDomain(rho, 2, name="C2 minus graph(conj z)")


# ---------------------------------------------------------------------------
# u_k approximants


def build_uk(k: int, q: int) -> Expr:
    """``u_k(w) = −(1/k) log|(w_1^k, …, w_q^k)| + |w|²/k`` over ``C^q``."""
    if k < 1 or q < 1:
        raise ValueError("need k >= 1 and q >= 1")
    s = None
    n2 = None
    for j in range(1, q + 1):
        wk = Var(j) if k == 1 else Binary("^", Var(j), Const(k))
        t = Unary("abs2", wk)
        s = t if s is None else Binary("+", s, t)
        a = Unary("abs2", Var(j))
        n2 = a if n2 is None else Binary("+", n2, a)
    log_part = Binary("*", Const(Fraction(-1, 2 * k)), Unary("log", s))
    return Binary("+", log_part, Binary("*", Const(Fraction(1, k)), n2))


def build_u_sup(q: int) -> Expr:
    """``u(w) = −log|w|_∞``."""
    return Unary("neg", Unary("log", Max([Unary("abs", Var(j)) for j in range(1, q + 1)])))


def sup_annulus_samples(q: int, n: int, seed: int = 0, lo: float = 0.2,
                        hi: float = 0.9) -> np.ndarray:
    """Uniform samples of ``{lo <= |w|_∞ <= hi}`` in ``C^q``."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        W = hi * np.sqrt(rng.uniform(size=(2 * n, q))) * np.exp(2j * np.pi * rng.uniform(size=(2 * n, q)))
        keep = np.max(np.abs(W), axis=1) >= lo
        out.extend(W[keep])
    return np.array(out[:n])


def uk_study(ks=(2, 4, 8, 16, 32), q: int = 2, n_samples: int = 500, n_psh: int = 100,
             seed: int = 0, tol: float = DEFAULT_TOL) -> dict:
    """Sup distance of ``u_k`` to ``u = −log|w|_∞`` and strict (q−1)-psh checks.

    The same samples are used for every k.  ``fitted_C`` is ``max_k k·sup_k``.
    """
    W = sup_annulus_samples(q, n_samples, seed)
    u = evaluate_batch(build_u_sup(q), W).real
    rows = []
    for k in ks:
        uk = build_uk(k, q)
        diff = float(np.max(np.abs(evaluate_batch(uk, W).real - u)))
        verdicts = [classify_qpsh(uk, w, q - 1, strict=True, tol=tol).verdict
                    for w in W[:n_psh]]
        rows.append({"k": k, "sup_distance": diff, "k_times_sup": k * diff,
                     "strict_psh_yes": sum(v == YES for v in verdicts),
                     "n_psh_samples": len(verdicts)})
    sups = [r["sup_distance"] for r in rows]
    return {
        "q": q,
        "rows": rows,
        "strictly_decreasing": all(b < a for a, b in zip(sups, sups[1:])),
        "fitted_C": max(r["k_times_sup"] for r in rows),
        "n_samples": len(W),
    }


def uk_level_cut(k: int, q: int, c: float) -> SublevelDomain:
    """``D_c(u_k) = {u_k < c}`` as a sublevel domain in ``C^q``."""
    rho = Binary("-", build_uk(k, q), const(c))
    return SublevelDomain(rho, q, name=f"D_{c}(u_{k})")


# ---------------------------------------------------------------------------
# strictification


def _sum_abs2_shift(z0) -> Expr:
    z0 = as_point(z0)
    e = None
    for j, c in enumerate(z0.coords, start=1):
        d = Var(j) if c == 0 else Binary("-", Var(j), const(c))
        t = Unary("abs2", d)
        e = t if e is None else Binary("+", e, t)
    return e


def strictify(psi0: Expr, z0, eps: float) -> Expr:
    """``φ = ψ₀ − ε|z − z₀|²``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return Binary("-", psi0, Binary("*", const(eps), _sum_abs2_shift(z0)))


def max_strictify_eps(psi0: Expr, z0, q: int, samples, eps_max: float,
                      tol: float = DEFAULT_TOL, iters: int = 40) -> float:
    """Largest ``ε <= eps_max`` (bisection) keeping strict q-psh at every sample.

    Returns 0.0 when even tiny ε fail (or ψ₀ itself is not strict q-psh).
    """
    S = np.atleast_2d(np.asarray(samples, dtype=complex))

    def ok(eps):
        phi = strictify(psi0, z0, eps)
        return all(classify_qpsh(phi, s, q, True, tol).verdict == YES for s in S)

    if ok(eps_max):
        return float(eps_max)
    lo, hi = 0.0, float(eps_max)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


# ---------------------------------------------------------------------------
# merged defining function


def merge_defining(phi1: Expr, phis: Sequence[Expr], mu: float) -> Expr:
    """``φ = φ₁ + μ Σ φ_j²``."""
    s = None
    for p in phis:
        t = Binary("^", p, Const(2))
        s = t if s is None else Binary("+", s, t)
    if s is None:
        return phi1
    return Binary("+", phi1, Binary("*", const(mu), s))


@dataclass
class IdentityResidual:
    residual: float
    lhs: float
    rhs: float
    R: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def verify_levi_identity(phi1: Expr, phis: Sequence[Expr], mu: float, p, X,
                         H: Subspace | None = None, on_tol: float = 1e-9) -> IdentityResidual:
    """Residual of ``L_φ(X,X) = L_φ₁(X,X) + 2μ Σ |(∂φ_j(p), X)|²`` at ``p``.

    ``p`` must lie on ``{φ_j = 0}`` and ``X`` in ``H`` (default: the
    holomorphic tangent space of ``{φ_j = 0}`` at ``p``).  Both sides are
    built from symbolic jets.
    """
    p = as_point(p)
    X = np.asarray(X, dtype=complex).ravel()
    jets = [jet2(f, p, real=True) for f in phis]
    for j, jt in enumerate(jets, start=1):
        if abs(jt.value) > on_tol:
            raise PreconditionError(f"point is not on the manifold (phi_{j} = {abs(jt.value):.3g})")
    if H is None:
        H = holomorphic_tangent([jt.grad_z for jt in jets]) if jets else Subspace.full(p.dim)
    if not H.contains(X, on_tol):
        raise PreconditionError("vector is not in the given tangent space")
    phi = merge_defining(phi1, phis, mu)
    lhs = levi_form_value(jet2(phi, p, real=True).levi, X).real
    l1 = levi_form_value(jet2(phi1, p, real=True).levi, X).real
    R = float(sum(abs(np.dot(jt.grad_z, X)) ** 2 for jt in jets))
    rhs = l1 + 2 * mu * R
    return IdentityResidual(abs(lhs - rhs), lhs, rhs, R)


# ---------------------------------------------------------------------------
# family from a foliation-certificate witness


@dataclass
class WitnessFamily:
    family: AnalyticFamily
    phi: Expr
    mu: float
    E: Subspace
    depth: SublevelDomain
    notes: list = field(default_factory=list)


def family_from_witness(phis: Sequence[Expr], p, X0, j0: int, *, radius: float = 0.05,
                        eps: float | None = None, mu_max: float = 1e6,
                        tol: float = DEFAULT_TOL) -> WitnessFamily:
    """Disc family touching ``Γ = {φ_j = 0}`` at ``p`` from a Levi witness.

    ``X0`` is tangent with ``L_{φ_{j0}}(X0, X0) ≠ 0``.  After fixing the
    sign, ``φ = φ₁ + μ Σ φ_j²`` has a positive definite Levi form on
    ``E = span(X0) ⊕ (H_pS ⊖ H_pΓ)`` for large ``μ``; the discs
    ``s ↦ p + B s + c(s) ν + (1−t) ε ν`` (``B`` a basis of ``E``, ``ν``
    the unit normal of ``S = {φ = 0}`` and ``c`` the holomorphic quadratic
    correction) stay in ``{φ > 0}`` for t < 1 and touch ``Γ`` only at ``p``.
    """
    p = as_point(p)
    N = p.dim
    X0 = np.asarray(X0, dtype=complex).ravel()
    phis = list(phis)
    jets = [jet2(f, p, real=True) for f in phis]
    HG = holomorphic_tangent([jt.grad_z for jt in jets], tol)
    if not HG.contains(X0, 1e-8):
        raise PreconditionError("witness vector is not tangent")
    val = levi_form_value(jets[j0].levi, X0).real
    if abs(val) <= tol:
        raise PreconditionError("witness vector has vanishing Levi form")
    phi1 = phis[j0] if val > 0 else Unary("neg", phis[j0])
    notes = [] if val > 0 else [f"sign of phi_{j0 + 1} flipped"]
    g1 = jet2(phi1, p, real=True).grad_z
    HS = holomorphic_tangent([g1], tol)
    E = Subspace.span(np.column_stack([X0, HG.orthogonal_complement_in(HS).basis]))
    mu = 0.0
    while True:
        phi = merge_defining(phi1, phis, mu)
        jp = jet2(phi, p, real=True, with_hol_hessian=True)
        eig = np.linalg.eigvalsh(restricted_levi(jp.levi, E))
        if eig[0] > tol * max(1.0, float(np.max(np.abs(eig)))):
            break
        mu = 1.0 if mu == 0 else 2 * mu
        if mu > mu_max:
            raise PreconditionError("no mu makes the Levi form positive on E")
    notes.append(f"mu = {mu}")
    lam_min = float(eig[0])
    gz = jp.grad_z
    nu = np.conj(gz) / np.linalg.norm(gz)  # direction of steepest increase of phi
    a = complex(gz @ nu)
    A = jp.hol_hessian
    Bm = E.basis
    if eps is None:
        eps = 0.1 * lam_min * radius ** 2 / max(abs(a), 1e-300)
    z0 = p.array

    def fmap(t, S):
        X = S @ Bm.T
        c = -np.einsum("mi,ij,mj->m", X, A, X) / (2 * a)
        return z0[None, :] + X + (c + (1.0 - t) * eps)[:, None] * nu[None, :]

    fam = AnalyticFamily(N, E.dim, fmap, radius, "ball", "witness_family")
    depth_rho = None
    for f in phis:
        t = Binary("^", f, Const(2))
        depth_rho = t if depth_rho is None else Binary("+", depth_rho, t)
    depth = SublevelDomain(Unary("neg", depth_rho), N, name="graph complement")
    return WitnessFamily(fam, phi, mu, E, depth, notes)
