"""Sublevel domains, boundary distances and pseudoconvexity probes.

A domain is ``{ρ < 0}`` for a real expression ``ρ``.  The module offers
pointwise Levi tests at boundary points, the ``-log d`` criterion with
finite-difference Levi matrices, relative probes near boundary points and
a Monte-Carlo local-maximum test.  Probes can refute pseudoconvexity; a
clean run only says that no violation was found at the sampled points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize

from .calculus import fd_jet, jet2, jet_program, real_derivatives_batch
from .errors import BoundaryNotFoundError, PreconditionError
from .expr import Binary, Const, Expr, Max, Unary, Var, as_point, evaluate_batch, is_smooth
from .levi import (
    DEFAULT_TOL,
    INCONCLUSIVE,
    NO,
    VERDICTS,
    YES,
    PshVerdict,
    classify_matrix,
    classify_qpsh,
    holomorphic_tangent,
    restricted_levi,
)
from .parallel import item_rng, pmap


def to_real(Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=complex)
    return np.concatenate([Z.real, Z.imag], axis=-1)


def to_complex(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    N = X.shape[-1] // 2
    return X[..., :N] + 1j * X[..., N:]


def point_json(z) -> list:
    """Complex coordinates as ``[[re, im], ...]``."""
    return [[float(c.real), float(c.imag)] for c in np.asarray(z, dtype=complex).ravel()]


# ---------------------------------------------------------------------------
# norms and domains


@dataclass(frozen=True)
class NormSpec:
    """Complex norm used for boundary distances.

    ``euclidean``: sqrt(Σ|z_j|²); ``sup``: max|z_j|;
    ``weighted``: sqrt(Σ w_j |z_j|²) with positive weights.
    """

    kind: str = "euclidean"
    weights: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("euclidean", "sup", "weighted"):
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.kind == "weighted":
            if not self.weights or any(w <= 0 for w in self.weights):
                raise ValueError("weighted norm needs positive weights")
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    @property
    def smooth(self) -> bool:
        return self.kind != "sup"

    def norm(self, V) -> np.ndarray:
        V = np.asarray(V, dtype=complex)
        a2 = V.real ** 2 + V.imag ** 2
        if self.kind == "euclidean":
            return np.sqrt(np.sum(a2, axis=-1))
        if self.kind == "sup":
            return np.sqrt(np.max(a2, axis=-1))
        w = np.asarray(self.weights)
        if w.size != V.shape[-1]:
            raise ValueError("weights do not match the dimension")
        return np.sqrt(np.sum(w * a2, axis=-1))

    def real_weights(self, N: int) -> np.ndarray:
        w = np.ones(N) if self.kind == "euclidean" else np.asarray(self.weights, dtype=float)
        return np.concatenate([w, w])

    def to_dict(self) -> dict:
        return {"kind": self.kind, "weights": None if self.weights is None else list(self.weights)}


EUCLIDEAN = NormSpec("euclidean")
SUP = NormSpec("sup")


@dataclass(frozen=True, eq=False)
class SublevelDomain:
    """``Ω = {z : ρ(z) < 0}`` inside the box ``center ± half_width``.

    The box bounds ray searches and random sampling.  ``|ρ| <= boundary_tol``
    is the numerical boundary shell.
    """

    rho: Expr
    dim: int
    center: tuple | None = None
    half_width: float = 2.0
    boundary_tol: float = 1e-9
    name: str = ""

    def __post_init__(self):
        if self.rho.max_var_index() > self.dim:
            raise ValueError("rho uses variables beyond the ambient dimension")
        c = (0j,) * self.dim if self.center is None else tuple(complex(x) for x in self.center)
        if len(c) != self.dim:
            raise ValueError("center has the wrong dimension")
        object.__setattr__(self, "center", c)

    @property
    def smooth(self) -> bool:
        return is_smooth(self.rho)

    def rho_values(self, Z) -> np.ndarray:
        """Real values of ρ at the rows of ``Z``; NaN where evaluation fails."""
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        return evaluate_batch(self.rho, Z, errors="nan").real

    def contains(self, z) -> bool:
        return bool(self.rho_values(as_point(z).array)[0] < 0)

    def to_dict(self) -> dict:
        from .expr import print_expr

        return {"rho": print_expr(self.rho), "dim": self.dim, "name": self.name}


def _sum_abs2(N, offset=0):
    e = None
    for j in range(1, N + 1):
        t = Unary("abs2", Var(j + offset))
        e = t if e is None else Binary("+", e, t)
    return e


def ball(N: int, radius=1, name: str = "ball") -> SublevelDomain:
    r2 = Fraction(radius) ** 2 if isinstance(radius, (int, Fraction)) else float(radius) ** 2
    return SublevelDomain(Binary("-", _sum_abs2(N), Const(r2)), N,
                          half_width=1.5 * float(radius), name=name)


def shell(N: int, inner=Fraction(3, 10), outer=1, name: str = "shell") -> SublevelDomain:
    """``{inner < |z| < outer}`` via the smooth ρ = (|z|²−outer²)(|z|²−inner²)."""
    s = _sum_abs2(N)
    rho = Binary("*", Binary("-", s, Const(Fraction(outer) ** 2)),
                 Binary("-", s, Const(Fraction(inner) ** 2)))
    return SublevelDomain(rho, N, half_width=1.5 * float(outer), name=name)


def polydisc(N: int, name: str = "polydisc") -> SublevelDomain:
    rho = Max([Binary("-", Unary("abs2", Var(j)), Const(1)) for j in range(1, N + 1)])
    return SublevelDomain(rho, N, half_width=1.5, name=name)


def quadric(signs, const=-1, half_width: float = 3.0, name: str = "quadric") -> SublevelDomain:
    """``{Σ s_j |z_j|² + const < 0}`` with signs ``s_j`` in {−1, +1}."""
    e = Const(const)
    for j, s in enumerate(signs, start=1):
        t = Unary("abs2", Var(j))
        e = Binary("+", e, t) if s > 0 else Binary("-", e, t)
    return SublevelDomain(e, len(signs), half_width=half_width, name=name)


def halfspace(N: int, name: str = "halfspace") -> SublevelDomain:
    """``{Re z_1 < 0}``; the search box is centred at ``-1``."""
    center = (-1.0,) + (0.0,) * (N - 1)
    return SublevelDomain(Unary("re", Var(1)), N, center=center, half_width=2.0, name=name)


# ---------------------------------------------------------------------------
# Levi test at boundary points


def levi_pcv_at_boundary(D: SublevelDomain, p, q: int, strict: bool = False,
                         tol: float = DEFAULT_TOL) -> PshVerdict:
    """Levi form of ρ on the holomorphic tangent space at a boundary point."""
    p = as_point(p)
    jet = jet2(D.rho, p, real=True)
    if abs(jet.value.real) > D.boundary_tol:
        raise PreconditionError(f"point is not on the boundary (rho = {jet.value.real:.3g})")
    T = holomorphic_tangent([jet.grad_z], tol)
    R = restricted_levi(jet.levi, T)
    return classify_matrix(R, q, strict, tol, notes=(f"tangent dimension {T.dim}",))


# ---------------------------------------------------------------------------
# rays and boundary distance


def _exit_times(D: SublevelDomain, z: np.ndarray, U: np.ndarray) -> np.ndarray:
    """Largest t with z + t u inside the search box, per direction (rows of U)."""
    zr = to_real(z)
    ur = to_real(U)
    cr = to_real(np.array(D.center))
    hi = cr + D.half_width - zr
    lo = cr - D.half_width - zr
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(ur > 0, hi / ur, np.where(ur < 0, lo / ur, np.inf))
    return np.maximum(np.min(t, axis=1), 0.0)


def ray_hits(D: SublevelDomain, z, U, max_length=None, n_scan: int = 128,
             n_bisect: int = 60):
    """First boundary crossing along each ray ``z + t u``.

    Returns ``(hit_mask, t, width)``: ``t`` is an outside point of the final
    bisection bracket and ``width`` its length.
    """
    z = np.asarray(z, dtype=complex).ravel()
    U = np.atleast_2d(np.asarray(U, dtype=complex))
    K = U.shape[0]
    t_end = _exit_times(D, z, U)
    if max_length is not None:
        t_end = np.minimum(t_end, max_length)
    frac = np.arange(1, n_scan + 1) / n_scan
    ts = t_end[:, None] * frac[None, :]
    P = z[None, None, :] + ts[..., None] * U[:, None, :]
    vals = D.rho_values(P.reshape(-1, z.size)).reshape(K, n_scan)
    outside = ~(vals < 0)
    hit = outside.any(axis=1) & (t_end > 0)
    first = np.argmax(outside, axis=1)
    rows = np.arange(K)
    hi = ts[rows, first]
    lo = np.where(first > 0, ts[rows, np.maximum(first - 1, 0)], 0.0)
    idx = np.flatnonzero(hit)
    lo, hi = lo[idx], hi[idx]
    Uh = U[idx]
    for _ in range(n_bisect):
        mid = 0.5 * (lo + hi)
        inside = D.rho_values(z[None, :] + mid[:, None] * Uh) < 0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    t = np.full(K, np.nan)
    width = np.full(K, np.nan)
    t[idx] = hi
    width[idx] = hi - lo
    return hit, t, width


def _kkt_polish(D: SublevelDomain, z_real: np.ndarray, x0: np.ndarray, W: np.ndarray,
                iters: int = 40):
    """Nearest-point conditions ``W(x − z) = λ∇ρ(x)``, ``ρ(x) = 0`` by Newton's method.

    ``z_real`` and ``x0`` are (M, 2N) real arrays.  Returns ``(x, converged)``.
    """
    N2 = x0.shape[1]
    N = N2 // 2
    prog = jet_program(D.rho, N, with_hol_hessian=True)
    x = np.array(x0, dtype=float)
    M = x.shape[0]
    eye = np.diag(W)

    def derivs(x):
        arr = prog.arrays(to_complex(x), errors="nan")
        g, H = real_derivatives_batch(arr)
        return arr["value"].real, g, H

    rho, g, H = derivs(x)
    gn2 = np.sum(g * g, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.sum(g * (W * (x - z_real)), axis=1) / gn2
    converged = np.zeros(M, dtype=bool)
    for _ in range(iters):
        F = np.concatenate([W * (x - z_real) - lam[:, None] * g, rho[:, None]], axis=1)
        J = np.zeros((M, N2 + 1, N2 + 1))
        J[:, :N2, :N2] = eye[None] - lam[:, None, None] * H
        J[:, :N2, N2] = -g
        J[:, N2, :N2] = g
        ok = np.all(np.isfinite(J), axis=(1, 2)) & np.all(np.isfinite(F), axis=1)
        step = np.zeros((M, N2 + 1))
        for m in np.flatnonzero(ok):
            try:
                step[m] = np.linalg.solve(J[m], -F[m])
            except np.linalg.LinAlgError:
                step[m] = np.linalg.lstsq(J[m], -F[m], rcond=None)[0]
        scale = 1.0 + np.linalg.norm(x - z_real, axis=1)
        sn = np.linalg.norm(step[:, :N2], axis=1)
        damp = np.minimum(1.0, 0.5 * scale / np.maximum(sn, 1e-300))
        x = x + damp[:, None] * step[:, :N2]
        lam = lam + damp * step[:, N2]
        rho, g, H = derivs(x)
        stat = np.linalg.norm(W * (x - z_real) - lam[:, None] * g, axis=1)
        gnorm = np.linalg.norm(g, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            feas = np.abs(rho) / gnorm
        converged = (stat <= 1e-12 * scale) & (feas <= 1e-13 * scale) & (sn <= 1e-10 * scale)
        if np.all(converged | ~ok):
            break
    converged &= np.all(np.isfinite(x), axis=1)
    return x, converged


@dataclass
class DistanceResult:
    """Boundary distance with an uncertainty estimate.

    ``uncertainty`` is the Newton residual scale when the nearest-point
    equations converged, otherwise the bisection bracket plus an angular
    sampling term.  ``ambiguous`` marks several distinct nearest points.
    """

    distance: float
    uncertainty: float
    foot: np.ndarray
    method: str
    n_hits: int
    ambiguous: bool = False

    def __float__(self):
        return float(self.distance)

    def to_dict(self) -> dict:
        return {
            "distance": self.distance,
            "uncertainty": self.uncertainty,
            "foot": point_json(self.foot),
            "method": self.method,
            "n_hits": self.n_hits,
            "ambiguous": self.ambiguous,
        }


def _ray_directions(N: int, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    G = rng.standard_normal((n_samples, N)) + 1j * rng.standard_normal((n_samples, N))
    G /= np.linalg.norm(G, axis=1, keepdims=True)
    axes = []
    for j in range(N):
        for c in (1, -1, 1j, -1j):
            v = np.zeros(N, dtype=complex)
            v[j] = c
            axes.append(v)
    return np.vstack([np.array(axes), G])


def _distinct_best(feet: np.ndarray, dist: np.ndarray, k: int, sep: float) -> list:
    order = np.argsort(dist)
    chosen = []
    for i in order:
        if all(np.linalg.norm(feet[i] - feet[j]) > sep for j in chosen):
            chosen.append(int(i))
        if len(chosen) == k:
            break
    return chosen


def boundary_distance(D: SublevelDomain, z, norm: NormSpec = EUCLIDEAN, n_samples: int = 64,
                      seed=0, *, polish: bool = True, max_length=None) -> DistanceResult:
    """Distance from an interior point to ``∂Ω`` in the given norm.

    Boundary points come from bisection along seeded random rays (plus the
    coordinate axes); the best ones are polished by Newton's method on the
    nearest-point equations (smooth ρ and Euclidean-type norms) or by a
    Nelder–Mead search over ray directions otherwise.  The result never
    exceeds the distance of any sampled boundary point.
    """
    z = as_point(z).array
    N = z.size
    if N != D.dim:
        raise ValueError("point dimension differs from the domain dimension")
    r0 = D.rho_values(z)[0]
    if not r0 < -D.boundary_tol:
        raise PreconditionError(f"point is not strictly inside the domain (rho = {r0:.3g})")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    U = _ray_directions(N, n_samples, rng)
    hit, t, width = ray_hits(D, z, U, max_length)
    if not hit.any():
        raise BoundaryNotFoundError("no ray reached the boundary inside the search box")
    Uh, th, wh = U[hit], t[hit], width[hit]
    feet = z[None, :] + th[:, None] * Uh
    dist = norm.norm(feet - z[None, :])
    best = int(np.argmin(dist))
    d_ray = float(dist[best])
    # angular sampling term: spacing of K directions on the unit sphere of R^{2N}
    ang = math.pi * len(U) ** (-1.0 / max(2 * N - 1, 1))
    result = DistanceResult(d_ray, float(wh[best]) + d_ray * (1 - math.cos(min(ang, math.pi / 2))),
                            feet[best], "rays", int(hit.sum()))
    if not polish:
        return result

    if D.smooth and norm.smooth:
        chosen = _distinct_best(feet, dist, 4, 0.1 * d_ray)
        W = norm.real_weights(N)
        zr = np.tile(to_real(z), (len(chosen), 1))
        x, conv = _kkt_polish(D, zr, to_real(feet[chosen]), W)
        if conv.any():
            cand = to_complex(x[conv])
            dc = norm.norm(cand - z[None, :])
            k = int(np.argmin(dc))
            if dc[k] <= d_ray + 1e-12 * (1 + d_ray):
                others = [(dc[i], cand[i]) for i in range(len(dc)) if i != k]
                ambiguous = any(abs(di - dc[k]) <= 1e-6 * dc[k]
                                and np.linalg.norm(ci - cand[k]) > 1e-3 * dc[k]
                                for di, ci in others)
                return DistanceResult(float(dc[k]), 1e-12 * (1.0 + float(dc[k])), cand[k],
                                      "kkt", result.n_hits, ambiguous)
        return result

    # direction search for non-smooth data or the sup norm
    def hit_distance(v):
        u = to_complex(v)
        nu = np.linalg.norm(u)
        if nu == 0:
            return np.inf, None
        u = u / nu
        h, tt, _ = ray_hits(D, z, u[None, :], max_length=1.5 * d_ray * _stretch(norm, u))
        if not h[0]:
            return np.inf, None
        foot = z + tt[0] * u
        return float(norm.norm(foot - z)), foot

    best_d, best_foot = d_ray, feet[best]
    for i in _distinct_best(feet, dist, 3, 0.1 * d_ray):
        v0 = to_real(Uh[i])
        res = minimize(lambda v: hit_distance(v)[0], v0, method="Nelder-Mead",
                       options={"xatol": 1e-11, "fatol": 1e-13, "maxiter": 4000})
        d_i, foot_i = hit_distance(res.x)
        if foot_i is not None and d_i < best_d:
            best_d, best_foot = d_i, foot_i
    return DistanceResult(best_d, max(1e-9 * best_d, float(np.max(wh))), best_foot,
                          "nelder-mead", result.n_hits)


def _stretch(norm: NormSpec, u: np.ndarray) -> float:
    """Ratio euclidean/‖u‖ so that a distance bound becomes a ray-length bound."""
    n = float(norm.norm(u))
    return float(np.linalg.norm(u)) / n if n > 0 else 1.0


def sample_boundary(D: SublevelDomain, n: int, seed=0, origin=None) -> np.ndarray:
    """Boundary points from bisection along random rays through ``origin``."""
    rng = np.random.default_rng(seed)
    z = np.array(D.center if origin is None else as_point(origin).coords, dtype=complex)
    pts = []
    while len(pts) < n:
        U = _ray_directions(D.dim, 4 * n, rng)[4 * D.dim:]
        hit, t, _ = ray_hits(D, z, U)
        pts.extend(z[None, :] + t[hit, None] * U[hit])
        if not hit.any():
            raise BoundaryNotFoundError("no boundary point found from the sampling origin")
    pts = np.array(pts[:n])
    return project_to_boundary(D, pts) if D.smooth else pts


def project_to_boundary(D: SublevelDomain, Z, iters: int = 8) -> np.ndarray:
    """Gradient Newton steps ``x ← x − ρ ∇ρ/|∇ρ|²`` onto ``{ρ = 0}``."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex)).copy()
    prog = jet_program(D.rho, D.dim)
    for _ in range(iters):
        arr = prog.arrays(Z, errors="nan")
        rho = arr["value"].real
        g = arr["grad_zbar"]  # ∇ρ in complex form is 2 ∂ρ/∂z̄
        gn2 = np.sum(np.abs(g) ** 2, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = (rho / (2 * gn2))[:, None] * g
        ok = np.isfinite(step).all(axis=1)
        Z[ok] -= step[ok]
    return Z


def interior_samples(D: SublevelDomain, n: int, seed=0, min_depth: float = 0.0,
                     box=None) -> np.ndarray:
    """Uniform rejection samples of ``{ρ < −min_depth}`` in the search box (or ``box``)."""
    rng = np.random.default_rng(seed)
    c = np.array(D.center, dtype=complex)
    hw = D.half_width if box is None else float(box)
    out = []
    tries = 0
    while len(out) < n:
        tries += 1
        if tries > 1000:
            raise BoundaryNotFoundError("could not sample interior points")
        X = rng.uniform(-hw, hw, size=(4 * n, 2 * D.dim))
        Z = c[None, :] + to_complex(X)
        keep = D.rho_values(Z) < -max(min_depth, D.boundary_tol)
        out.extend(Z[keep])
    return np.array(out[:n])


# ---------------------------------------------------------------------------
# -log d criterion


class _LocalDistance:
    """Distance to ``∂Ω`` near a reference point, by Newton from a known foot."""

    def __init__(self, D: SublevelDomain, norm: NormSpec, z, ref: DistanceResult,
                 n_samples, rng):
        self.D, self.norm, self.z, self.ref = D, norm, np.asarray(z, dtype=complex), ref
        self.n_samples, self.rng = n_samples, rng
        self.failed = False

    def __call__(self, P: np.ndarray) -> np.ndarray:
        P = np.atleast_2d(P)
        if self.ref.method == "kkt":
            W = self.norm.real_weights(self.D.dim)
            x0 = np.tile(to_real(self.ref.foot), (P.shape[0], 1))
            x, conv = _kkt_polish(self.D, to_real(P), x0, W)
            d = self.norm.norm(to_complex(x) - P)
            # a distance function is 1-Lipschitz; a jump means Newton left the branch
            lip = 1.01 * self.norm.norm(P - self.z[None, :]) + 1e-9 * self.ref.distance
            if not conv.all() or np.any(np.abs(d - self.ref.distance) > lip):
                self.failed = True
            return d
        out = np.empty(P.shape[0])
        for i, pz in enumerate(P):
            try:
                out[i] = boundary_distance(self.D, pz, self.norm, self.n_samples, self.rng).distance
            except (BoundaryNotFoundError, PreconditionError):
                out[i] = np.nan
                self.failed = True
        return out


def fd_levi_neglog(dist_fn, z, d: float, rel_step: float = 1e-4):
    """Levi matrix of ``-log dist`` by central differences at steps h and 2h.

    Returns ``(L_h, error_estimate)`` with ``error_estimate = ‖L_h − L_2h‖₂``.
    """
    h = rel_step * d

    def f(P):
        with np.errstate(divide="ignore", invalid="ignore"):
            return -np.log(dist_fn(P))

    L1 = fd_jet(f, z, h)[2]
    L2 = fd_jet(f, z, 2 * h)[2]
    if not (np.all(np.isfinite(L1)) and np.all(np.isfinite(L2))):
        return L1, float("nan")
    L1 = 0.5 * (L1 + L1.conj().T)
    return L1, float(np.linalg.norm(L1 - L2, 2))


@dataclass
class ProbeReport:
    """Per-point records plus verdict counts."""

    index: int
    records: list = field(default_factory=list)

    @property
    def counts(self) -> dict:
        c = {v: 0 for v in VERDICTS}
        for r in self.records:
            c[r["verdict"]] += 1
        return c

    def to_dict(self) -> dict:
        return {"index": self.index, "counts": self.counts, "records": self.records}


def _record(z, v: PshVerdict, **extra) -> dict:
    rec = {"point": point_json(z)}
    rec.update(v.to_dict())
    rec.update(extra)
    return rec


def _neglog_distance_record(D, z, index, norm, tol, n_rays, rng, rel_step, cap=None):
    """Classify ``-log d`` at ``z``; ``cap=(p, r)`` caps d by ``r − ‖z − p‖``."""
    try:
        ref = boundary_distance(D, z, norm, n_rays, rng,
                                max_length=None if cap is None else cap[1])
    except (BoundaryNotFoundError, PreconditionError) as exc:
        return _record(z, PshVerdict(INCONCLUSIVE, None, None, (str(exc),)), distance=None)
    if ref.ambiguous:
        return _record(z, PshVerdict(INCONCLUSIVE, None, None, ("several nearest points",)),
                       distance=ref.distance)
    local = _LocalDistance(D, norm, z, ref, max(8, n_rays // 4), rng)
    dist_fn = local
    d = ref.distance
    if cap is not None:
        p, r = cap
        d = min(d, r - float(norm.norm(z - p)))

        def dist_fn(P):
            return np.minimum(local(P), r - norm.norm(np.atleast_2d(P) - p[None, :]))

    L, err = fd_levi_neglog(dist_fn, z, d, rel_step)
    notes = ()
    if local.failed or not math.isfinite(err):
        v = PshVerdict(INCONCLUSIVE, None, None, ("distance not smooth near the point",))
    else:
        v = classify_matrix(L, index, False, tol, error_bound=err,
                            notes=(f"fd error estimate {err:.3g}",) + notes)
    return _record(z, v, distance=d)


def hartogs_pcv_via_distance(D: SublevelDomain, q: int, grid, norm: NormSpec = EUCLIDEAN,
                             tol: float = DEFAULT_TOL, *, n_rays: int = 64, seed: int = 0,
                             threads: int | None = 1, rel_step: float = 1e-4) -> ProbeReport:
    """Test whether ``-log d`` is (n−q−1)-psh at the grid points.

    The Levi matrix of ``-log d`` comes from central differences with step
    ``rel_step·d`` and ``2·rel_step·d``; their difference widens the
    tolerance band, so unresolved points are ``inconclusive``.
    """
    n = D.dim
    index = n - q - 1
    if q < 0 or index < 0:
        raise ValueError("need 0 <= q <= n - 1")
    Z = np.atleast_2d(np.asarray(grid, dtype=complex))

    def one(i):
        return _neglog_distance_record(D, Z[i], index, norm, tol, n_rays,
                                       item_rng(seed, i), rel_step)

    return ProbeReport(index, pmap(one, range(len(Z)), threads))


# ---------------------------------------------------------------------------
# local maximum test


@dataclass
class LocalMaxReport:
    violation: bool
    worst: float
    max_interior: float
    max_boundary: float
    argmax_interior: list
    n_samples: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def local_max_test(e: Expr, center, frame, radius: float, n_samples: int = 2000,
                   seed: int = 0, slack: float = 1e-9) -> LocalMaxReport:
    """Monte-Carlo maximum principle check on a complex ball.

    The ball is ``{center + F s : |s| <= radius}`` where the columns of
    ``frame`` span a (q+1)-dimensional complex subspace.  An interior
    sample above the (locally maximised) boundary maximum by more than
    ``slack·(1 + |max|)`` is a violation, which certifies that ``e`` is not
    q-psh; no violation is only consistent with q-psh.
    """
    c = as_point(center).array
    F = np.atleast_2d(np.asarray(frame, dtype=complex))
    if F.shape[0] != c.size:
        F = F.T
    F, _ = np.linalg.qr(F)
    m = F.shape[1]
    rng = np.random.default_rng(seed)

    def sphere(k):
        G = rng.standard_normal((k, m)) + 1j * rng.standard_normal((k, m))
        return G / np.linalg.norm(G, axis=1, keepdims=True)

    S_b = radius * sphere(n_samples)
    r = radius * rng.uniform(size=(n_samples, 1)) ** (1.0 / (2 * m))
    S_i = np.vstack([np.zeros((1, m)), r * sphere(n_samples)])

    def values(S):
        return evaluate_batch(e, c[None, :] + S @ F.T, errors="nan").real

    vb = values(S_b)
    vi = values(S_i)
    vb_f = np.where(np.isfinite(vb), vb, -np.inf)
    vi_f = np.where(np.isfinite(vi), vi, -np.inf)
    max_b = float(np.max(vb_f))

    def neg_on_sphere(v):
        s = to_complex(v)
        ns = np.linalg.norm(s)
        if ns == 0:
            return np.inf
        val = values((radius * s / ns)[None, :])[0]
        return -val if np.isfinite(val) else np.inf

    for i in np.argsort(-vb_f)[:3]:
        res = minimize(neg_on_sphere, to_real(S_b[i]), method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000})
        if np.isfinite(res.fun):
            max_b = max(max_b, -float(res.fun))
    k = int(np.argmax(vi_f))
    max_i = float(vi_f[k])
    worst = max_i - max_b
    return LocalMaxReport(bool(worst > slack * (1.0 + abs(max_b))), worst, max_i, max_b,
                          point_json(c + F @ S_i[k]), n_samples)


# ---------------------------------------------------------------------------
# relative pseudoconvexity


def relative_pcv_probe(U: SublevelDomain, V: SublevelDomain, q: int, boundary_points,
                       radius: float, *, potential: Expr | None = None, offset=None,
                       n_interior: int = 4, norm: NormSpec = EUCLIDEAN,
                       tol: float = DEFAULT_TOL, seed: int = 0, threads: int | None = 1,
                       n_rays: int = 48) -> dict:
    """Probe relative Hartogs q-pseudoconvexity of ``U`` in ``V`` near boundary points.

    For each boundary point ``p`` in ``V`` and each radius of the schedule
    ``(r, r/2, r/4)``:

    * smooth mode runs the Levi test of ρ_U at ``p`` (index n−q−1) and the
      ``-log d`` test on ``U ∩ B_r(p)`` at a few interior points;
    * potential mode (``potential`` given) moves off ``p`` along ``offset``
      (default: the last coordinate axis), checks that the potential grows
      as the distance shrinks and classifies it at index n−q−1.

    Results are reported per radius; nothing is claimed about radii that
    were not tried.
    """
    if potential is None and U.rho == V.rho:
        raise PreconditionError("U and V coincide; a proper subdomain is required")
    n = U.dim
    index = n - q - 1
    if index < 0 or q < 0:
        raise ValueError("need 0 <= q <= n - 1")
    P = np.atleast_2d(np.asarray(boundary_points, dtype=complex))
    in_V = V.rho_values(P) < 0
    if not in_V.any():
        raise PreconditionError("no boundary sample lies inside V")
    radii = (radius, radius / 2, radius / 4)
    jobs = [(i, k) for i in np.flatnonzero(in_V) for k in range(len(radii))]

    def smooth_job(job):
        i, k = job
        p, r = P[i], radii[k]
        rng = item_rng(seed, i * len(radii) + k)
        rec = {"point": point_json(p), "radius": r}
        try:
            rec["levi"] = levi_pcv_at_boundary(U, p, index, False, tol).to_dict()
        except Exception as exc:  # per-point flag
            rec["levi"] = PshVerdict(INCONCLUSIVE, None, None, (str(exc),)).to_dict()
        g = jet2(U.rho, p, real=True).grad_zbar
        nvec = g / np.linalg.norm(g)  # outward normal direction in C^N
        pts = []
        tries = 0
        while len(pts) < n_interior and tries < 50 * n_interior:
            tries += 1
            w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            w -= np.vdot(nvec, w) * nvec
            w /= max(np.linalg.norm(w), 1e-300)
            z = p - rng.uniform(0.05, 0.3) * r * nvec + rng.uniform(0.0, 0.2) * r * w
            if U.rho_values(z)[0] < -U.boundary_tol and V.rho_values(z)[0] < 0:
                pts.append(z)
        recs = [_neglog_distance_record(U, z, index, norm, tol, n_rays, rng, 1e-4, cap=(p, r))
                for z in pts]
        rec["distance_probe"] = {
            "counts": {v: sum(r_["verdict"] == v for r_ in recs) for v in VERDICTS},
            "records": recs,
        }
        return rec

    def potential_job(job):
        i, k = job
        p, r = P[i], radii[k]
        rng = item_rng(seed, i * len(radii) + k)
        direction = np.zeros(n, dtype=complex)
        if offset is None:
            direction[-1] = 1.0
        else:
            direction = np.asarray(offset, dtype=complex)
            direction = direction / np.linalg.norm(direction)
        rec = {"point": point_json(p), "radius": r}
        records = []
        blowup = True
        for _ in range(n_interior):
            phase = np.exp(2j * np.pi * rng.uniform())
            path = [p + s * phase * direction for s in (r, r / 2, r / 4)]
            vals = evaluate_batch(potential, np.array(path), errors="nan").real
            blowup &= bool(np.all(np.diff(vals) > 0))
            z = path[0]
            try:
                v = classify_qpsh(potential, z, index, False, tol)
            except Exception as exc:
                v = PshVerdict(INCONCLUSIVE, None, None, (str(exc),))
            records.append(_record(z, v))
        rec["blowup"] = blowup
        rec["distance_probe"] = {
            "counts": {v: sum(r_["verdict"] == v for r_ in records) for v in VERDICTS},
            "records": records,
        }
        return rec

    results = pmap(potential_job if potential is not None else smooth_job, jobs, threads)
    n_no = sum(r["distance_probe"]["counts"][NO] for r in results)
    if potential is None:
        n_no += sum(r["levi"]["verdict"] == NO for r in results)
    else:
        n_no += sum(not r["blowup"] for r in results)
    return {
        "index": index,
        "radii": list(radii),
        "probes": results,
        "violations": n_no,
        "consistent": n_no == 0,
    }
