"""Graphs of mappings over ``C^n × R^k``, CR-dimension and foliation certificates.

Coordinates of the ambient ``C^N`` are ordered ``z_1..z_n, w_1..w_k,
ζ_1..ζ_p`` with ``u = Re w`` and ``v = Im w``.  A :class:`GraphMapping`
holds expressions in the ``n + k`` variables ``z_1..z_n, u_1..u_k`` (the
``u`` variables are real); its graph is
``{(z, u + i f_v(z, u), f_ζ(z, u))}``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .calculus import d_z, d_zbar, jet2, jet_program
from .domains import point_json, quadric, shell
from .errors import DegenerateGradientError, DomainError, LeviLabError, PreconditionError
from .expr import (
    Binary,
    Const,
    Expr,
    Guard,
    Unary,
    Var,
    as_point,
    evaluate_batch,
    evaluate_many,
    parse,
    print_expr,
    substitute,
)
from .levi import (
    DEFAULT_TOL,
    Subspace,
    holomorphic_tangent,
    inertia,
    levi_form_value,
    levi_null_space,
    restricted_levi,
)
from .parallel import pmap

CERTIFIED = "certified"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"


class UnknownExampleError(LeviLabError, KeyError):
    pass


@dataclass
class GraphMapping:
    """``f = (f_v, f_ζ)`` on a box ``G`` of ``C^n × R^k``.

    ``box`` lists ``2n + k`` real intervals: ``(Re z_1, Im z_1, ...,
    u_1, ..., u_k)``.
    """

    n: int
    k: int
    p: int
    f_v: tuple = ()
    f_zeta: tuple = ()
    box: tuple | None = None
    name: str = ""

    def __post_init__(self):
        self.f_v = tuple(self.f_v)
        self.f_zeta = tuple(self.f_zeta)
        if len(self.f_v) != self.k or len(self.f_zeta) != self.p:
            raise ValueError("number of component expressions does not match k and p")
        if self.n < 0 or self.k < 0 or self.p < 0 or self.n + self.k == 0:
            raise ValueError("invalid split (n, k, p)")
        if self.box is None:
            self.box = tuple((-1.0, 1.0) for _ in range(2 * self.n + self.k))
        self.box = tuple((float(a), float(b)) for a, b in self.box)
        if len(self.box) != 2 * self.n + self.k:
            raise ValueError("box needs 2n + k intervals")

    @property
    def N(self) -> int:
        return self.n + self.k + self.p

    @property
    def r(self) -> int:
        return self.k + 2 * self.p

    def _ambient(self, e: Expr) -> Expr:
        return substitute(e, {self.n + j: Unary("re", Var(self.n + j)) for j in range(1, self.k + 1)})

    def defining_functions(self) -> list[Expr]:
        """The ``r = k + 2p`` real functions cutting out the graph in ``C^N``."""
        n, k = self.n, self.k
        out = []
        for j, fv in enumerate(self.f_v, start=1):
            out.append(Binary("-", Unary("im", Var(n + j)), self._ambient(fv)))
        for i, fz in enumerate(self.f_zeta, start=1):
            diff = Binary("-", Var(n + k + i), self._ambient(fz))
            out.append(Unary("re", diff))
            out.append(Unary("im", diff))
        return out

    def contains(self, zu, slack: float = 0.0) -> bool:
        x = _zu_real(self, zu)
        return all(a - slack <= t <= b + slack for t, (a, b) in zip(x, self.box))

    def sample(self, n: int, seed: int = 0) -> np.ndarray:
        """Uniform samples of ``G`` as (n, n + k) complex arrays (u real)."""
        rng = np.random.default_rng(seed)
        lo = np.array([a for a, _ in self.box])
        hi = np.array([b for _, b in self.box])
        X = lo + (hi - lo) * rng.uniform(size=(n, len(lo)))
        Z = X[:, 0:2 * self.n:2] + 1j * X[:, 1:2 * self.n:2]
        return np.concatenate([Z, X[:, 2 * self.n:].astype(complex)], axis=1)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n": self.n, "k": self.k, "p": self.p,
            "f_v": [print_expr(e) for e in self.f_v],
            "f_zeta": [print_expr(e) for e in self.f_zeta],
            "box": [list(b) for b in self.box],
        }


def _zu_real(f: GraphMapping, zu) -> np.ndarray:
    zu = np.asarray(as_point(zu).array, dtype=complex)
    if zu.size != f.n + f.k:
        raise ValueError("parameter point must have n + k coordinates")
    z, u = zu[: f.n], zu[f.n:]
    return np.concatenate([np.column_stack([z.real, z.imag]).ravel(), u.real])


def graph_points(f: GraphMapping, ZU, *, errors: str = "raise") -> np.ndarray:
    ZU = np.atleast_2d(np.asarray(ZU, dtype=complex))
    if ZU.shape[1] != f.n + f.k:
        raise ValueError("parameter points must have n + k coordinates")
    ZU = np.concatenate([ZU[:, : f.n], ZU[:, f.n:].real.astype(complex)], axis=1)
    M = ZU.shape[0]
    out = np.zeros((M, f.N), dtype=complex)
    out[:, : f.n] = ZU[:, : f.n]
    if f.k:
        fv = evaluate_many(f.f_v, ZU, errors=errors).T
        if np.any(np.abs(fv.imag) > 1e-10 * (1 + np.abs(fv.real))):
            raise DomainError("f_v is not real-valued")
        out[:, f.n:f.n + f.k] = ZU[:, f.n:].real + 1j * fv.real
    if f.p:
        out[:, f.n + f.k:] = evaluate_many(f.f_zeta, ZU, errors=errors).T
    return out


def graph_point(f: GraphMapping, zu) -> np.ndarray:
    """``(z, u + i f_v(z, u), f_ζ(z, u))``."""
    if not f.contains(zu, 1e-12):
        raise PreconditionError("parameter point lies outside the box G")
    return graph_points(f, np.asarray(as_point(zu).array)[None, :])[0]


def project_zu(f: GraphMapping, P) -> np.ndarray:
    """``π_{z,u}`` of an ambient point."""
    P = np.asarray(P, dtype=complex).ravel()
    return np.concatenate([P[: f.n], P[f.n:f.n + f.k].real.astype(complex)])


def on_graph_residual(f: GraphMapping, P) -> float:
    P = np.atleast_2d(np.asarray(P, dtype=complex))
    vals = evaluate_many(f.defining_functions(), P)
    return float(np.max(np.abs(vals), initial=0.0))


# ---------------------------------------------------------------------------
# CR dimension and certificates


def _graph_jets(f: GraphMapping, P: np.ndarray):
    phis = f.defining_functions()
    progs = [jet_program(phi, f.N) for phi in phis]
    arrs = [prog.arrays(P[None, :]) for prog in progs]
    grads = np.array([a["grad_z"][0] for a in arrs])
    levis = []
    for a in arrs:
        L = a["levi"][0]
        levis.append(0.5 * (L + L.conj().T))
    return grads, levis


def _record_for(f: GraphMapping, zu, tol: float, cond_flag: float) -> dict:
    zu = np.asarray(as_point(zu).array, dtype=complex)
    rec = {"zu": point_json(zu), "point": None, "dim_H": None, "flags": []}
    try:
        P = graph_points(f, zu[None, :])[0]
        rec["point"] = point_json(P)
        grads, levis = _graph_jets(f, P)
    except DomainError as exc:
        rec["flags"].append(f"jets undefined: {exc}")
        return rec
    if not (np.all(np.isfinite(grads)) and all(np.all(np.isfinite(L)) for L in levis)):
        rec["flags"].append("jets not finite")
        return rec
    try:
        H = holomorphic_tangent(grads, tol) if len(grads) else Subspace.full(f.N)
    except DegenerateGradientError as exc:
        rec["flags"].append(str(exc))
        return rec
    rec["dim_H"] = H.dim
    if len(grads):
        sv = np.linalg.svd(grads, compute_uv=False)
        # exact zeros (round-off level) are structural, e.g. holomorphic components
        small = sv[(sv <= cond_flag * sv[0]) & (sv > 1e-12 * sv[0])]
        if small.size:
            rec["flags"].append(f"near rank drop of the gradient rows (singular value {float(small.min()):.3g})")
    rec["_H"] = H
    rec["_grads"] = grads
    rec["_levis"] = levis
    return rec


def _public(rec: dict) -> dict:
    return {k: v for k, v in rec.items() if not k.startswith("_")}


def cr_dimension_scan(f: GraphMapping, samples, tol: float = DEFAULT_TOL,
                      threads: int = 1, cond_flag: float = 1e-6) -> dict:
    """``dim H_pΓ`` at graph points over the sampled parameters.

    Records carry flags for undefined jets, degenerate gradients and
    (near) rank drops of the gradient rows (singular value below
    ``cond_flag`` relative to the largest).
    """
    S = np.atleast_2d(np.asarray(samples, dtype=complex))
    recs = pmap(lambda zu: _public(_record_for(f, zu, tol, cond_flag)), list(S), threads)
    dims = sorted({r["dim_H"] for r in recs if r["dim_H"] is not None})
    return {
        "records": recs,
        "dims": dims,
        "constant": len(dims) == 1 and all(r["dim_H"] is not None for r in recs),
        "flagged": [i for i, r in enumerate(recs) if r["flags"]],
    }


@dataclass
class Witness:
    """Data of a non-vanishing restricted Levi form at a graph point."""

    point: np.ndarray
    zu: np.ndarray
    j0: int
    X0: np.ndarray
    nu: complex | None
    levi_value: float

    def to_dict(self) -> dict:
        return {
            "point": point_json(self.point),
            "zu": point_json(self.zu),
            "j0": self.j0,
            "X0": point_json(self.X0),
            "nu": None if self.nu is None else [self.nu.real, self.nu.imag],
            "levi_value": self.levi_value,
        }


def find_witness(H: Subspace, levis, cutoff: float):
    """``(j0, X0, ν, value)`` with ``L_{j0}(X0, X0) ≠ 0`` and ``X0 ∈ H``, or ``None``.

    Basis vectors are tried first; otherwise ``X0 = X' + νY'`` with
    ``ν = conj(L(X', Y'))/|L(X', Y')|`` so that the form equals
    ``2|L(X', Y')|`` when both diagonal values vanish.
    """
    B = H.basis
    best = None
    for j, L in enumerate(levis):
        for a in range(H.dim):
            v = levi_form_value(L, B[:, a]).real
            if abs(v) > cutoff and (best is None or abs(v) > abs(best[3])):
                best = (j, B[:, a], None, v)
    if best is not None:
        return best
    for j, L in enumerate(levis):
        for a in range(H.dim):
            for b in range(a + 1, H.dim):
                c = levi_form_value(L, B[:, a], B[:, b])
                if abs(c) > cutoff:
                    nu = complex(np.conj(c) / abs(c))
                    X0 = B[:, a] + nu * B[:, b]
                    return j, X0, nu, levi_form_value(L, X0).real
    return None


@dataclass
class FoliationCertificate:
    q: int
    overall: str
    records: list
    witness: Witness | None = None
    summary: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "overall": self.overall,
            "summary": self.summary,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "records": self.records,
        }


def _certify_one(f: GraphMapping, zu, q: int, tol: float, cond_flag: float):
    rec = _record_for(f, zu, tol, cond_flag)
    rec["dim_N"] = None
    witness = None
    if rec["dim_H"] is None:
        rec["verdict"] = "flagged"
        return _public(rec), None
    if rec["dim_H"] != q:
        rec["verdict"] = "cr_mismatch"
        return _public(rec), None
    H, grads, levis = rec["_H"], rec["_grads"], rec["_levis"]
    Np = levi_null_space(grads, levis, H, tol)
    rec["dim_N"] = Np.dim
    rec["inertia"] = [list(inertia(restricted_levi(L, H), tol).as_tuple()) for L in levis]
    if Np.dim < H.dim:
        scale = max([1.0] + [float(np.max(np.abs(L))) for L in levis])
        found = find_witness(H, levis, tol * scale)
        if found is not None:
            j0, X0, nu, val = found
            P = np.array([complex(a, b) for a, b in rec["point"]])
            witness = Witness(P, np.asarray(as_point(zu).array), j0, X0, nu, float(val))
        rec["verdict"] = "refuted"
    else:
        rec["verdict"] = "flagged" if rec["flags"] else "ok"
    return _public(rec), witness


def foliation_certificate(f: GraphMapping, q: int, samples, tol: float = DEFAULT_TOL,
                          threads: int = 1, cond_flag: float = 1e-6) -> FoliationCertificate:
    """Check ``dim H_p = dim N_p = q`` at every sample.

    ``certified`` when every record passes; ``refuted`` when some record
    has ``N_p ⊊ H_p`` or ``dim H_p ≠ q``; ``inconclusive`` when records
    are only flagged (undefined jets or near rank drops).  The first
    refuting record with a non-zero restricted Levi form supplies the
    witness.
    """
    if q < 0:
        raise ValueError("q must be non-negative")
    S = np.atleast_2d(np.asarray(samples, dtype=complex))
    if S.shape[0] == 0:
        raise PreconditionError("no samples")
    out = pmap(lambda zu: _certify_one(f, zu, q, tol, cond_flag), list(S), threads)
    recs = [r for r, _ in out]
    witness = next((w for _, w in out if w is not None), None)
    counts = {v: sum(r["verdict"] == v for r in recs) for v in ("ok", "flagged", "cr_mismatch", "refuted")}
    dims = sorted({r["dim_H"] for r in recs if r["dim_H"] is not None})
    if counts["refuted"] or counts["cr_mismatch"]:
        overall = REFUTED
    elif counts["flagged"]:
        overall = INCONCLUSIVE
    else:
        overall = CERTIFIED
    summary = dict(counts, dims_H=dims, n_samples=len(recs))
    return FoliationCertificate(q, overall, recs, witness, summary)


# ---------------------------------------------------------------------------
# slicing


def slice_graph(f: GraphMapping, Pi: Sequence[Expr], zeta_subset: Sequence[int] | None = None,
                box=None, n_check: int = 50, seed: int = 0) -> GraphMapping:
    """Restriction of ``f`` to ``Π × R^k`` keeping the listed ζ components.

    ``Pi`` gives ``z`` as ``n`` affine holomorphic expressions in
    ``y_1..y_m``; ``zeta_subset`` holds 1-based ζ indices.  The result is
    validated against direct composition at ``n_check`` random points.
    """
    Pi = tuple(Pi)
    if len(Pi) != f.n:
        raise ValueError("the parametrization needs one expression per z coordinate")
    m = max([0] + [v.index for e in Pi for v in _vars(e)])
    zeta_subset = list(range(1, f.p + 1)) if zeta_subset is None else list(zeta_subset)
    if sorted(set(zeta_subset)) != zeta_subset or any(not 1 <= i <= f.p for i in zeta_subset):
        raise ValueError("zeta indices must be increasing and within 1..p")
    for e in Pi:
        for j in range(1, m + 1):
            if not _is_zero_expr(d_zbar(e, j)) or _vars(d_z(e, j)):
                raise ValueError("the parametrization must be affine and holomorphic")
    mapping = {i: Pi[i - 1] for i in range(1, f.n + 1)}
    mapping.update({f.n + j: Var(m + j) for j in range(1, f.k + 1)})
    fv = tuple(substitute(e, mapping) for e in f.f_v)
    fz = tuple(substitute(f.f_zeta[i - 1], mapping) for i in zeta_subset)
    if box is None:
        box = tuple((-1.0, 1.0) for _ in range(2 * m)) + f.box[2 * f.n:]
    g = GraphMapping(m, f.k, len(zeta_subset), fv, fz, box, f"{f.name}|slice")
    if n_check:
        Y = g.sample(n_check, seed)
        Z = evaluate_many(Pi, Y[:, :m]).T if m else np.zeros((len(Y), f.n), dtype=complex)
        big = graph_points(f, np.concatenate([Z, Y[:, m:]], axis=1), errors="nan")
        keep = list(range(f.n, f.n + f.k)) + [f.n + f.k + i - 1 for i in zeta_subset]
        ref = big[:, keep]
        got = graph_points(g, Y, errors="nan")[:, m:]
        ok = np.isfinite(ref) & np.isfinite(got)
        if np.any(np.abs(ref[ok] - got[ok]) > 1e-10 * (1 + np.abs(ref[ok]))):
            raise AssertionError("sliced graph disagrees with direct composition")
    return g


def _vars(e: Expr):
    from .expr import walk
    return [node for node in walk(e) if isinstance(node, Var)]


def _is_zero_expr(e: Expr) -> bool:
    return isinstance(e, Const) and e.is_zero


# ---------------------------------------------------------------------------
# leaf tracing


def _real_jacobian(grads: np.ndarray) -> np.ndarray:
    """Rows ``(2 Re ∂φ, −2 Im ∂φ)``: real gradients in ``(x, y)`` ordering per coordinate."""
    J = np.zeros((grads.shape[0], 2 * grads.shape[1]))
    J[:, 0::2] = 2 * grads.real
    J[:, 1::2] = -2 * grads.imag
    return J


def reproject(f: GraphMapping, P, tol: float = 1e-14, iters: int = 20) -> np.ndarray:
    """Gauss–Newton minimal-norm correction of ``P`` onto ``{φ_j = 0}``."""
    phis = f.defining_functions()
    progs = [jet_program(phi, f.N) for phi in phis]
    P = np.asarray(P, dtype=complex).copy()
    for _ in range(iters):
        arrs = [prog.arrays(P[None, :]) for prog in progs]
        vals = np.array([a["value"][0].real for a in arrs])
        if np.max(np.abs(vals), initial=0.0) <= tol:
            return P
        J = _real_jacobian(np.array([a["grad_z"][0] for a in arrs]))
        dx = -np.linalg.lstsq(J, vals, rcond=None)[0]
        P = P + dx[0::2] + 1j * dx[1::2]
    if on_graph_residual(f, P) > 1e-10:
        raise PreconditionError("reprojection onto the graph did not converge")
    return P


def _leaf_velocity(f: GraphMapping, P: np.ndarray, tol: float) -> np.ndarray:
    """``dP/dz`` along the leaf through ``P`` (tangent line scaled to unit z-component)."""
    grads, _ = _graph_jets(f, P)
    H = holomorphic_tangent(grads, tol)
    if H.dim != 1:
        raise PreconditionError(f"holomorphic tangent space has dimension {H.dim}, expected 1")
    v = H.basis[:, 0]
    if abs(v[0]) < 1e-10:
        raise PreconditionError("leaf tangent is vertical over the z-axis")
    return v / v[0]


def _rk4(f, P, dz, tol):
    k1 = _leaf_velocity(f, P, tol)
    k2 = _leaf_velocity(f, P + 0.5 * dz * k1, tol)
    k3 = _leaf_velocity(f, P + 0.5 * dz * k2, tol)
    k4 = _leaf_velocity(f, P + dz * k3, tol)
    return P + dz * (k1 + 2 * k2 + 2 * k3 + k4) / 6


@dataclass
class LeafTrace:
    points: np.ndarray
    residuals: np.ndarray
    step_size: float
    direction: complex

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals))

    def to_csv(self, path) -> None:
        N = self.points.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"{part}_z{j}" for j in range(1, N + 1) for part in ("re", "im")]
                       + ["residual"])
            for i, (P, r) in enumerate(zip(self.points, self.residuals)):
                row = [repr(i * self.step_size)]
                for c in P:
                    row += [repr(float(c.real)), repr(float(c.imag))]
                w.writerow(row + [repr(float(r))])

    def to_dict(self) -> dict:
        return {
            "n_points": int(self.points.shape[0]),
            "step_size": self.step_size,
            "max_residual": self.max_residual,
            "start": point_json(self.points[0]),
            "end": point_json(self.points[-1]),
        }


def trace_leaf(f: GraphMapping, start, steps: int, step_size: float,
               certificate: FoliationCertificate | None, direction: complex = 1.0,
               tol: float = DEFAULT_TOL) -> LeafTrace:
    """Integrate the leaf through ``start`` along ``z = z_0 + t·direction``.

    The leaf is the solution of the holomorphic ODE ``dP/dz = v(P)/v_z(P)``
    with ``v`` spanning ``H_PΓ``; classical RK4 steps are followed by a
    Gauss–Newton reprojection onto the graph.
    """
    if certificate is None or certificate.overall != CERTIFIED:
        raise PreconditionError("a certified foliation certificate is required")
    if certificate.q != 1 or f.n != 1:
        raise PreconditionError("leaf tracing needs complex one-dimensional leaves over n = 1")
    P = np.asarray(as_point(start).array, dtype=complex)
    if P.size != f.N:
        raise ValueError("start point has the wrong dimension")
    if on_graph_residual(f, P) > 1e-9:
        raise PreconditionError("start point is not on the graph")
    direction = complex(direction) / abs(direction)
    dz = step_size * direction
    pts = [P]
    res = [on_graph_residual(f, P)]
    for _ in range(steps):
        P = reproject(f, _rk4(f, P, dz, tol))
        pts.append(P)
        res.append(on_graph_residual(f, P))
    return LeafTrace(np.array(pts), np.array(res), float(step_size), direction)


def leaf_cr_residual(f: GraphMapping, P, h: float = 1e-3, tol: float = DEFAULT_TOL) -> float:
    """``|∂̄|`` of the leaf parametrization ``z ↦ P(z)`` at ``P`` by central differences."""
    P = np.asarray(P, dtype=complex)
    dx = (_rk4(f, P, h, tol) - _rk4(f, P, -h, tol)) / (2 * h)
    dy = (_rk4(f, P, 1j * h, tol) - _rk4(f, P, -1j * h, tol)) / (2 * h)
    return float(np.max(np.abs(0.5 * (dx + 1j * dy))))


# ---------------------------------------------------------------------------
# Basener residual


def basener_residual(h: Expr, p) -> float:
    """Max coefficient of ``∂̄h ∧ ∂∂̄h`` at ``p`` for ``h`` on ``C²``.

    The 3-form is ``Σ_k c_k dz_k ∧ dz̄_1 ∧ dz̄_2`` with
    ``c_k = h_{z̄2} h_{k1̄} − h_{z̄1} h_{k2̄}``.
    """
    p = as_point(p)
    if p.dim != 2:
        raise ValueError("the residual is implemented for functions on C^2")
    jt = jet2(h, p, real=False)
    g, L = jt.grad_zbar, jt.levi
    c = g[1] * L[:, 0] - g[0] * L[:, 1]
    return float(np.max(np.abs(c)))


# ---------------------------------------------------------------------------
# example library


def ex58_expr(k: int = 2) -> Expr:
    """``conj(z1) z2^{2+k} / conj(z2)`` off ``{z2 = 0}``, ``0`` on it."""
    if k < 0:
        raise ValueError("k must be non-negative")
    body = parse(f"conj(z1)*z2^{2 + k}/conj(z2)", 2)
    return Guard(Var(2), Const(0), body)


def ex58(k: int = 2) -> GraphMapping:
    return GraphMapping(2, 0, 1, (), (ex58_expr(k),), None, f"ex58({k})")


def holo_graph(g: str | Expr = "z1^2", n: int = 1) -> GraphMapping:
    e = parse(g, n) if isinstance(g, str) else g
    return GraphMapping(n, 0, 1, (), (e,), None, f"holo_graph({print_expr(e)})")


def leviflat_im_z2() -> GraphMapping:
    return GraphMapping(1, 1, 0, (parse("im(z1^2)", 2),), (), None, "leviflat_im_z2")


def antiholo() -> GraphMapping:
    return GraphMapping(1, 0, 1, (), (parse("conj(z1)^2", 1),), None, "antiholo")


def real_plane() -> GraphMapping:
    return GraphMapping(1, 0, 1, (), (parse("conj(z1)", 1),), None, "real_plane")


def fv_abs2() -> GraphMapping:
    return GraphMapping(1, 1, 0, (parse("abs2(z1)", 2),), (), None, "fv_abs2")


def zero_graph() -> GraphMapping:
    return GraphMapping(1, 1, 0, (Const(0),), (), None, "zero_graph")


def _uk(k: int = 8, q: int = 2):
    from .hartogs import build_uk
    return build_uk(k, q)


@dataclass(frozen=True)
class LibraryEntry:
    name: str
    kind: str
    description: str
    factory: object

    def build(self, **params):
        return self.factory(**params)


def example_library() -> dict:
    """Named catalog of graphs, expressions and domains (sorted by name)."""
    entries = [
        LibraryEntry("antiholo", "graph", "f_zeta = conj(z)^2, totally real", antiholo),
        LibraryEntry("ex58", "graph", "conj(z1) z2^(2+k)/conj(z2), 0 on {z2 = 0}", ex58),
        LibraryEntry("fv_abs2", "graph", "f_v = |z|^2, strictly pseudoconvex side", fv_abs2),
        LibraryEntry("holo_graph", "graph", "graph of a holomorphic function g", holo_graph),
        LibraryEntry("leviflat_im_z2", "graph", "f_v = Im(z^2), Levi-flat", leviflat_im_z2),
        LibraryEntry("quadric", "domain", "{sum s_j |z_j|^2 - 1 < 0}",
                     lambda signs=(-1, 1), const=-1: quadric(signs, const)),
        LibraryEntry("real_plane", "graph", "f_zeta = conj(z)", real_plane),
        LibraryEntry("shell", "domain", "{9/100 < |z|^2 < 1}",
                     lambda N=2, inner=Fraction(3, 10), outer=1: shell(N, inner, outer)),
        LibraryEntry("uk", "expr", "u_k approximant of -log|w|_sup", _uk),
        LibraryEntry("zero_graph", "graph", "f_v = 0", zero_graph),
    ]
    return {e.name: e for e in sorted(entries, key=lambda e: e.name)}


def get_example(name: str, **params):
    lib = example_library()
    if name not in lib:
        raise UnknownExampleError(f"unknown example {name!r}")
    return lib[name].build(**params)
