"""Scenario files: validation, object construction and task execution.

A scenario is a JSON object::

    {
      "name": "ball_psh",
      "seed": 0,
      "threads": null,
      "tolerance": {"tol": 1e-8},
      "exprs": {"psi": "abs2(z1) + abs2(z2)"},
      "objects": {"B": {"type": "domain", "construct": "ball", "params": {"N": 2}}},
      "tasks": [{"id": "levi", "op": "levi_pcv", "domain": "B", "q": 0, "n": 50}],
      "fail_fast": false
    }

See ``docs/schema.md`` for every field.  Validation happens before any
task runs; a :class:`ScenarioError` names the offending field with a JSON
pointer.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np

from . import domains as dom
from . import graphs as gr
from . import hartogs as hg
from .calculus import jet2
from .errors import ExprSyntaxError, LeviLabError, ScenarioError
from .expr import Binary, Const, Expr, Ref, Unary, evaluate_batch, parse, print_expr
from .levi import DEFAULT_TOL, VERDICTS, classify_qpsh, holomorphic_tangent
from .parallel import item_rng

TASK_OPS = ("certificate", "classify_qpsh", "hartogs_probe", "identity_check", "levi_pcv",
            "local_max", "sweep", "trace", "uk_study")

_MISSING = object()


# ---------------------------------------------------------------------------
# small validation helpers


def _get(d: dict, key: str, ptr: str, kind, default=_MISSING):
    if key not in d:
        if default is _MISSING:
            raise ScenarioError(f"{ptr}/{key}", "required field is missing")
        return default
    v = d[key]
    kinds = kind if isinstance(kind, tuple) else (kind,)
    if float in kinds and isinstance(v, int) and not isinstance(v, bool):
        v = float(v)
    if isinstance(v, bool) and bool not in kinds:
        raise ScenarioError(f"{ptr}/{key}", f"expected {_kind_name(kinds)}, got a boolean")
    if not isinstance(v, kinds):
        raise ScenarioError(f"{ptr}/{key}", f"expected {_kind_name(kinds)}, got {type(v).__name__}")
    return v


def _kind_name(kinds) -> str:
    names = {int: "integer", float: "number", str: "string", bool: "boolean", list: "array",
             dict: "object", type(None): "null"}
    return " or ".join(names.get(k, k.__name__) for k in kinds)


def _positive(v, ptr):
    if not v > 0:
        raise ScenarioError(ptr, "must be positive")
    return v


def _coord(c, ptr) -> complex:
    if isinstance(c, bool):
        raise ScenarioError(ptr, "coordinate must be a number or [re, im]")
    if isinstance(c, (int, float)):
        return complex(c)
    if isinstance(c, list) and len(c) == 2 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in c):
        return complex(c[0], c[1])
    raise ScenarioError(ptr, "coordinate must be a number or [re, im]")


def _point(p, ptr, dim=None) -> np.ndarray:
    if not isinstance(p, list):
        raise ScenarioError(ptr, "point must be an array of coordinates")
    z = np.array([_coord(c, f"{ptr}/{i}") for i, c in enumerate(p)], dtype=complex)
    if dim is not None and z.size != dim:
        raise ScenarioError(ptr, f"point has {z.size} coordinates, expected {dim}")
    return z


def _points(ps, ptr, dim=None) -> np.ndarray:
    if not isinstance(ps, list) or not ps:
        raise ScenarioError(ptr, "expected a non-empty array of points")
    return np.array([_point(p, f"{ptr}/{i}", dim) for i, p in enumerate(ps)])


def _check_keys(d: dict, allowed, ptr: str):
    for k in d:
        if k not in allowed:
            raise ScenarioError(f"{ptr}/{k}", "unknown field")


# ---------------------------------------------------------------------------
# JSON output helpers


def jsonable(x):
    """Plain JSON data; complex numbers become ``[re, im]``, non-finite floats strings."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating, Fraction)):
        f = float(x)
        return f if math.isfinite(f) else repr(f)
    if isinstance(x, (complex, np.complexfloating)):
        return [jsonable(x.real), jsonable(x.imag)]
    if isinstance(x, Expr):
        return print_expr(x)
    if x is None or isinstance(x, str):
        return x
    if hasattr(x, "to_dict"):
        return jsonable(x.to_dict())
    raise TypeError(f"cannot serialise {type(x).__name__}")


def dumps(report: dict) -> str:
    return json.dumps(jsonable(report), sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# context


@dataclass
class Context:
    exprs: dict = field(default_factory=dict)
    objects: dict = field(default_factory=dict)
    tol: float = DEFAULT_TOL
    out_dir: Path | None = None
    artifacts: list = field(default_factory=list)

    def expr(self, src, ptr, dim=None, aliases=None) -> Expr:
        if not isinstance(src, str):
            raise ScenarioError(ptr, "expected an expression string or a name")
        if src in self.exprs:
            e = Ref(src, self.exprs[src])
        else:
            try:
                e = parse(src, defs=self.exprs, aliases=aliases)
            except ExprSyntaxError as exc:
                raise ScenarioError(ptr, str(exc)) from None
        if dim is not None and e.max_var_index() > dim:
            raise ScenarioError(ptr, f"expression uses variables beyond dimension {dim}")
        return e

    def obj(self, name, ptr, kind):
        if not isinstance(name, str) or name not in self.objects:
            raise ScenarioError(ptr, f"unknown object {name!r}")
        o = self.objects[name]
        kinds = kind if isinstance(kind, tuple) else (kind,)
        if o.kind not in kinds:
            raise ScenarioError(ptr, f"object {name!r} is a {o.kind}, expected {' or '.join(kinds)}")
        return o


@dataclass
class ObjectSpec:
    """Lazily built scenario object (domain, graph or family)."""

    kind: str
    build: Callable
    info: dict
    _value: object = None

    def get(self):
        if self._value is None:
            self._value = self.build()
        return self._value


_DOMAIN_CONSTRUCTS = {
    "ball": lambda N=2, radius=1: dom.ball(N, radius),
    "shell": lambda N=2, inner=0.3, outer=1: dom.shell(N, Fraction(inner).limit_denominator(10 ** 6),
                                                       outer),
    "polydisc": lambda N=2: dom.polydisc(N),
    "quadric": lambda signs=(-1, 1), const=-1, half_width=3.0: dom.quadric(list(signs), const,
                                                                          half_width),
    "halfspace": lambda N=2: dom.halfspace(N),
    "thm41_model": lambda n=3, q=1: hg.thm41_model_domain(n, q),
    "uk_level_cut": lambda k=8, q=2, c=0.5: hg.uk_level_cut(k, q, c),
    "real_plane_complement": lambda: hg.real_plane_depth(),
    "conj_graph_complement": lambda: hg.conj_graph_depth(),
}


def _call(fn, params, ptr):
    try:
        return fn(**params)
    except TypeError as exc:
        raise ScenarioError(f"{ptr}/params", str(exc)) from None
    except (ValueError, LeviLabError) as exc:
        raise ScenarioError(ptr, str(exc)) from None


def _domain_object(spec, ptr, ctx) -> ObjectSpec:
    _check_keys(spec, {"type", "construct", "params", "of", "rho", "dim", "center",
                       "half_width", "name"}, ptr)
    if "construct" in spec:
        c = _get(spec, "construct", ptr, str)
        params = _get(spec, "params", ptr, dict, {})
        if c == "complement":
            of = _get(spec, "of", ptr, str)
            base = ctx.obj(of, f"{ptr}/of", "domain")
            return ObjectSpec("domain", lambda: hg.complement(base.get()), spec)
        if c not in _DOMAIN_CONSTRUCTS:
            raise ScenarioError(f"{ptr}/construct", f"unknown domain construction {c!r}")
        D = _call(_DOMAIN_CONSTRUCTS[c], params, ptr)
        return ObjectSpec("domain", lambda: D, spec)
    dim = _get(spec, "dim", ptr, int)
    rho = ctx.expr(_get(spec, "rho", ptr, str), f"{ptr}/rho", dim)
    center = None
    if "center" in spec:
        center = tuple(_point(spec["center"], f"{ptr}/center", dim))
    hw = _positive(_get(spec, "half_width", ptr, float, 2.0), f"{ptr}/half_width")
    D = dom.SublevelDomain(rho, dim, center, hw, name=_get(spec, "name", ptr, str, ""))
    return ObjectSpec("domain", lambda: D, spec)


def _graph_object(spec, ptr, ctx) -> ObjectSpec:
    _check_keys(spec, {"type", "construct", "params", "n", "k", "p", "f_v", "f_zeta", "box",
                       "name"}, ptr)
    if "construct" in spec:
        c = _get(spec, "construct", ptr, str)
        params = _get(spec, "params", ptr, dict, {})
        lib = gr.example_library()
        if c not in lib or lib[c].kind != "graph":
            raise ScenarioError(f"{ptr}/construct", f"unknown graph {c!r}")
        f = _call(lib[c].factory, params, ptr)
        return ObjectSpec("graph", lambda: f, spec)
    n, k, p = (_get(spec, key, ptr, int) for key in ("n", "k", "p"))
    fv = _get(spec, "f_v", ptr, list, [])
    fz = _get(spec, "f_zeta", ptr, list, [])
    fv = [ctx.expr(s, f"{ptr}/f_v/{i}", n + k) for i, s in enumerate(fv)]
    fz = [ctx.expr(s, f"{ptr}/f_zeta/{i}", n + k) for i, s in enumerate(fz)]
    box = spec.get("box")
    try:
        f = gr.GraphMapping(n, k, p, fv, fz, None if box is None else tuple(map(tuple, box)),
                            _get(spec, "name", ptr, str, ""))
    except (TypeError, ValueError) as exc:
        raise ScenarioError(ptr, str(exc)) from None
    return ObjectSpec("graph", lambda: f, spec)


def _family_object(spec, ptr, ctx) -> ObjectSpec:
    _check_keys(spec, {"type", "construct", "params", "m", "components", "radius", "kind",
                       "name", "coords"}, ptr)
    if "construct" in spec:
        c = _get(spec, "construct", ptr, str)
        params = dict(_get(spec, "params", ptr, dict, {}))
        if c == "thm41":
            coords = spec.get("coords")
            if coords is not None:
                n = params.get("n", 3)
                coords = [ctx.expr(s, f"{ptr}/coords/{i}", n) for i, s in enumerate(coords)]
            fam = _call(lambda **kw: hg.build_thm41_family(coords=coords, **kw), params, ptr)
            return ObjectSpec("family", lambda: (fam, None), spec)
        if c == "r2_touching":
            fam = _call(hg.r2_touching_family, params, ptr)
            return ObjectSpec("family", lambda: (fam, None), spec)
        if c == "witness":
            g = ctx.obj(_get(params, "graph", f"{ptr}/params", str), f"{ptr}/params/graph", "graph")
            q = _get(params, "q", f"{ptr}/params", int, 1)
            n_samples = _get(params, "n_samples", f"{ptr}/params", int, 16)
            radius = _get(params, "radius", f"{ptr}/params", float, 0.05)
            seed = _get(params, "seed", f"{ptr}/params", int, 0)

            def build():
                f = g.get()
                cert = gr.foliation_certificate(f, q, f.sample(n_samples, seed), ctx.tol)
                if cert.witness is None:
                    raise LeviLabError("the certificate produced no Levi witness")
                w = cert.witness
                wf = hg.family_from_witness(f.defining_functions(), w.point, w.X0, w.j0,
                                            radius=radius, tol=ctx.tol)
                return wf.family, wf.depth

            return ObjectSpec("family", build, spec)
        raise ScenarioError(f"{ptr}/construct", f"unknown family construction {c!r}")
    m = _get(spec, "m", ptr, int)
    comps = _get(spec, "components", ptr, list)
    aliases = {"t": 1, **{f"s{j}": j + 1 for j in range(1, m + 1)}}
    exprs = [ctx.expr(s, f"{ptr}/components/{i}", m + 1, aliases) for i, s in enumerate(comps)]
    radius = _positive(_get(spec, "radius", ptr, float, 1.0), f"{ptr}/radius")
    kind = _get(spec, "kind", ptr, str, "ball")
    if kind not in ("ball", "polydisc"):
        raise ScenarioError(f"{ptr}/kind", "must be 'ball' or 'polydisc'")
    fam = hg.AnalyticFamily.from_exprs(exprs, m, radius, kind, _get(spec, "name", ptr, str, ""))
    return ObjectSpec("family", lambda: (fam, None), spec)


_OBJECT_BUILDERS = {"domain": _domain_object, "graph": _graph_object, "family": _family_object}


# ---------------------------------------------------------------------------
# tasks
#
# Each ``_prep_*`` validates a task spec and returns a function
# ``run(seed, threads) -> result dict``.


def _counts(verdicts) -> dict:
    c = {v: 0 for v in VERDICTS}
    for v in verdicts:
        c[v] += 1
    return c


def _samples_or_points(spec, ptr, ctx, dim, domain_key="domain"):
    """Points given inline, or interior samples ``{"n", "min_depth"}`` of a domain."""
    if "points" in spec:
        Z = _points(spec["points"], f"{ptr}/points", dim)
        return lambda seed: Z
    s = _get(spec, "samples", ptr, dict)
    n = _positive(_get(s, "n", f"{ptr}/samples", int), f"{ptr}/samples/n")
    depth = _get(s, "min_depth", f"{ptr}/samples", float, 0.0)
    D = ctx.obj(_get(s, domain_key, f"{ptr}/samples", str), f"{ptr}/samples/{domain_key}", "domain")
    return lambda seed: dom.interior_samples(D.get(), n, seed, depth)


def _prep_classify_qpsh(spec, ptr, ctx):
    q = _get(spec, "q", ptr, int)
    strict = _get(spec, "strict", ptr, bool, False)
    dim = _get(spec, "dim", ptr, int, None)
    e = ctx.expr(_get(spec, "expr", ptr, str), f"{ptr}/expr", dim)
    pts = _samples_or_points(spec, ptr, ctx, dim)

    def run(seed, threads):
        Z = pts(seed)
        vs = [classify_qpsh(e, z, q, strict, ctx.tol) for z in Z]
        return {"expr": print_expr(e), "q": q, "strict": strict,
                "counts": _counts(v.verdict for v in vs),
                "records": [dict(point=dom.point_json(z), **v.to_dict()) for z, v in zip(Z, vs)]}

    return run


def _prep_levi_pcv(spec, ptr, ctx):
    D = ctx.obj(_get(spec, "domain", ptr, str), f"{ptr}/domain", "domain")
    q = _get(spec, "q", ptr, int)
    strict = _get(spec, "strict", ptr, bool, False)
    n = _positive(_get(spec, "n", ptr, int, 50), f"{ptr}/n")

    def run(seed, threads):
        d = D.get()
        P = dom.sample_boundary(d, n, seed)
        vs = [dom.levi_pcv_at_boundary(d, p, q, strict, ctx.tol) for p in P]
        return {"domain": d.to_dict(), "q": q, "strict": strict,
                "counts": _counts(v.verdict for v in vs),
                "records": [dict(point=dom.point_json(p), **v.to_dict()) for p, v in zip(P, vs)]}

    return run


def _norm(spec, ptr):
    kind = _get(spec, "norm", ptr, str, "euclidean")
    if kind == "euclidean":
        return dom.EUCLIDEAN
    if kind == "sup":
        return dom.SUP
    raise ScenarioError(f"{ptr}/norm", "must be 'euclidean' or 'sup'")


def _prep_hartogs_probe(spec, ptr, ctx):
    D = ctx.obj(_get(spec, "domain", ptr, str), f"{ptr}/domain", "domain")
    q = _get(spec, "q", ptr, int)
    norm = _norm(spec, ptr)
    n_rays = _positive(_get(spec, "n_rays", ptr, int, 64), f"{ptr}/n_rays")
    if "points" in spec:
        Z = _points(spec["points"], f"{ptr}/points")
        grid = lambda seed: Z  # noqa: E731
    else:
        g = _get(spec, "grid", ptr, dict)
        n = _positive(_get(g, "n", f"{ptr}/grid", int), f"{ptr}/grid/n")
        depth = _get(g, "min_depth", f"{ptr}/grid", float, 0.0)
        grid = lambda seed: dom.interior_samples(D.get(), n, seed, depth)  # noqa: E731

    def run(seed, threads):
        d = D.get()
        if not 0 <= q <= d.dim - 1:
            raise ValueError("need 0 <= q <= n - 1")
        rep = dom.hartogs_pcv_via_distance(d, q, grid(seed), norm, ctx.tol, n_rays=n_rays,
                                           seed=seed, threads=threads)
        return {"domain": d.to_dict(), "q": q, "norm": norm.kind, **rep.to_dict()}

    return run


def _prep_local_max(spec, ptr, ctx):
    dim = _get(spec, "dim", ptr, int, None)
    e = ctx.expr(_get(spec, "expr", ptr, str), f"{ptr}/expr", dim)
    center = _point(_get(spec, "center", ptr, list), f"{ptr}/center", dim)
    if "frame" in spec:
        frame = _points(spec["frame"], f"{ptr}/frame", center.size).T
    else:
        q = _get(spec, "q", ptr, int)
        if not 0 <= q < center.size:
            raise ScenarioError(f"{ptr}/q", "need 0 <= q < dimension")
        frame = np.eye(center.size, dtype=complex)[:, : q + 1]
    radius = _positive(_get(spec, "radius", ptr, float), f"{ptr}/radius")
    n = _positive(_get(spec, "n_samples", ptr, int, 2000), f"{ptr}/n_samples")

    def run(seed, threads):
        rep = dom.local_max_test(e, center, frame, radius, n, seed)
        return {"expr": print_expr(e), "radius": radius, **rep.to_dict()}

    return run


def _depth_for(ctx, name, ptr):
    o = ctx.obj(name, ptr, ("domain", "graph"))
    if o.kind == "domain":
        return o.get
    return lambda: dom.SublevelDomain(
        Unary("neg", _sum_squares(o.get().defining_functions())), o.get().N,
        name=f"complement of {o.get().name}")


def _sum_squares(phis):
    e = None
    for f in phis:
        t = Binary("^", f, Const(2))
        e = t if e is None else Binary("+", e, t)
    return e


def _prep_sweep(spec, ptr, ctx):
    fam_obj = ctx.obj(_get(spec, "family", ptr, str), f"{ptr}/family", "family")
    depth = _depth_for(ctx, _get(spec, "domain", ptr, str), f"{ptr}/domain") \
        if "domain" in spec else None
    t_steps = _positive(_get(spec, "t_steps", ptr, int, 64), f"{ptr}/t_steps")
    n_radial = _positive(_get(spec, "n_radial", ptr, int, 16), f"{ptr}/n_radial")
    n_angle = _positive(_get(spec, "n_angle", ptr, int, 64), f"{ptr}/n_angle")
    touch = _positive(_get(spec, "touch_tol", ptr, float, 1e-9), f"{ptr}/touch_tol")
    refine = _get(spec, "refine", ptr, bool, False)

    def run(seed, threads):
        fam, own_depth = fam_obj.get()
        D = depth() if depth is not None else own_depth
        if D is None:
            raise ValueError("the sweep needs a domain")
        rep = hg.kontinuitaetssatz_sweep(D, fam, t_steps, n_radial, n_angle,
                                         touch_tol=touch, seed=seed)
        out = {"family": fam.name, "domain": D.to_dict(), **rep.to_dict()}
        if refine:
            fine = hg.kontinuitaetssatz_sweep(D, fam, 2 * t_steps, 2 * n_radial, 2 * n_angle,
                                              touch_tol=touch, seed=seed)
            step = fam.param_radius / n_radial
            stable = fine.verdict == rep.verdict
            if stable and rep.touching_point is not None:
                a = np.array([complex(*c) for c in rep.touching_point])
                b = np.array([complex(*c) for c in fine.touching_point])
                stable = bool(np.max(np.abs(a - b)) <= 10 * step)
            out["refined"] = {"verdict": fine.verdict, "touching_point": fine.touching_point,
                              "stable": stable}
        return out

    return run


def _graph_samples(spec, ptr, f_obj):
    if "points" in spec:
        Z = _points(spec["points"], f"{ptr}/points")
        return lambda seed: Z
    s = _get(spec, "samples", ptr, dict)
    n = _positive(_get(s, "n", f"{ptr}/samples", int), f"{ptr}/samples/n")
    away = s.get("away_from")
    if away is not None:
        coord = _get(away, "coord", f"{ptr}/samples/away_from", int)
        mind = _get(away, "min_abs", f"{ptr}/samples/away_from", float)

    def gen(seed):
        f = f_obj.get()
        if away is None:
            return f.sample(n, seed)
        if not 1 <= coord <= f.n + f.k:
            raise ValueError("away_from coordinate out of range")
        out = np.zeros((0, f.n + f.k), dtype=complex)
        k = 0
        while len(out) < n:
            S = f.sample(4 * n, seed + 7919 * k)
            out = np.vstack([out, S[np.abs(S[:, coord - 1]) >= mind]])
            k += 1
        return out[:n]

    return gen


def _prep_certificate(spec, ptr, ctx):
    f_obj = ctx.obj(_get(spec, "graph", ptr, str), f"{ptr}/graph", "graph")
    q = _get(spec, "q", ptr, int)
    samples = _graph_samples(spec, ptr, f_obj)

    def run(seed, threads):
        f = f_obj.get()
        cert = gr.foliation_certificate(f, q, samples(seed), ctx.tol, threads)
        return {"graph": f.to_dict(), **cert.to_dict()}

    return run


def _prep_trace(spec, ptr, ctx):
    f_obj = ctx.obj(_get(spec, "graph", ptr, str), f"{ptr}/graph", "graph")
    start = _point(_get(spec, "start", ptr, list), f"{ptr}/start")
    steps = _positive(_get(spec, "steps", ptr, int, 200), f"{ptr}/steps")
    h = _positive(_get(spec, "step_size", ptr, float, 1e-2), f"{ptr}/step_size")
    direction = _coord(spec.get("direction", 1.0), f"{ptr}/direction")
    n_cert = _positive(_get(spec, "certificate_samples", ptr, int, 32), f"{ptr}/certificate_samples")
    csv_name = _get(spec, "csv", ptr, str, None)
    ref = spec.get("reference")
    if ref is not None:
        ref_expr = ctx.expr(ref, f"{ptr}/reference")

    def run(seed, threads):
        f = f_obj.get()
        cert = gr.foliation_certificate(f, 1, f.sample(n_cert, seed), ctx.tol, threads)
        tr = gr.trace_leaf(f, start, steps, h, cert, direction, ctx.tol)
        out = {"graph": f.to_dict(), "certificate": cert.overall, **tr.to_dict()}
        idx = np.linspace(0, len(tr.points) - 1, 5).astype(int)
        out["cr_residual"] = max(gr.leaf_cr_residual(f, tr.points[i]) for i in idx)
        if ref is not None:
            out["reference_deviation"] = float(np.max(np.abs(
                evaluate_batch(ref_expr, tr.points, errors="nan"))))
        if csv_name is not None and ctx.out_dir is not None:
            tr.to_csv(ctx.out_dir / csv_name)
            ctx.artifacts.append(csv_name)
            out["csv"] = csv_name
        return out

    return run


def _prep_uk_study(spec, ptr, ctx):
    ks = _get(spec, "ks", ptr, list, [2, 4, 8, 16, 32])
    for i, k in enumerate(ks):
        if not isinstance(k, int) or isinstance(k, bool) or k < 1:
            raise ScenarioError(f"{ptr}/ks/{i}", "expected a positive integer")
    q = _positive(_get(spec, "q", ptr, int, 2), f"{ptr}/q")
    n = _positive(_get(spec, "n_samples", ptr, int, 500), f"{ptr}/n_samples")
    n_psh = _get(spec, "n_psh", ptr, int, 100)

    def run(seed, threads):
        res = hg.uk_study(tuple(ks), q, n, n_psh, seed, ctx.tol)
        res["bound_3_over_k"] = all(r["sup_distance"] <= 3 / r["k"] for r in res["rows"])
        return res

    return run


def _prep_identity_check(spec, ptr, ctx):
    kind = _get(spec, "kind", ptr, str, "levi_merge")
    n = _positive(_get(spec, "n", ptr, int, 100), f"{ptr}/n")
    thr = _get(spec, "threshold", ptr, float, 1e-9)
    if kind == "homogeneity":
        f_obj = ctx.obj(_get(spec, "graph", ptr, str), f"{ptr}/graph", "graph")
        degree = _get(spec, "degree", ptr, int)

        def run(seed, threads):
            f = f_obj.get()
            rng = item_rng(seed, 0)
            V = f.sample(n, seed)
            lam = rng.uniform(0.2, 2.0, n) * np.exp(2j * np.pi * rng.uniform(size=n))
            a = np.array([gr.graph_points(f, (l * v)[None, :])[0, f.n + f.k:] for l, v in zip(lam, V)])
            b = np.array([gr.graph_points(f, v[None, :])[0, f.n + f.k:] for v in V])
            err = np.abs(a - lam[:, None] ** degree * b) / (1 + np.abs(a))
            worst = float(np.max(err))
            return {"kind": kind, "degree": degree, "max_residual": worst, "n": n,
                    "pass": worst <= thr}

        return run
    if kind == "basener":
        f_obj = ctx.obj(_get(spec, "graph", ptr, str), f"{ptr}/graph", "graph")
        min_abs = _get(spec, "min_abs_z2", ptr, float, 0.2)

        def run(seed, threads):
            f = f_obj.get()
            if f.n != 2 or f.k != 0 or f.p != 1:
                raise ValueError("the Basener residual needs a graph over C^2 with one zeta")
            S = f.sample(4 * n, seed)
            S = S[np.abs(S[:, 1]) >= min_abs][:n]
            worst = max(gr.basener_residual(f.f_zeta[0], z) for z in S)
            return {"kind": kind, "max_residual": worst, "n": len(S), "pass": worst <= thr}

        return run
    if kind != "levi_merge":
        raise ScenarioError(f"{ptr}/kind", "must be levi_merge, homogeneity or basener")
    f_obj = ctx.obj(_get(spec, "graph", ptr, str), f"{ptr}/graph", "graph")
    mu = _get(spec, "mu", ptr, float, 1.0)
    j1 = _get(spec, "phi1_index", ptr, int, 1)

    def run(seed, threads):
        f = f_obj.get()
        phis = f.defining_functions()
        if not 1 <= j1 <= len(phis):
            raise ValueError("phi1_index out of range")
        rng = item_rng(seed, 0)
        worst = 0.0
        for P in gr.graph_points(f, f.sample(n, seed)):
            jets = [jet2(phi, P, real=True) for phi in phis]
            H = holomorphic_tangent([jets[j1 - 1].grad_z], ctx.tol)
            X = H.basis @ (rng.standard_normal(H.dim) + 1j * rng.standard_normal(H.dim))
            r = hg.verify_levi_identity(phis[j1 - 1], phis, mu, P, X, H)
            worst = max(worst, r.residual)
        return {"kind": kind, "mu": mu, "max_residual": worst, "n": n, "pass": worst <= thr}

    return run


_PREP = {
    "certificate": _prep_certificate,
    "classify_qpsh": _prep_classify_qpsh,
    "hartogs_probe": _prep_hartogs_probe,
    "identity_check": _prep_identity_check,
    "levi_pcv": _prep_levi_pcv,
    "local_max": _prep_local_max,
    "sweep": _prep_sweep,
    "trace": _prep_trace,
    "uk_study": _prep_uk_study,
}


# ---------------------------------------------------------------------------
# loading and running


@dataclass
class Scenario:
    name: str
    seed: int
    threads: int | None
    fail_fast: bool
    context: Context
    tasks: list

    def run(self, seed: int | None = None, threads: int | None = None,
            out_dir: Path | None = None) -> tuple[dict, int]:
        """Execute all tasks; returns ``(report, exit_code)``."""
        seed = self.seed if seed is None else seed
        threads = self.threads if threads is None else threads
        self.context.out_dir = out_dir
        records = []
        failed = False
        for i, (tid, op, fn) in enumerate(self.tasks):
            task_seed = int(item_rng(seed, i).integers(2 ** 31))
            rec = {"id": tid, "op": op}
            try:
                rec["result"] = jsonable(fn(task_seed, threads))
                rec["status"] = "ok"
            except (LeviLabError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
                rec["status"] = "error"
                rec["error"] = {"type": type(exc).__name__, "message": str(exc)}
                failed = True
            records.append(rec)
            if failed and self.fail_fast:
                break
        report = {"scenario": self.name, "seed": seed, "tasks": records,
                  "artifacts": sorted(self.context.artifacts)}
        return report, (3 if failed else 0)


def load_scenario(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("", "scenario must be a JSON object")
    _check_keys(data, {"name", "seed", "threads", "tolerance", "exprs", "objects", "tasks",
                       "fail_fast", "description"}, "")
    name = _get(data, "name", "", str, "scenario")
    seed = _get(data, "seed", "", int, 0)
    threads = _get(data, "threads", "", (int, type(None)), None)
    fail_fast = _get(data, "fail_fast", "", bool, False)
    ctx = Context()
    tol = _get(data, "tolerance", "", dict, {})
    _check_keys(tol, {"tol"}, "/tolerance")
    ctx.tol = _get(tol, "tol", "/tolerance", float, DEFAULT_TOL)
    if not 0 < ctx.tol < 1:
        raise ScenarioError("/tolerance/tol", "must lie in (0, 1)")
    for key, src in _get(data, "exprs", "", dict, {}).items():
        if not isinstance(key, str) or not key.isidentifier():
            raise ScenarioError(f"/exprs/{key}", "names must be identifiers")
        ctx.exprs[key] = ctx.expr(src, f"/exprs/{key}")
    for key, spec in _get(data, "objects", "", dict, {}).items():
        ptr = f"/objects/{key}"
        if not isinstance(spec, dict):
            raise ScenarioError(ptr, "expected an object")
        kind = _get(spec, "type", ptr, str)
        if kind not in _OBJECT_BUILDERS:
            raise ScenarioError(f"{ptr}/type", "must be domain, graph or family")
        ctx.objects[key] = _OBJECT_BUILDERS[kind](spec, ptr, ctx)
    tasks = []
    ids = set()
    for i, spec in enumerate(_get(data, "tasks", "", list)):
        ptr = f"/tasks/{i}"
        if not isinstance(spec, dict):
            raise ScenarioError(ptr, "expected an object")
        op = _get(spec, "op", ptr, str)
        if op not in _PREP:
            raise ScenarioError(f"{ptr}/op", f"unknown task {op!r}; expected one of {', '.join(TASK_OPS)}")
        tid = _get(spec, "id", ptr, str, f"task{i}")
        if tid in ids:
            raise ScenarioError(f"{ptr}/id", f"duplicate task id {tid!r}")
        ids.add(tid)
        tasks.append((tid, op, _PREP[op](spec, ptr, ctx)))
    return Scenario(name, seed, threads, fail_fast, ctx, tasks)


def read_scenario(path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError("", f"cannot read scenario: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("", f"invalid JSON at line {exc.lineno}, column {exc.colno}") from None
    return load_scenario(data)


def bundled_scenarios() -> dict:
    """Bundled scenario names mapped to their paths."""
    root = resources.files("levilab") / "scenarios"
    return {p.name[:-5]: Path(str(p)) for p in sorted(root.iterdir(), key=lambda p: p.name)
            if p.name.endswith(".json")}


def resolve_scenario(path_or_name: str) -> Path:
    p = Path(path_or_name)
    if p.exists():
        return p
    bundled = bundled_scenarios()
    if path_or_name in bundled:
        return bundled[path_or_name]
    raise ScenarioError("", f"no scenario file or bundled scenario named {path_or_name!r}")


def report_text(report: dict) -> str:
    """Human-readable summary, one block per task."""
    lines = [f"scenario {report['scenario']} (seed {report['seed']})"]
    for t in report["tasks"]:
        head = f"[{t['status']}] {t['id']} ({t['op']})"
        if t["status"] != "ok":
            lines.append(f"{head}: {t['error']['type']}: {t['error']['message']}")
            continue
        lines.append(f"{head}: {_summary_line(t['op'], t['result'])}")
    if report.get("artifacts"):
        lines.append("artifacts: " + ", ".join(report["artifacts"]))
    return "\n".join(lines) + "\n"


def _summary_line(op: str, r: dict) -> str:
    if "counts" in r:
        return ", ".join(f"{k} {v}" for k, v in sorted(r["counts"].items()))
    if op == "certificate":
        s = r["summary"]
        return (f"{r['overall']} (ok {s['ok']}, flagged {s['flagged']}, "
                f"cr_mismatch {s['cr_mismatch']}, refuted {s['refuted']}, dims {s['dims_H']})")
    if op == "sweep":
        extra = ""
        if "refined" in r:
            extra = f"; refined {r['refined']['verdict']}, stable {r['refined']['stable']}"
        return f"{r['verdict']} margin {r['margin']}{extra}"
    if op == "local_max":
        return f"violation {r['violation']} (interior minus boundary max {r['worst']})"
    if op == "trace":
        return f"{r['n_points']} points, max on-graph residual {r['max_residual']}"
    if op == "uk_study":
        return (f"strictly decreasing {r['strictly_decreasing']}, fitted C {r['fitted_C']}, "
                f"within 3/k {r['bound_3_over_k']}")
    if op == "identity_check":
        return f"{r['kind']} max residual {r['max_residual']} pass {r['pass']}"
    return ""
