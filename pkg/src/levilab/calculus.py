"""Symbolic Wirtinger calculus and second-order jets.

Derivatives are produced as new :class:`~levilab.expr.Expr` trees, so a
derivative can be printed, evaluated in batches or differentiated again.
Only constant folding and the 0/1 identities are applied while building
them; there is no further simplification.
"""

from __future__ import annotations

import threading
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import NonSmoothError
from .expr import (
    Binary,
    Const,
    Expr,
    Guard,
    Max,
    Ref,
    Unary,
    Var,
    as_point,
    evaluate_many,
)

HERMITIAN_WARN = 1e-8

ZERO = Const(0)
ONE = Const(1)
HALF = Const(Fraction(1, 2))
NEG_HALF_I = Const(Fraction(-1, 2), imag=True)


# ---------------------------------------------------------------------------
# smart constructors


def _is_zero(e: Expr) -> bool:
    return isinstance(e, Const) and e.is_zero


def _is_one(e: Expr) -> bool:
    return isinstance(e, Const) and e.is_one


def _fold(op: str, a: Const, b: Const) -> Expr | None:
    """Fold two constants when the result is again a single real/imaginary constant."""
    exact = isinstance(a.value, Fraction) and isinstance(b.value, Fraction)
    x, y = (a.value, b.value) if exact else (float(a.value), float(b.value))
    if op in "+-":
        if a.imag != b.imag:
            return None
        return Const(x + y if op == "+" else x - y, a.imag)
    if op == "*":
        v = x * y
        if a.imag and b.imag:
            v = -v
        return Const(v, a.imag != b.imag)
    if op == "/" and y != 0:
        v = x / y
        if b.imag:
            # x/(i y) = -i x/y ; (i x)/(i y) = x/y
            if not a.imag:
                v = -v
        return Const(v, a.imag != b.imag)
    return None


def add(a: Expr, b: Expr) -> Expr:
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        folded = _fold("+", a, b)
        if folded is not None:
            return folded
    return Binary("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_zero(b):
        return a
    if _is_zero(a):
        return neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        folded = _fold("-", a, b)
        if folded is not None:
            return folded
    return Binary("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_zero(a) or _is_zero(b):
        return ZERO
    if _is_one(a):
        return b
    if _is_one(b):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        folded = _fold("*", a, b)
        if folded is not None:
            return folded
    return Binary("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is_zero(a):
        return ZERO
    if _is_one(b):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        folded = _fold("/", a, b)
        if folded is not None:
            return folded
    return Binary("/", a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value, a.imag)
    if isinstance(a, Unary) and a.op == "neg":
        return a.arg
    return Unary("neg", a)


def power(a: Expr, b: Expr) -> Expr:
    if _is_zero(b):
        return ONE
    if _is_one(b):
        return a
    return Binary("^", a, b)


def conj(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value, True) if a.imag else a
    if isinstance(a, Unary) and a.op == "conj":
        return a.arg
    if isinstance(a, Unary) and a.op in ("re", "im", "abs", "abs2"):
        return a
    return Unary("conj", a)


def func(op: str, a: Expr) -> Expr:
    return Unary(op, a)


# ---------------------------------------------------------------------------
# differentiation


class _Deriver:
    def __init__(self):
        self.memo: dict = {}

    def d(self, e: Expr, j: int, bar: bool, path=()) -> Expr:
        key = (e, j, bar)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        out = self._d(e, j, bar, path)
        self.memo[key] = out
        return out

    def _d(self, e, j, bar, path):
        if isinstance(e, Const):
            return ZERO
        if isinstance(e, Var):
            return ONE if (e.index == j and not bar) else ZERO
        if isinstance(e, Ref):
            return self.d(e.body, j, bar, path + (0,))
        if isinstance(e, Max):
            raise NonSmoothError("max has no symbolic derivative", path)
        if isinstance(e, Guard):
            body_idx = len(e.children) - 1
            db = self.d(e.body, j, bar, path + (body_idx,))
            return Guard(e.cond, None, db)
        if isinstance(e, Unary):
            return self._unary(e, j, bar, path)
        if isinstance(e, Binary):
            return self._binary(e, j, bar, path)
        raise TypeError(type(e))  # pragma: no cover

    def _unary(self, e, j, bar, path):
        g = e.arg
        p0 = path + (0,)
        op = e.op
        if op == "neg":
            return neg(self.d(g, j, bar, p0))
        if op == "conj":
            return conj(self.d(g, j, not bar, p0))
        if op == "re":
            return mul(HALF, add(self.d(g, j, bar, p0), conj(self.d(g, j, not bar, p0))))
        if op == "im":
            return mul(NEG_HALF_I, sub(self.d(g, j, bar, p0), conj(self.d(g, j, not bar, p0))))
        if op == "abs2":
            return add(mul(self.d(g, j, bar, p0), conj(g)),
                       mul(g, conj(self.d(g, j, not bar, p0))))
        if op == "abs":
            d2 = add(mul(self.d(g, j, bar, p0), conj(g)),
                     mul(g, conj(self.d(g, j, not bar, p0))))
            return div(d2, mul(Const(2), e))
        dg = self.d(g, j, bar, p0)
        if op == "log":
            return div(dg, g)
        if op == "exp":
            return mul(e, dg)
        if op == "sqrt":
            return div(dg, mul(Const(2), e))
        raise ValueError(op)  # pragma: no cover

    def _binary(self, e, j, bar, path):
        a, b = e.left, e.right
        op = e.op
        if op == "^":
            return self._pow(e, j, bar, path)
        da = self.d(a, j, bar, path + (0,))
        db = self.d(b, j, bar, path + (1,))
        if op == "+":
            return add(da, db)
        if op == "-":
            return sub(da, db)
        if op == "*":
            return add(mul(da, b), mul(a, db))
        # quotient rule, written to keep the denominator a single power
        if _is_zero(db):
            return div(da, b)
        return div(sub(mul(da, b), mul(a, db)), power(b, Const(2)))

    def _pow(self, e, j, bar, path):
        a, b = e.left, e.right
        da = self.d(a, j, bar, path + (0,))
        if isinstance(b, Const) and not b.imag:
            if _is_zero(da):
                return ZERO
            c = b.value
            new_exp = Const(c - 1) if isinstance(c, Fraction) else Const(float(c) - 1.0)
            return mul(mul(b, power(a, new_exp)), da)
        db = self.d(b, j, bar, path + (1,))
        # a^b = exp(b log a)
        inner = add(mul(db, func("log", a)), div(mul(b, da), a))
        return mul(e, inner)


_DERIVER = _Deriver()
_DERIVER_LOCK = threading.Lock()


def wirtinger_derive(e: Expr, j: int, bar: bool = False) -> Expr:
    """∂e/∂z_j (``bar=False``) or ∂e/∂z̄_j (``bar=True``) as a new tree.

    Raises :class:`NonSmoothError` naming the path of the first ``max``
    node met.  Results are memoised across calls.
    """
    if j < 1:
        raise ValueError("variable index must be positive")
    with _DERIVER_LOCK:
        return _DERIVER.d(e, j, bar)


def d_z(e: Expr, j: int) -> Expr:
    return wirtinger_derive(e, j, False)


def d_zbar(e: Expr, j: int) -> Expr:
    return wirtinger_derive(e, j, True)


# ---------------------------------------------------------------------------
# jets


@dataclass
class Jet2:
    """Second-order Wirtinger jet of an expression at one point.

    ``levi[j, l]`` is ∂²e/∂z_j∂z̄_l.  ``hol_hessian`` (∂²e/∂z_j∂z_l) is
    filled only when requested; it is needed to rebuild the real Hessian.
    """

    value: complex
    grad_z: np.ndarray
    grad_zbar: np.ndarray
    levi: np.ndarray
    symmetrization_defect: float = 0.0
    real_valued: bool = False
    hol_hessian: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return len(self.grad_z)


@dataclass
class JetProgram:
    """Derivative trees of one expression, built once and evaluated many times."""

    expr: Expr
    dim: int
    with_hol_hessian: bool = False
    grads_z: list = field(init=False)
    grads_zbar: list = field(init=False)
    levi_exprs: list = field(init=False)
    hol_exprs: list = field(init=False)

    def __post_init__(self):
        N = self.dim
        e = self.expr
        self.grads_z = [d_z(e, j) for j in range(1, N + 1)]
        self.grads_zbar = [d_zbar(e, l) for l in range(1, N + 1)]
        self.levi_exprs = [d_z(self.grads_zbar[l], j) for j in range(1, N + 1) for l in range(N)]
        self.hol_exprs = []
        if self.with_hol_hessian:
            self.hol_exprs = [d_z(self.grads_z[l], j) for j in range(1, N + 1) for l in range(N)]

    def _all(self):
        return [self.expr, *self.grads_z, *self.grads_zbar, *self.levi_exprs, *self.hol_exprs]

    def arrays(self, Z, *, errors: str = "raise") -> dict:
        """Raw batched jet data: value (M,), grad_z/grad_zbar (M, N), levi/hol (M, N, N)."""
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        N, M = self.dim, Z.shape[0]
        vals = evaluate_many(self._all(), Z, errors=errors)
        out = {
            "value": vals[0],
            "grad_z": vals[1:1 + N].T,
            "grad_zbar": vals[1 + N:1 + 2 * N].T,
            "levi": vals[1 + 2 * N:1 + 2 * N + N * N].T.reshape(M, N, N),
            "hol": None,
        }
        if self.with_hol_hessian:
            out["hol"] = vals[1 + 2 * N + N * N:].T.reshape(M, N, N)
        return out

    def evaluate(self, Z, *, real: bool | None = None, errors: str = "raise",
                 warn: bool = True) -> list[Jet2]:
        arr = self.arrays(Z, errors=errors)
        out = []
        for m in range(arr["value"].shape[0]):
            A = None if arr["hol"] is None else arr["hol"][m].copy()
            out.append(_finish_jet(arr["value"][m], arr["grad_z"][m].copy(),
                                   arr["grad_zbar"][m].copy(), arr["levi"][m].copy(),
                                   A, real, warn))
        return out


def _looks_real(v, gz, gzb) -> bool:
    if not np.isfinite(v) or abs(v.imag) > 1e-10 * (1.0 + abs(v.real)):
        return False
    scale = 1.0 + float(np.max(np.abs(gz), initial=0.0))
    return bool(np.max(np.abs(gzb - np.conj(gz)), initial=0.0) <= 1e-8 * scale)


def _finish_jet(v, gz, gzb, L, A, real, warn) -> Jet2:
    is_real = _looks_real(v, gz, gzb) if real is None else bool(real)
    defect = 0.0
    if is_real and np.all(np.isfinite(L)):
        defect = float(np.max(np.abs(L - L.conj().T), initial=0.0))
        scale = 1.0 + float(np.max(np.abs(L), initial=0.0))
        if warn and defect > HERMITIAN_WARN * scale:
            warnings.warn(
                f"Levi matrix far from Hermitian (defect {defect:.3g}); "
                "is the function real-valued?", RuntimeWarning, stacklevel=3)
        L = 0.5 * (L + L.conj().T)
        v = complex(v.real, 0.0)
    return Jet2(complex(v), gz, gzb, L, defect, is_real, A)


_PROGRAMS: dict = {}
_PROGRAM_LOCK = threading.Lock()


def jet_program(e: Expr, dim: int, with_hol_hessian: bool = False) -> JetProgram:
    """Cached :class:`JetProgram` for ``e`` in ``dim`` variables."""
    key = (e, dim, with_hol_hessian)
    with _PROGRAM_LOCK:
        prog = _PROGRAMS.get(key)
    if prog is None:
        prog = JetProgram(e, dim, with_hol_hessian)
        with _PROGRAM_LOCK:
            if len(_PROGRAMS) > 512:
                _PROGRAMS.clear()
            _PROGRAMS[key] = prog
    return prog


def jet2(e: Expr, p, *, real: bool | None = None, dim: int | None = None,
         with_hol_hessian: bool = False) -> Jet2:
    """Value, Wirtinger gradients and Levi matrix of ``e`` at ``p``.

    ``real`` forces (or forbids) Hermitian symmetrisation; by default the
    function is treated as real-valued when its value and gradients are.
    """
    p = as_point(p)
    N = dim or p.dim
    return jet_program(e, N, with_hol_hessian).evaluate(p.array.reshape(1, -1), real=real)[0]


def jet2_batch(e: Expr, Z, *, real: bool | None = None, errors: str = "raise",
               with_hol_hessian: bool = False) -> list[Jet2]:
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    return jet_program(e, Z.shape[1], with_hol_hessian).evaluate(Z, real=real, errors=errors)


def real_gradient(jet: Jet2) -> np.ndarray:
    """Gradient in real coordinates ordered (x_1..x_N, y_1..y_N)."""
    gx = jet.grad_z + jet.grad_zbar
    gy = 1j * (jet.grad_z - jet.grad_zbar)
    return np.concatenate([gx, gy]).real


def real_hessian(jet: Jet2) -> np.ndarray:
    """Real 2N×2N Hessian of a real-valued function from its Wirtinger jet."""
    if jet.hol_hessian is None:
        raise ValueError("jet was computed without the holomorphic Hessian")
    A = jet.hol_hessian
    B = jet.levi
    Hxx = 2 * (A.real + B.real)
    Hxy = 2 * (-A.imag + B.imag)
    Hyy = 2 * (-A.real + B.real)
    Hxx = 0.5 * (Hxx + Hxx.T)
    Hyy = 0.5 * (Hyy + Hyy.T)
    return np.block([[Hxx, Hxy], [Hxy.T, Hyy]])


def real_derivatives_batch(arr: dict) -> tuple:
    """Real gradients (M, 2N) and Hessians (M, 2N, 2N) of a real function.

    ``arr`` is the output of :meth:`JetProgram.arrays` built with the
    holomorphic Hessian.
    """
    gz = arr["grad_z"]
    grad = np.concatenate([2 * gz.real, -2 * gz.imag], axis=1)
    A, B = arr["hol"], arr["levi"]
    Hxx = 2 * (A.real + B.real)
    Hxy = 2 * (-A.imag + B.imag)
    Hyy = 2 * (-A.real + B.real)
    Hxx = 0.5 * (Hxx + np.swapaxes(Hxx, 1, 2))
    Hyy = 0.5 * (Hyy + np.swapaxes(Hyy, 1, 2))
    top = np.concatenate([Hxx, Hxy], axis=2)
    bottom = np.concatenate([np.swapaxes(Hxy, 1, 2), Hyy], axis=2)
    return grad, np.concatenate([top, bottom], axis=1)


def levi_from_real_hessian(Hr: np.ndarray) -> np.ndarray:
    """Levi matrix ∂²/∂z_j∂z̄_l from a real Hessian ordered (x, y)."""
    N = Hr.shape[0] // 2
    Hxx, Hxy = Hr[:N, :N], Hr[:N, N:]
    Hyx, Hyy = Hr[N:, :N], Hr[N:, N:]
    return 0.25 * (Hxx + Hyy + 1j * (Hxy - Hyx))


# ---------------------------------------------------------------------------
# finite differences


def fd_jet(fun: Callable[[np.ndarray], np.ndarray], z, h: float) -> tuple:
    """Central-difference Wirtinger gradient and Levi matrix.

    ``fun`` maps an (M, N) complex array to M complex values.  Returns
    ``(grad_z, grad_zbar, levi)``.
    """
    z = np.asarray(z, dtype=complex).ravel()
    N = z.size
    D = 2 * N
    E = np.zeros((D, N), dtype=complex)
    for k in range(N):
        E[k, k] = 1.0
        E[N + k, k] = 1j
    pts = [z]
    for a in range(D):
        pts += [z + h * E[a], z - h * E[a]]
    for a in range(D):
        for b in range(a + 1, D):
            for sa in (1, -1):
                for sb in (1, -1):
                    pts.append(z + h * (sa * E[a] + sb * E[b]))
    vals = np.asarray(fun(np.array(pts)), dtype=complex)
    f0 = vals[0]
    first = np.empty(D, dtype=complex)
    Hr = np.empty((D, D), dtype=complex)
    for a in range(D):
        fp, fm = vals[1 + 2 * a], vals[2 + 2 * a]
        first[a] = (fp - fm) / (2 * h)
        Hr[a, a] = (fp - 2 * f0 + fm) / (h * h)
    idx = 1 + 2 * D
    for a in range(D):
        for b in range(a + 1, D):
            fpp, fpm, fmp, fmm = vals[idx:idx + 4]
            idx += 4
            Hr[a, b] = Hr[b, a] = (fpp - fpm - fmp + fmm) / (4 * h * h)
    gx, gy = first[:N], first[N:]
    grad_z = 0.5 * (gx - 1j * gy)
    grad_zbar = 0.5 * (gx + 1j * gy)
    Hxx, Hxy = Hr[:N, :N], Hr[:N, N:]
    Hyx, Hyy = Hr[N:, :N], Hr[N:, N:]
    levi = 0.25 * (Hxx + Hyy + 1j * (Hxy - Hyx))
    return grad_z, grad_zbar, levi


def fd_grad(fun: Callable[[np.ndarray], np.ndarray], z, h: float) -> tuple:
    """Central-difference Wirtinger gradient ``(grad_z, grad_zbar)`` of ``fun`` at ``z``."""
    z = np.asarray(z, dtype=complex).ravel()
    N = z.size
    E = np.eye(N, dtype=complex)
    pts = np.concatenate([z + h * E, z - h * E, z + 1j * h * E, z - 1j * h * E])
    v = np.asarray(fun(pts), dtype=complex)
    gx = (v[:N] - v[N:2 * N]) / (2 * h)
    gy = (v[2 * N:3 * N] - v[3 * N:]) / (2 * h)
    return 0.5 * (gx - 1j * gy), 0.5 * (gx + 1j * gy)


@dataclass
class FDReport:
    """Symbolic-versus-difference errors.

    ``grad_error`` compares with differences of values, ``levi_error``
    with differences of the symbolic ∂/∂z̄ gradient and
    ``levi_error_values`` with second differences of values (the latter
    carries rounding noise of order ``eps·|e|/h²`` and is informational).
    """

    max_rel_error: float
    grad_error: float
    levi_error: float
    nan_flags: list
    levi_error_values: float = float("nan")

    @property
    def ok(self) -> bool:
        return not self.nan_flags and np.isfinite(self.max_rel_error)


def validate_jet_fd(e: Expr, p, h: float = 1e-5) -> FDReport:
    """Compare symbolic grad/Levi with central differences at ``p``.

    The error of each block is ``‖sym − fd‖∞ / max(1, ‖sym‖∞)``, where
    the gradient block is the pair (∂/∂z, ∂/∂z̄).
    ``max_rel_error`` covers the gradient and the Levi matrix obtained by
    differencing the symbolic ∂/∂z̄ gradient.
    """
    if not 1e-8 <= h <= 1e-3:
        raise ValueError("step h must lie in [1e-8, 1e-3]")
    p = as_point(p)
    flags = []
    try:
        jet = jet2(e, p, real=False)
    except Exception as exc:  # report, do not raise
        nan = float("nan")
        return FDReport(nan, nan, nan, [f"symbolic: {exc}"])
    from .expr import evaluate_batch, evaluate_many

    fd = fd_jet(lambda Z: evaluate_batch(e, Z, errors="nan"), p.array, h)
    gzb = jet_program(e, p.dim).grads_zbar
    cols = [fd_grad(lambda Z, g=g: evaluate_many([g], Z, errors="nan")[0], p.array, h)[0]
            for g in gzb]
    levi_fd = np.column_stack(cols)
    for name, arr in zip(("grad_z", "grad_zbar", "levi"), (fd[0], fd[1], levi_fd)):
        if not np.all(np.isfinite(arr)):
            flags.append(f"finite differences of {name} not finite")
    if not (np.all(np.isfinite(jet.grad_z)) and np.all(np.isfinite(jet.levi))):
        flags.append("symbolic jet not finite")

    def rel(sym, num):
        return float(np.max(np.abs(sym - num), initial=0.0) / max(1.0, np.max(np.abs(sym), initial=0.0)))

    # the two Wirtinger halves form one gradient and share one scale
    ge = rel(np.concatenate([jet.grad_z, jet.grad_zbar]), np.concatenate([fd[0], fd[1]]))
    le = rel(jet.levi, levi_fd)
    return FDReport(max(ge, le), ge, le, flags, rel(jet.levi, fd[2]))
