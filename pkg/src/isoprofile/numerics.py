"""Deterministic numerical kernels: adaptive quadrature, monotone inversion and
central differences.

Integrands are called with a 1-D ``numpy`` array of abscissae and must return an
array of the same shape.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import BracketError, DomainError, NonConvergence

ArrayFunc = Callable[[np.ndarray], np.ndarray]

_EPS = np.finfo(float).eps
_MAX_PANELS = 20000

# Gauss-Kronrod 7/15 rule on [-1, 1]; positive nodes, centre last.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])  # 15 ascending nodes
_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS = np.zeros(15)
_GAUSS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


@dataclass(frozen=True)
class Tolerance:
    """Error targets for the adaptive kernels."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_depth: int = 60

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if not self.rel_tol >= 0:
            raise DomainError(f"rel_tol must be non-negative, got {self.rel_tol}")
        if int(self.max_depth) != self.max_depth or self.max_depth < 1:
            raise DomainError(f"max_depth must be a positive integer, got {self.max_depth}")

    def target(self, value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


DEFAULT_TOL = Tolerance()


def _eval_panels(f: ArrayFunc, lefts: np.ndarray, rights: np.ndarray):
    half = 0.5 * (rights - lefts)
    mid = 0.5 * (rights + lefts)
    x = (mid[:, None] + half[:, None] * _NODES[None, :]).ravel()
    y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        raise TypeError("integrand must map an array of abscissae to an array of the same shape")
    if not np.all(np.isfinite(y)):
        bad = x[~np.isfinite(y)][0]
        raise DomainError(f"integrand is not finite at t={bad!r}")
    y = y.reshape(len(lefts), 15)
    kron = half * (y @ _KRONROD)
    gauss = half * (y @ _GAUSS)
    resabs = np.abs(half) * (np.abs(y) @ _KRONROD)
    return kron, np.abs(kron - gauss), resabs


def integrate(
    f: ArrayFunc,
    a: float,
    b: float,
    tol: Tolerance = DEFAULT_TOL,
    endpoint_singular: bool = False,
    singular_exponent: float | None = None,
) -> float:
    """Integrate ``f`` over ``[a, b]`` by globally adaptive Gauss-Kronrod bisection.

    The panel with the largest error estimate ``|K15 - G7|`` is split until the
    summed estimate drops below ``max(abs_tol, rel_tol * |Q|)`` (or reaches the
    round-off floor of the rule).

    With ``endpoint_singular`` the integrand may behave like ``(t - a)**(-s)``
    with ``s < 1``. The substitution ``t = a + (b - a) * u**m`` with
    ``m = 1 / (1 - s)`` removes the singularity; ``singular_exponent`` supplies
    ``s`` (default 0.75, i.e. ``m = 4``). Nodes never touch the endpoints.
    """
    a = float(a)
    b = float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("integration limits must be finite")
    if a > b:
        raise DomainError(f"lower limit {a} exceeds upper limit {b}")
    if a == b:
        return 0.0

    if endpoint_singular:
        s = 0.75 if singular_exponent is None else float(singular_exponent)
        if not s < 1:
            raise DomainError(f"singular exponent must be < 1, got {s}")
        m = 1.0 / (1.0 - s) if s > 0 else 1.0
        width = b - a

        def g(u):
            return f(a + width * u**m) * (width * m * u ** (m - 1.0))

        return integrate(g, 0.0, 1.0, tol)

    kron, err, resabs = _eval_panels(f, np.array([a]), np.array([b]))
    # heap entries: (-err, serial, left, right, depth, value, resabs)
    heap = [(-err[0], 0, a, b, 0, kron[0], resabs[0])]
    total = kron[0]
    total_err = err[0]
    total_abs = resabs[0]
    serial = 1
    while total_err > max(tol.target(total), 50 * _EPS * total_abs):
        neg_err, _, lo, hi, depth, value, rabs = heapq.heappop(heap)
        if depth + 1 > tol.max_depth:
            raise NonConvergence(
                f"quadrature on [{a}, {b}] exceeded max_depth={tol.max_depth} "
                f"(estimated error {total_err:.3g})"
            )
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise NonConvergence(f"quadrature panel at t={lo!r} cannot be split further")
        kv, ev, rv = _eval_panels(f, np.array([lo, mid]), np.array([mid, hi]))
        total += kv[0] + kv[1] - value
        total_err += ev[0] + ev[1] + neg_err
        total_abs += rv[0] + rv[1] - rabs
        for i, (l, r) in enumerate(((lo, mid), (mid, hi))):
            heapq.heappush(heap, (-ev[i], serial, l, r, depth + 1, kv[i], rv[i]))
            serial += 1
        if len(heap) > _MAX_PANELS:
            raise NonConvergence(f"quadrature on [{a}, {b}] needed more than {_MAX_PANELS} panels")
        # the running sums drift; refresh them now and then
        if serial % 512 == 0:
            total = math.fsum(e[5] for e in heap)
            total_err = math.fsum(-e[0] for e in heap)
    return math.fsum(e[5] for e in heap)


def solve_monotone(
    f: Callable[[float], float],
    target: float,
    lo: float,
    hi: float,
    tol: Tolerance = DEFAULT_TOL,
) -> float:
    """Return ``r`` in ``[lo, hi]`` with ``f(r) = target`` for strictly monotone ``f``.

    Uses Brent's bracketing method. The residual is accepted when it is within
    ``max(abs_tol, rel_tol * |target|)``; the relative part absorbs quadrature
    noise when ``f`` is itself an integral of large magnitude.
    """
    if not lo < hi:
        raise DomainError(f"empty bracket [{lo}, {hi}]")
    flo = float(f(lo))
    fhi = float(f(hi))
    if flo == target:
        return lo
    if fhi == target:
        return hi
    if not min(flo, fhi) < target < max(flo, fhi):
        raise BracketError(f"target {target!r} outside [{min(flo, fhi)!r}, {max(flo, fhi)!r}]")
    root, info = brentq(
        lambda x: f(x) - target,
        lo,
        hi,
        xtol=1e-16 * (hi - lo),
        rtol=4 * _EPS,
        maxiter=max(100, 4 * tol.max_depth),
        full_output=True,
        disp=False,
    )
    if not info.converged:
        raise NonConvergence(f"Brent iteration did not converge for target {target!r}")
    resid = abs(f(root) - target)
    if resid > tol.target(target):
        raise NonConvergence(f"inversion residual {resid:.3g} above tolerance for target {target!r}")
    return root


def default_step(x: float) -> float:
    return max(1e-6, 1e-4 * abs(x))


def deriv_central(f: Callable[[float], float], x: float, h: float | None = None) -> float:
    """Second-order central difference ``(f(x+h) - f(x-h)) / 2h``."""
    if h is None:
        h = default_step(x)
    if not h > 0:
        raise DomainError(f"step must be positive, got {h}")
    try:
        return (f(x + h) - f(x - h)) / (2 * h)
    except DomainError as exc:
        raise DomainError(f"central difference at {x} with step {h} leaves the domain: {exc}") from exc


def grid_derivative(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Derivative of sampled data at the interior grid points.

    Three-point formula on (possibly non-uniform) spacing; reduces to the
    central difference on uniform grids. Endpoints are dropped.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape or len(x) < 3:
        raise DomainError("need at least three matching samples")
    if np.any(np.diff(x) <= 0):
        raise DomainError("grid must be strictly ascending")
    return np.gradient(y, x)[1:-1]
