"""Closed-form geometry of the simply connected space forms.

Everything is expressed through the comparison function ``sn_k`` (the solution
of ``u'' + k u = 0`` with ``u(0) = 0, u'(0) = 1``) and its derivative ``cs_k``.
Volumes are radial integrals of ``sn_k**(n-1)`` evaluated by adaptive
quadrature; profiles come from inverting those volumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .numerics import DEFAULT_TOL, Tolerance, integrate, solve_monotone

# |k| t^2 below this switches sn/cs to their Taylor series
_SERIES_CUTOFF = 1e-12
# relative slack allowed past pi/sqrt(k)
_EDGE_SLACK = 1e-12
# endpoint guard for profiles on compact models, relative to |M|
_VOLUME_GUARD = 1e-12


def _as_output(values: np.ndarray, scalar: bool):
    return float(values) if scalar else values


def radial_limit(k: float) -> float:
    """Largest admissible geodesic radius: ``pi/sqrt(k)`` for k > 0, else inf."""
    return math.pi / math.sqrt(k) if k > 0 else math.inf


def _check_radius(k: float, t: np.ndarray) -> None:
    if np.any(t < 0) or np.any(np.isnan(t)):
        raise DomainError("radius must be non-negative")
    if k > 0 and np.any(t > radial_limit(k) * (1 + _EDGE_SLACK)):
        raise DomainError(f"radius exceeds pi/sqrt(k) = {radial_limit(k)!r}")


def sn(k: float, t):
    """Comparison function ``sn_k(t)``; accepts scalars or arrays."""
    scalar = np.ndim(t) == 0
    t = np.asarray(t, dtype=float)
    _check_radius(k, t)
    if k == 0:
        return _as_output(t.copy(), scalar)
    a = math.sqrt(abs(k))
    with np.errstate(over="ignore"):
        exact = np.sin(a * t) / a if k > 0 else np.sinh(a * t) / a
    series = t - k * t**3 / 6 + k * k * t**5 / 120
    out = np.where(abs(k) * t * t < _SERIES_CUTOFF, series, exact)
    return _as_output(out, scalar)


def cs(k: float, t):
    """Derivative of ``sn_k``: ``cos(sqrt(k) t)``, ``1`` or ``cosh(sqrt(-k) t)``."""
    scalar = np.ndim(t) == 0
    t = np.asarray(t, dtype=float)
    _check_radius(k, t)
    if k == 0:
        return _as_output(np.ones_like(t), scalar)
    a = math.sqrt(abs(k))
    with np.errstate(over="ignore"):
        exact = np.cos(a * t) if k > 0 else np.cosh(a * t)
    series = 1 - k * t * t / 2 + k * k * t**4 / 24
    out = np.where(abs(k) * t * t < _SERIES_CUTOFF, series, exact)
    return _as_output(out, scalar)


def sphere_area(n: int) -> float:
    """Area ``|S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)`` of the unit sphere in R^n."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


def unit_ball_volume(n: int) -> float:
    """Volume ``omega_n`` of the Euclidean unit ball in R^n."""
    return sphere_area(n) / n


@dataclass(frozen=True)
class SpaceForm:
    """The model space of dimension ``n`` and constant sectional curvature ``k``."""

    n: int
    k: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"dimension must be an integer >= 2, got {self.n}")
        if not math.isfinite(self.k):
            raise DomainError("curvature must be finite")

    @property
    def radial_limit(self) -> float:
        return radial_limit(self.k)

    @property
    def compact(self) -> bool:
        return self.k > 0

    @property
    def total_volume(self) -> float:
        if self.k <= 0:
            return math.inf
        return sphere_area(self.n) * power_integral(self.n, self.k, self.radial_limit)

    def volume(self, r: float, tol: Tolerance = DEFAULT_TOL) -> float:
        return model_volume(self, r, tol)

    def area(self, r):
        return sphere_area(self.n) * sn(self.k, r) ** (self.n - 1)

    def mean_curvature(self, r):
        return model_mean_curvature(self, r)


@dataclass(frozen=True)
class ModelGeometry:
    """Geodesic ball of radius ``r`` about a point (or pole)."""

    r: float
    volume: float
    area: float
    mean_curv: float


@lru_cache(maxsize=256)
def _power_integral_cached(n: int, k: float, r: float, tol: Tolerance) -> float:
    return integrate(lambda s: sn(k, s) ** (n - 1), 0.0, r, tol)


def power_integral(n: int, k: float, r: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """``int_0^r sn_k(s)^(n-1) ds``."""
    _check_radius(k, np.asarray(r, dtype=float))
    r = min(float(r), radial_limit(k))
    return _power_integral_cached(int(n), float(k), r, tol)


def model_volume(M: SpaceForm, r: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Volume of the geodesic ball of radius ``r`` in ``M``."""
    if r == 0:
        return 0.0
    _check_radius(M.k, np.asarray(r, dtype=float))
    r = min(float(r), M.radial_limit)
    return sphere_area(M.n) * integrate(lambda s: sn(M.k, s) ** (M.n - 1), 0.0, r, tol)


def model_mean_curvature(M: SpaceForm, r):
    """Mean curvature ``(n-1) cs_k / sn_k`` of the geodesic sphere of radius ``r``."""
    scalar = np.ndim(r) == 0
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("mean curvature of a geodesic sphere needs r > 0")
    out = (M.n - 1) * cs(M.k, r) / sn(M.k, r)
    return _as_output(out, scalar)


def model_geometry(M: SpaceForm, r: float, tol: Tolerance = DEFAULT_TOL) -> ModelGeometry:
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r}")
    if M.k > 0 and r >= M.radial_limit * (1 + _EDGE_SLACK):
        raise DomainError(f"radius {r} outside (0, pi/sqrt(k)]")
    return ModelGeometry(
        r=float(r),
        volume=model_volume(M, r, tol),
        area=float(M.area(min(r, M.radial_limit))),
        mean_curv=float(model_mean_curvature(M, min(r, M.radial_limit))),
    )


def invert_volume(volume, beta: float, hi: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Radius at which the increasing function ``volume`` reaches ``beta``.

    ``hi`` may be ``inf``; the bracket is then grown by doubling.
    """
    if math.isinf(hi):
        hi = 1.0
        for _ in range(200):
            if volume(hi) >= beta:
                break
            hi *= 2.0
        else:
            raise DomainError(f"volume {beta!r} not reached")
    return solve_monotone(volume, beta, 0.0, hi, tol)


def model_radius(M: SpaceForm, beta: float, scale: float = 1.0, tol: Tolerance = DEFAULT_TOL) -> float:
    """Radius ``r`` with ``scale * |B(r)| = beta`` (``scale = 1/2`` for half-balls)."""
    if not beta > 0:
        raise DomainError(f"volume must be positive, got {beta}")
    if M.compact:
        total = scale * M.total_volume
        if beta >= total * (1 - _VOLUME_GUARD) or beta <= total * _VOLUME_GUARD:
            raise DomainError(f"volume {beta!r} outside (0, {total!r})")
    return invert_volume(lambda r: scale * model_volume(M, r, tol), beta, M.radial_limit, tol)


def model_h2(M: SpaceForm, beta: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Isoperimetric profile of the model: area of the geodesic ball of volume ``beta``."""
    return float(M.area(model_radius(M, beta, tol=tol)))


def model_h1(M: SpaceForm, beta: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Normalized profile ``h2(beta |M|) / |M|`` of a compact model."""
    if not M.compact:
        raise DomainError("normalized profile needs k > 0")
    if not 0 < beta < 1:
        raise DomainError(f"normalized volume must lie in (0, 1), got {beta}")
    total = M.total_volume
    return model_h2(M, beta * total, tol) / total


def half_space_h2(M: SpaceForm, beta: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Relative profile of a half space: half-balls centred on the boundary."""
    r = model_radius(M, beta, scale=0.5, tol=tol)
    return 0.5 * float(M.area(r))


@dataclass(frozen=True)
class LevyGromovConstants:
    """Diameter-dependent constants of the improved Levy-Gromov comparison.

    ``epsilon`` uses ``int_0^{pi/sqrt(k)} sin(sqrt(k) t) dt`` as its normalizer,
    not the ``sn_k^(n-1)`` integral used elsewhere.
    """

    d_prime: float
    gamma: float
    lam: float
    L: float
    epsilon: float | None


def levy_gromov_constants(
    M: SpaceForm, diam: float, alpha: float | None = None, tol: Tolerance = DEFAULT_TOL
) -> LevyGromovConstants:
    if not M.compact:
        raise DomainError("constants need k > 0")
    if not diam > 0:
        raise DomainError(f"diameter must be positive, got {diam}")
    if alpha is not None and alpha < 1:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    d_prime = min(M.radial_limit, float(diam))
    gamma = power_integral(M.n, M.k, M.radial_limit, tol)
    lam = gamma if d_prime == M.radial_limit else power_integral(M.n, M.k, d_prime, tol)
    L = (gamma / lam) ** (1.0 / M.n)
    epsilon = None
    if alpha is not None:
        a = math.sqrt(M.k)
        normalizer = integrate(lambda t: np.sin(a * t), 0.0, M.radial_limit, tol)
        epsilon = (alpha - 1) * L / alpha / normalizer
    return LevyGromovConstants(d_prime=d_prime, gamma=gamma, lam=lam, L=L, epsilon=epsilon)
