"""Rotationally symmetric manifolds ``dr^2 + phi(r)^2 g_{S^{n-1}}``.

These are the test manifolds on which every left-hand side of the comparison
inequalities is computed: Ricci eigenvalues, integral curvature norms, pole-ball
geometry and the mean-curvature excess. The sup over centres that appears in
the mean-curvature norm is replaced by the pole, the only centre with explicit
polar geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError
from .numerics import DEFAULT_TOL, Tolerance, integrate
from .spaceform import ModelGeometry, SpaceForm, cs, invert_volume, model_mean_curvature, radial_limit, sn, sphere_area

Warp = Callable[[np.ndarray], np.ndarray]

_POLE_STEP = 1e-4
# below this radius the mean-curvature excess is O(r) and its 2p-th power
# weighted by r^(n-1) is negligible; evaluating it there only amplifies round-off
_EXCESS_GUARD = 1e-8
_RICCI_FLOOR = 1e-12


@dataclass(frozen=True)
class WarpedManifold:
    """Warped product over ``[0, R]`` with warping function ``phi``.

    ``closed`` marks a second pole at ``r = R`` (``phi(R) = 0``); otherwise the
    manifold is a ball with boundary at ``r = R``. ``sectional`` optionally gives
    ``(1 - phi'^2) / phi^2`` in a cancellation-free form; the direct formula
    loses every digit near the poles.
    """

    n: int
    R: float
    phi: Warp
    dphi: Warp
    ddphi: Warp
    closed: bool = False
    name: str = "custom"
    params: dict = field(default_factory=dict, compare=False)
    pole_tol: float = field(default=1e-6, compare=False)
    sectional: Warp | None = field(default=None, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"dimension must be an integer >= 2, got {self.n}")
        if not self.R > 0:
            raise DomainError(f"radial extent must be positive, got {self.R}")
        self._check_pole()

    def _check_pole(self):
        h = _POLE_STEP
        if abs(float(self.phi(np.array([0.0]))[0])) > 1e-12:
            raise DomainError("warping function must vanish at the pole")
        if abs(float(self.phi(np.array([h]))[0]) / h - 1) > self.pole_tol:
            raise DomainError("warping function must have unit slope at the pole")
        if abs(float(self.ddphi(np.array([h]))[0])) > 1e-3:
            raise DomainError("warping function must have vanishing second derivative at the pole")
        samples = np.linspace(0, self.R, 513)[1:-1]
        if np.any(self.phi(samples) <= 0):
            raise DomainError("warping function must be positive on (0, R)")
        if self.closed:
            end = np.array([self.R])
            if abs(float(self.phi(end)[0])) > 1e-9:
                raise DomainError("closed manifold needs phi(R) = 0")
            if abs(float(self.dphi(end)[0]) + 1) > self.pole_tol:
                raise DomainError("closed manifold needs phi'(R) = -1")

    @property
    def diam(self) -> float:
        # pole to pole, or twice the radius for a ball (an upper bound)
        return self.R if self.closed else 2 * self.R

    @cached_property
    def total_volume(self) -> float:
        return self.volume(self.R)

    def volume(self, r: float, tol: Tolerance = DEFAULT_TOL) -> float:
        if r == 0:
            return 0.0
        return sphere_area(self.n) * integrate(lambda s: self.phi(s) ** (self.n - 1), 0.0, r, tol)

    def area(self, r):
        return sphere_area(self.n) * self.phi(np.asarray(r, dtype=float)) ** (self.n - 1)


# --- presets ---------------------------------------------------------------


def space_form_warp(n: int, k: float, R: float | None = None) -> WarpedManifold:
    """The model space itself, ``phi = sn_k``; closed when ``R = pi/sqrt(k)``."""
    limit = radial_limit(k)
    if R is None:
        if math.isinf(limit):
            raise DomainError("radial extent required for k <= 0")
        R = limit
    if R > limit:
        raise DomainError(f"R={R} exceeds pi/sqrt(k)")
    return WarpedManifold(
        n=n,
        R=float(R),
        phi=lambda r: sn(k, r),
        dphi=lambda r: cs(k, r),
        ddphi=lambda r: -k * sn(k, r),
        sectional=lambda r: np.full(np.shape(r), float(k)),
        closed=(R == limit),
        name="sphere" if k > 0 else ("euclidean" if k == 0 else "hyperbolic"),
        params={"k": k},
    )


def euclidean(n: int, R: float) -> WarpedManifold:
    return space_form_warp(n, 0.0, R)


def sphere(n: int, k: float = 1.0, R: float | None = None) -> WarpedManifold:
    if not k > 0:
        raise DomainError("sphere needs k > 0")
    return space_form_warp(n, k, R)


def hyperbolic(n: int, R: float, k: float = -1.0) -> WarpedManifold:
    if not k < 0:
        raise DomainError("hyperbolic space needs k < 0")
    return space_form_warp(n, k, R)


def perturbed_sphere(n: int, delta: float, R: float | None = None) -> WarpedManifold:
    """``phi = sin r (1 + delta sin^2 r)``: closed on ``[0, pi]`` or a cap of radius R."""
    if R is None:
        R = math.pi
    if not 0 < R <= math.pi:
        raise DomainError(f"cap radius must lie in (0, pi], got {R}")

    def phi(r):
        s = np.sin(r)
        return s * (1 + delta * s * s)

    def dphi(r):
        s = np.sin(r)
        return np.cos(r) * (1 + 3 * delta * s * s)

    def ddphi(r):
        s = np.sin(r)
        return s * (-1 + 6 * delta - 9 * delta * s * s)

    def sectional(r):
        # 1 - phi'^2 = s^2 (1 - cos^2 r (6 delta + 9 delta^2 s^2)) with s = sin r
        s2 = np.sin(r) ** 2
        return (1 - np.cos(r) ** 2 * (6 * delta + 9 * delta * delta * s2)) / (1 + delta * s2) ** 2

    return WarpedManifold(
        n=n, R=float(R), phi=phi, dphi=dphi, ddphi=ddphi, sectional=sectional,
        closed=(R == math.pi), name="perturbed_sphere", params={"delta": delta},
    )


def from_table(n: int, r, phi, name: str = "table") -> WarpedManifold:
    """Interpolate a sampled warping function.

    The spline is fitted to the even extension of ``phi(r)/r`` with value 1 at
    the pole, so ``phi(0) = 0``, ``phi'(0) = 1`` and ``phi''(0) = 0`` hold exactly
    and all derivatives come from the spline itself. A last sample with
    ``phi = 0`` makes the manifold closed.
    """
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if r.ndim != 1 or r.shape != phi.shape or len(r) < 4:
        raise DomainError("table needs at least four (r, phi) rows")
    if r[0] != 0 or phi[0] != 0:
        raise DomainError("table must start with the row '0 0'")
    if np.any(np.diff(r) <= 0):
        raise DomainError("table radii must be strictly ascending")
    w = np.empty_like(phi)
    w[0] = 1.0
    w[1:] = phi[1:] / r[1:]
    spline = CubicSpline(np.concatenate([-r[:0:-1], r]), np.concatenate([w[:0:-1], w]))
    d1 = spline.derivative(1)
    d2 = spline.derivative(2)
    closed = abs(phi[-1]) <= 1e-12 * np.max(np.abs(phi))

    return WarpedManifold(
        n=n,
        R=float(r[-1]),
        phi=lambda x: x * spline(x),
        dphi=lambda x: spline(x) + x * d1(x),
        ddphi=lambda x: 2 * d1(x) + x * d2(x),
        closed=bool(closed),
        name=name,
        pole_tol=1e-3,
    )


def load_table(path: str | Path, n: int) -> WarpedManifold:
    """Read a whitespace-separated ``r phi`` table (first row ``0 0``)."""
    data = np.loadtxt(path, ndmin=2)
    if data.shape[1] != 2:
        raise DomainError(f"{path}: expected two columns 'r phi'")
    return from_table(n, data[:, 0], data[:, 1], name=Path(path).stem)


PRESETS = {
    "euclidean": euclidean,
    "sphere": sphere,
    "hyperbolic": hyperbolic,
    "perturbed_sphere": perturbed_sphere,
}


# --- curvature and geometry ------------------------------------------------


def _interior(W: WarpedManifold, r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0) or np.any(r >= W.R):
        raise DomainError(f"radius must lie in (0, {W.R})")
    return r


def ricci_eigenvalues(W: WarpedManifold, r):
    """Radial and tangential Ricci eigenvalues at distance ``r`` from the pole."""
    scalar = np.ndim(r) == 0
    r = _interior(W, r)
    f, df, ddf = W.phi(r), W.dphi(r), W.ddphi(r)
    radial = -(W.n - 1) * ddf / f
    if W.sectional is not None:
        tangential = -ddf / f + (W.n - 2) * W.sectional(r)
    else:
        tangential = -ddf / f + (W.n - 2) * (1 - df) * (1 + df) / (f * f)
    if scalar:
        return float(radial), float(tangential)
    return radial, tangential


def min_ricci(W: WarpedManifold, r):
    radial, tangential = ricci_eigenvalues(W, r)
    return np.minimum(radial, tangential)


@dataclass(frozen=True)
class IntegralNorm:
    """``(int (max(0, (n-1)k - rho))^p dvol)^(1/p)`` over the pole ball of ``radius``."""

    p: float
    k: float
    radius: float
    value: float
    whole: bool = False


def _check_exponent(W: WarpedManifold, p: float):
    if not p > W.n / 2:
        raise DomainError(f"exponent p must exceed n/2 = {W.n / 2}, got {p}")


def integral_ricci_norm(
    W: WarpedManifold, p: float, k: float, radius: float | None = None, tol: Tolerance = DEFAULT_TOL
) -> IntegralNorm:
    _check_exponent(W, p)
    whole = radius is None
    radius = W.R if whole else float(radius)
    if not 0 < radius <= W.R:
        raise DomainError(f"radius must lie in (0, {W.R}]")
    threshold = (W.n - 1) * k
    # pointwise round-off of the curvature formulas, not a real excess
    floor = _RICCI_FLOOR * max(1.0, abs(threshold))

    def integrand(r):
        excess = threshold - min_ricci(W, r)
        excess[excess <= floor] = 0.0
        return excess**p * W.phi(r) ** (W.n - 1)

    total = integrate(integrand, 0.0, radius, tol)
    return IntegralNorm(p=p, k=k, radius=radius, value=(sphere_area(W.n) * total) ** (1 / p), whole=whole)


def ball_geometry(W: WarpedManifold, r: float, tol: Tolerance = DEFAULT_TOL) -> ModelGeometry:
    if not 0 < r <= W.R:
        raise DomainError(f"radius must lie in (0, {W.R}]")
    x = np.array([float(r)])
    f = float(W.phi(x)[0])
    mean = (W.n - 1) * float(W.dphi(x)[0]) / f if f > 0 else -math.inf
    return ModelGeometry(r=float(r), volume=W.volume(r, tol), area=sphere_area(W.n) * f ** (W.n - 1), mean_curv=mean)


def ball_radius(W: WarpedManifold, beta: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Radius of the pole ball with volume ``beta``."""
    if not 0 < beta < W.total_volume:
        raise DomainError(f"volume must lie in (0, {W.total_volume!r}), got {beta!r}")
    return invert_volume(lambda r: W.volume(r, tol), beta, W.R, tol)


def ball_profile(W: WarpedManifold, beta: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Boundary area of the pole ball enclosing volume ``beta``.

    An upper bound for the isoperimetric profile, exact on round space forms.
    """
    return float(W.area(ball_radius(W, beta, tol)))


def m_plus_norm(W: WarpedManifold, p: float, k: float, radius: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """``L^{2p}`` norm over the pole ball of the positive mean-curvature excess
    ``((n-1) phi'/phi - mbar_k)_+``."""
    _check_exponent(W, p)
    if not 0 < radius <= W.R:
        raise DomainError(f"radius must lie in (0, {W.R}]")
    if k > 0 and radius >= radial_limit(k):
        raise DomainError("model mean curvature undefined beyond pi/sqrt(k)")
    M = SpaceForm(W.n, k)

    def integrand(r):
        out = np.zeros_like(r)
        ok = r > _EXCESS_GUARD
        x = r[ok]
        excess = np.maximum(0.0, (W.n - 1) * W.dphi(x) / W.phi(x) - model_mean_curvature(M, x))
        out[ok] = excess ** (2 * p) * W.phi(x) ** (W.n - 1)
        return out

    total = integrate(integrand, 0.0, radius, tol)
    return (sphere_area(W.n) * total) ** (1 / (2 * p))
