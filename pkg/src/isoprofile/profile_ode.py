"""Differential inequality for the normalized profile ``h1`` and the improved
Levy-Gromov comparison.

The model profile ``phi = h1(., g_k)`` solves

    phi * (k + (phi' / (n-1))^2)^((n-1)/2) = 1/gamma,

where ``gamma = int_0^{pi/sqrt(k)} sn_k^(n-1)``. A profile of a manifold with
small integral curvature excess is an ``alpha``-super-solution of the same
equation with ``gamma`` replaced by ``lambda = int_0^{d'} sn_k^(n-1)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError
from .numerics import DEFAULT_TOL, Tolerance, grid_derivative
from .reports import DEFAULT_REPORT_TOL, ComparisonReport, format_float, map_ordered
from .spaceform import (
    SpaceForm,
    levy_gromov_constants,
    model_h1,
    model_h2,
    model_mean_curvature,
    model_radius,
)

CURVE_KINDS = ("model_h1", "model_h2", "ball_upper", "external")


@dataclass(frozen=True)
class ProfileCurve:
    """Sampled profile: strictly ascending volumes and positive values."""

    grid: np.ndarray
    values: np.ndarray
    kind: str = "external"

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or len(grid) == 0:
            raise DomainError("grid and values must be matching non-empty 1-D arrays")
        if np.any(np.diff(grid) <= 0):
            raise DomainError("grid must be strictly ascending")
        if grid[0] <= 0:
            raise DomainError("volumes must be positive")
        if not np.all(values > 0) or not np.all(np.isfinite(values)):
            raise DomainError("profile values must be finite and positive")
        if self.kind not in CURVE_KINDS:
            raise DomainError(f"unknown curve kind {self.kind!r}")
        grid.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.grid)

    def derivative(self) -> np.ndarray:
        """Central differences at the interior grid points."""
        return grid_derivative(self.grid, self.values)

    def scaled(self, factor: float) -> "ProfileCurve":
        return ProfileCurve(self.grid, factor * self.values, "external")

    def to_csv(self) -> str:
        lines = ["beta,value"]
        lines += [f"{format_float(b)},{format_float(v)}" for b, v in zip(self.grid, self.values)]
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path):
        Path(path).write_text(self.to_csv())

    @classmethod
    def read(cls, path: str | Path, kind: str = "external") -> "ProfileCurve":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["beta", "value"]:
                raise DomainError(f"{path}: expected header 'beta,value'")
            rows = [row for row in reader if row]
        try:
            data = np.array([[float(a), float(b)] for a, b in rows], dtype=float)
        except ValueError as exc:
            raise DomainError(f"{path}: {exc}") from exc
        if len(data) == 0:
            raise DomainError(f"{path}: no rows")
        return cls(data[:, 0], data[:, 1], kind)


def symmetric_grid(count: int, margin: float = 1e-3, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    """``count`` points in ``(lo, hi)`` spaced geometrically towards both ends.

    The lower half is geometric from ``lo + margin*(hi-lo)`` to the midpoint and
    the upper half mirrors it, so the grid is symmetric about the midpoint.
    """
    if count < 2:
        raise DomainError("grid needs at least two points")
    if not 0 < margin < 0.5:
        raise DomainError(f"margin must lie in (0, 1/2), got {margin}")
    if not lo < hi:
        raise DomainError("empty grid range")
    half = (count + 1) // 2
    u = np.geomspace(margin, 0.5, half)
    if count % 2 == 1:
        unit = np.concatenate([u, 1 - u[-2::-1]])
    else:
        # keep the midpoint out so both halves have the same size
        u = np.geomspace(margin, 0.5, half + 1)[:-1]
        unit = np.concatenate([u, 1 - u[::-1]])
    return lo + (hi - lo) * unit


def model_h1_curve(M: SpaceForm, grid: Sequence[float], tol: Tolerance = DEFAULT_TOL, jobs: int = 1) -> ProfileCurve:
    grid = [float(b) for b in grid]
    return ProfileCurve(grid, map_ordered(lambda b: model_h1(M, b, tol), grid, jobs), "model_h1")


def model_h2_curve(M: SpaceForm, grid: Sequence[float], tol: Tolerance = DEFAULT_TOL, jobs: int = 1) -> ProfileCurve:
    grid = [float(b) for b in grid]
    return ProfileCurve(grid, map_ordered(lambda b: model_h2(M, b, tol), grid, jobs), "model_h2")


def sphere_h1_curve(
    n: int, curvature: float, grid: Sequence[float], tol: Tolerance = DEFAULT_TOL, jobs: int = 1
) -> ProfileCurve:
    """Exact ``h1`` of the round sphere of the given curvature.

    Rescaling the metric by ``c^2`` divides ``h1`` by ``c``, so the sphere of
    curvature ``K`` has ``h1 = sqrt(K) * h1(unit sphere)``.
    """
    if not curvature > 0:
        raise DomainError(f"curvature must be positive, got {curvature}")
    base = model_h1_curve(SpaceForm(n, 1.0), grid, tol, jobs)
    return ProfileCurve(base.grid, math.sqrt(curvature) * base.values, "external")


@dataclass(frozen=True)
class OdeCheck:
    """Super-solution residuals at the interior grid points."""

    alpha: float
    k: float
    n: int
    d_prime: float
    lam: float
    grid: np.ndarray
    residuals: np.ndarray

    @property
    def min_residual(self) -> float:
        return float(np.min(self.residuals))

    @property
    def is_supersolution(self) -> bool:
        return bool(np.all(self.residuals >= 0))


def _ode_lhs(n: int, k: float, psi, dpsi):
    return psi * (k + (dpsi / (n - 1)) ** 2) ** ((n - 1) / 2)


def _check_ode_inputs(M: SpaceForm, alpha: float):
    if not M.compact:
        raise DomainError("the profile equation needs k > 0")
    if not alpha > 1:
        raise DomainError(f"alpha must exceed 1, got {alpha}")


def supersolution_residuals(
    curve: ProfileCurve, alpha: float, M: SpaceForm, diam: float, tol: Tolerance = DEFAULT_TOL
) -> OdeCheck:
    """``alpha psi (k + (psi'/(n-1))^2)^((n-1)/2) - 1/lambda`` on the curve's interior."""
    _check_ode_inputs(M, alpha)
    consts = levy_gromov_constants(M, diam, tol=tol)
    dpsi = curve.derivative()
    psi = curve.values[1:-1]
    res = alpha * _ode_lhs(M.n, M.k, psi, dpsi) - 1 / consts.lam
    return OdeCheck(
        alpha=float(alpha),
        k=float(M.k),
        n=M.n,
        d_prime=consts.d_prime,
        lam=consts.lam,
        grid=curve.grid[1:-1].copy(),
        residuals=np.asarray(res, dtype=float),
    )


def model_h1_derivative(M: SpaceForm, beta: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """``d h1/d beta`` of the model, which is the mean curvature of the ball of volume ``beta |M|``."""
    if not M.compact:
        raise DomainError("normalized profile needs k > 0")
    if not 0 < beta < 1:
        raise DomainError(f"normalized volume must lie in (0, 1), got {beta}")
    r = model_radius(M, beta * M.total_volume, tol=tol)
    return float(model_mean_curvature(M, r))


def model_ode_residual(M: SpaceForm, beta: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Residual of the model profile equation at ``beta``; zero up to round-off."""
    if not M.compact:
        raise DomainError("the profile equation needs k > 0")
    phi = model_h1(M, beta, tol)
    dphi = model_h1_derivative(M, beta, tol)
    gamma = levy_gromov_constants(M, M.radial_limit, tol=tol).gamma
    return float(_ode_lhs(M.n, M.k, phi, dphi) - 1 / gamma)


def levy_gromov_check(
    curve: ProfileCurve,
    M: SpaceForm,
    diam: float,
    alpha: float,
    report_tol: float = DEFAULT_REPORT_TOL,
    tol: Tolerance = DEFAULT_TOL,
    jobs: int = 1,
) -> list[ComparisonReport]:
    """Check ``h1(beta) >= L h1(beta, g_k) - epsilon`` at each grid point.

    Margins are ``lhs - rhs``. ``alpha`` close to 1 makes ``epsilon`` vanish and
    leaves the diameter-improved comparison ``h1 >= L h1(g_k)``.
    """
    _check_ode_inputs(M, alpha)
    if np.any(curve.grid >= 1):
        raise DomainError("normalized profile grid must lie in (0, 1)")
    consts = levy_gromov_constants(M, diam, alpha, tol)

    def row(i):
        beta = float(curve.grid[i])
        rhs = consts.L * model_h1(M, beta, tol) - consts.epsilon
        inputs = {"beta": beta, "n": M.n, "k": float(M.k), "diam": float(diam), "alpha": float(alpha),
                  "L": consts.L, "epsilon": consts.epsilon}
        return ComparisonReport.lower("levy_gromov", inputs, float(curve.values[i]), rhs, report_tol)

    return map_ordered(row, list(range(len(curve))), jobs)


def supersolution_reports(
    curve: ProfileCurve,
    alpha: float,
    M: SpaceForm,
    diam: float,
    report_tol: float = DEFAULT_REPORT_TOL,
    tol: Tolerance = DEFAULT_TOL,
) -> list[ComparisonReport]:
    """Residual check as reports: ``lhs = alpha psi (...)``, ``rhs = 1/lambda``."""
    check = supersolution_residuals(curve, alpha, M, diam, tol)
    out = []
    for beta, res in zip(check.grid, check.residuals):
        inputs = {"beta": float(beta), "n": M.n, "k": float(M.k), "diam": float(diam), "alpha": float(alpha)}
        rhs = 1 / check.lam
        out.append(ComparisonReport.lower("supersolution", inputs, float(res + rhs), rhs, report_tol))
    return out
