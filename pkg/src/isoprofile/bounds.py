"""Profile comparison under integral Ricci curvature bounds.

For ``p > n/2`` and a curvature excess ``norm = ||Ric_-^k||_p`` the gap between
the isoperimetric profile of a manifold and that of the ``k``-model obeys

    gap(beta) <= sqrt(kappa * norm) * beta^((2p-1)/2p) + f(beta)

with ``kappa = (n-1)(2p-1)/(2p-n)`` and ``f`` the mean-curvature defect of
model balls whose radii are shrunk by ``Lambda = (1 + C sqrt(norm))^q``. The
relative version (convex body against a half space) swaps ``C`` for
``C1 = 2^(1/2p) C`` and balls for half-balls.

Gaps are witnessed by pole-centred balls of warped products, which only
over-estimate the true profile gap, so a passing check is a genuine
certificate of the inequality on that manifold.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DomainError, NonConvergence, SmallnessViolation
from .numerics import DEFAULT_TOL, Tolerance, integrate, solve_monotone
from .reports import (
    DEFAULT_REPORT_TOL,
    STATUS_DIAMETER,
    STATUS_OK,
    STATUS_SMALLNESS,
    ComparisonReport,
    map_ordered,
)
from .spaceform import (
    SpaceForm,
    cs,
    half_space_h2,
    invert_volume,
    model_h2,
    model_mean_curvature,
    model_radius,
    model_volume,
    power_integral,
    radial_limit,
    sn,
    sphere_area,
)
from .warped import WarpedManifold, ball_profile, ball_radius, integral_ricci_norm

# tighter quadrature for the constants; they multiply everything downstream
_CONST_TOL = Tolerance(abs_tol=1e-13, rel_tol=1e-13, max_depth=60)


@dataclass(frozen=True)
class BoundParams:
    """Inputs of the comparison bound. ``d = inf`` is allowed for k < 0."""

    n: int
    p: float
    k: float
    d: float
    norm: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"dimension must be an integer >= 2, got {self.n}")
        if not self.p > self.n / 2:
            raise DomainError(f"p must exceed n/2 = {self.n / 2}, got {self.p}")
        if not self.d > 0:
            raise DomainError(f"diameter must be positive, got {self.d}")
        if not (self.norm >= 0 and math.isfinite(self.norm)):
            raise DomainError(f"curvature norm must be finite and non-negative, got {self.norm}")
        if self.k > 0 and self.d > radial_limit(self.k) * (1 + 1e-12):
            raise DomainError(f"diameter {self.d} exceeds pi/sqrt(k)")

    @property
    def model(self) -> SpaceForm:
        return SpaceForm(self.n, self.k)


def kappa(n: int, p: float) -> float:
    if not p > n / 2:
        raise DomainError(f"p must exceed n/2 = {n / 2}, got {p}")
    return (n - 1) * (2 * p - 1) / (2 * p - n)


def q_exponent(n: int, p: float, k: float) -> float:
    return 2 * p if k > 0 else 2 * p / n


@lru_cache(maxsize=512)
def _c_integral(n: int, p: float, k: float, d: float) -> float:
    M = SpaceForm(n, k)
    s = n / (2 * p)

    def integrand(t):
        return np.array([model_volume(M, x, _CONST_TOL) for x in t]) ** (-1 / (2 * p))

    if math.isfinite(d):
        return integrate(integrand, 0.0, d, _CONST_TOL, endpoint_singular=True, singular_exponent=s)
    if k >= 0:
        raise NonConvergence("the volume constant diverges on an unbounded range unless k < 0")
    # improper integral: add doubling shells until the tail is negligible
    total = integrate(integrand, 0.0, 1.0, _CONST_TOL, endpoint_singular=True, singular_exponent=s)
    lo = 1.0
    for _ in range(60):
        shell = integrate(integrand, lo, 2 * lo, _CONST_TOL)
        total += shell
        lo *= 2
        if shell <= 1e-14 * total:
            return total
    raise NonConvergence("volume constant did not converge on [0, inf)")


def c_constant(params: BoundParams) -> float:
    """Volume-comparison constant ``sqrt(kappa) int_0^d |B_k(t)|^(-1/2p) dt``."""
    return math.sqrt(kappa(params.n, params.p)) * _c_integral(
        params.n, float(params.p), float(params.k), float(params.d)
    )


def c1_constant(params: BoundParams) -> float:
    """Relative version: the half-ball volume puts a factor ``2^(1/2p)`` on ``C``."""
    return 2 ** (1 / (2 * params.p)) * c_constant(params)


def _volume_factor(params: BoundParams, relative: bool) -> float:
    """``1 + C sqrt(norm)``; avoids touching ``C`` when the norm vanishes."""
    if params.norm == 0:
        return 1.0
    const = c1_constant(params) if relative else c_constant(params)
    return 1 + const * math.sqrt(params.norm)


def dilation_factor(params: BoundParams, relative: bool = False) -> float:
    """``Lambda = (1 + C sqrt(norm))^q``, the bound on ``rbar / r``."""
    return _volume_factor(params, relative) ** q_exponent(params.n, params.p, params.k)


def smallness_factor(params: BoundParams, relative: bool = False) -> float:
    """``(1 + C sqrt(norm))^(2p)``; must not exceed 2 when k > 0."""
    return _volume_factor(params, relative) ** (2 * params.p)


def hypothesis_status(params: BoundParams, relative: bool = False) -> str:
    """Which hypothesis of the k > 0 comparison fails, if any.

    With ``norm = 0`` the bound reduces to the pointwise comparison, which has
    neither a diameter nor a smallness requirement.
    """
    if params.k <= 0 or params.norm == 0:
        return STATUS_OK
    if params.d >= math.pi / (2 * math.sqrt(params.k)):
        return STATUS_DIAMETER
    if smallness_factor(params, relative) > 2:
        return STATUS_SMALLNESS
    return STATUS_OK


def _enforce(params: BoundParams, relative: bool):
    status = hypothesis_status(params, relative)
    if status == STATUS_DIAMETER:
        raise DomainError(f"k > 0 needs diameter < pi/(2 sqrt(k)), got d={params.d}")
    if status == STATUS_SMALLNESS:
        raise SmallnessViolation(smallness_factor(params, relative))


def check_radius_dilation(k: float, n: int, alpha: float, r: float, rbar: float) -> bool:
    """Whether ``rbar`` obeys the radius dilation bound implied by
    ``int_0^rbar sn_k^(n-1) <= alpha int_0^r sn_k^(n-1)``.

    The conclusion is ``rbar <= alpha r`` for k > 0 (needs ``1 <= alpha <= 2``
    and ``r <= pi/(2 sqrt(k))``) and ``rbar <= alpha^(1/n) r`` for k <= 0.
    """
    if alpha < 1:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    if not (r > 0 and rbar >= 0):
        raise DomainError("radii must be positive")
    if k > 0:
        if alpha > 2:
            raise DomainError(f"alpha must be <= 2 for k > 0, got {alpha}")
        if r > math.pi / (2 * math.sqrt(k)) * (1 + 1e-12):
            raise DomainError("r must not exceed pi/(2 sqrt(k)) for k > 0")
        if rbar > radial_limit(k):
            raise DomainError("rbar beyond pi/sqrt(k)")
    lhs = power_integral(n, k, rbar, _CONST_TOL)
    rhs = alpha * power_integral(n, k, r, _CONST_TOL)
    if lhs > rhs * (1 + 1e-10):
        raise DomainError("volume premise does not hold for these radii")
    bound = alpha * r if k > 0 else alpha ** (1 / n) * r
    return rbar <= bound * (1 + 1e-12)


def extremal_radius(k: float, n: int, alpha: float, r: float) -> float:
    """The largest ``rbar`` allowed by the volume premise (premise with equality)."""
    target = alpha * power_integral(n, k, r, _CONST_TOL)
    return invert_volume(lambda x: power_integral(n, k, x, _CONST_TOL), target, radial_limit(k), _CONST_TOL)


def _defect_integral(params: BoundParams, beta: float, factor: float, scale: float, tol: Tolerance) -> float:
    """``int_0^beta (mbar(rbar/factor) - mbar(rbar)) dt`` with ``scale |B(rbar)| = t``.

    Integrated in ``rbar`` (``dt = scale |S^{n-1}| sn^{n-1} drbar``); the products
    ``mbar * sn^{n-1}`` are expanded so the integrand stays finite at both ends.
    """
    M = params.model
    n, k = params.n, params.k
    rbar = model_radius(M, beta, scale=scale, tol=tol)
    weight = scale * sphere_area(n) * (n - 1)

    def integrand(s):
        shrunk = s / factor
        return weight * (cs(k, shrunk) / sn(k, shrunk) * sn(k, s) ** (n - 1) - cs(k, s) * sn(k, s) ** (n - 2))

    return integrate(integrand, 0.0, rbar, tol)


def _check_beta(params: BoundParams, beta: float, scale: float):
    if not beta > 0:
        raise DomainError(f"volume must be positive, got {beta}")
    if params.k > 0 and beta >= scale * params.model.total_volume:
        raise DomainError(f"volume {beta!r} exceeds the model volume")


def f_error(params: BoundParams, beta: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Mean-curvature defect term of the main bound; zero when ``norm = 0``."""
    _check_beta(params, beta, 1.0)
    if params.norm == 0:
        return 0.0
    return _defect_integral(params, beta, dilation_factor(params), 1.0, tol)


def f_error_closed_form(params: BoundParams, beta: float) -> float:
    """The k = 0 defect in closed form: ``(Lambda - 1) n omega_n^(1/n) beta^((n-1)/n)``."""
    if params.k != 0:
        raise DomainError("closed form only for k = 0")
    n = params.n
    omega = sphere_area(n) / n
    return (dilation_factor(params) - 1) * n * omega ** (1 / n) * beta ** ((n - 1) / n)


def f_tilde(params: BoundParams, beta: float, tol: Tolerance = DEFAULT_TOL, constant: float | None = None) -> float:
    """Relative defect term: half-ball radii, constant ``C1`` unless overridden."""
    _check_beta(params, beta, 0.5)
    if params.norm == 0:
        return 0.0
    if constant is None:
        factor = dilation_factor(params, relative=True)
    else:
        factor = (1 + constant * math.sqrt(params.norm)) ** q_exponent(params.n, params.p, params.k)
    return _defect_integral(params, beta, factor, 0.5, tol)


def leading_term(params: BoundParams, beta: float) -> float:
    """``sqrt(kappa * norm) * beta^((2p-1)/2p)``."""
    p = params.p
    return math.sqrt(kappa(params.n, p) * params.norm) * beta ** ((2 * p - 1) / (2 * p))


def main_bound(params: BoundParams, beta: float, tol: Tolerance = DEFAULT_TOL, enforce: bool = True) -> float:
    """Upper bound on ``h2(beta, g) - h2(beta, g_k)``.

    For k > 0 with positive norm the bound is only claimed for diameter below
    ``pi/(2 sqrt(k))`` and dilation factor ``(1 + C sqrt(norm))^(2p) <= 2``;
    ``enforce=False`` evaluates the expression regardless.
    """
    if enforce:
        _enforce(params, relative=False)
    return leading_term(params, beta) + f_error(params, beta, tol)


def relative_bound(params: BoundParams, beta: float, tol: Tolerance = DEFAULT_TOL, enforce: bool = True) -> float:
    """Upper bound on ``h2^Omega(beta, g) - h2^H(beta, g_k)`` for a convex body."""
    if enforce:
        _enforce(params, relative=True)
    return leading_term(params, beta) + f_tilde(params, beta, tol)


def mid_gap_bound(W: WarpedManifold, params: BoundParams, beta: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Manifold-aware bound ``sqrt(kappa norm) beta^((2p-1)/2p) + int_0^beta (mbar(r) - mbar(rbar)) dt``.

    ``r(t)`` is the pole-ball radius of ``W`` and ``rbar(t)`` the model radius at
    the same volume. Integrated in ``r`` with ``dt = |dB(r)| dr``.
    """
    if W.n != params.n:
        raise DomainError("manifold and parameters disagree on the dimension")
    M = params.model
    r0 = ball_radius(W, beta, tol)
    if params.k > 0 and r0 >= M.radial_limit:
        raise DomainError("pole ball radius leaves the model domain")
    guard = 1e-6 * r0

    def integrand(rs):
        out = np.zeros_like(rs)
        for i, r in enumerate(rs):
            if r < guard:
                continue
            t = W.volume(r, tol)
            rbar = invert_volume(lambda x: model_volume(M, x, tol), t, M.radial_limit, tol)
            gap = model_mean_curvature(M, r) - model_mean_curvature(M, rbar)
            out[i] = gap * float(W.area(r))
        return out

    return leading_term(params, beta) + integrate(integrand, 0.0, r0, tol)


def bound_params_for(W: WarpedManifold, p: float, k: float, tol: Tolerance = DEFAULT_TOL) -> BoundParams:
    """Bound parameters with the whole-manifold curvature norm of ``W``."""
    norm = integral_ricci_norm(W, p, k, tol=tol).value
    return BoundParams(n=W.n, p=p, k=k, d=W.diam, norm=norm)


def _inputs(params: BoundParams, beta: float, **extra) -> dict:
    out = {"beta": float(beta)}
    out.update({key: float(v) if key != "n" else int(v) for key, v in asdict(params).items()})
    out.update(extra)
    return out


def verify_h2(
    W: WarpedManifold,
    params: BoundParams,
    betas: Sequence[float],
    report_tol: float = DEFAULT_REPORT_TOL,
    tol: Tolerance = DEFAULT_TOL,
    jobs: int = 1,
) -> list[ComparisonReport]:
    """Check ``I_x(beta) - h2(beta, g_k) <= main_bound`` on a volume grid.

    Rows where a hypothesis of the claim fails carry that status and never pass;
    their right-hand side is still evaluated for diagnostics.
    """
    M = params.model
    status = hypothesis_status(params)

    def row(beta):
        lhs = ball_profile(W, beta, tol) - model_h2(M, beta, tol)
        rhs = main_bound(params, beta, tol, enforce=False)
        return ComparisonReport.upper("h2_gap", _inputs(params, beta, manifold=W.name), lhs, rhs, report_tol, status)

    return map_ordered(row, sorted(float(b) for b in betas), jobs)


# --- relative profile of a geodesic ball -----------------------------------


def _check_ball(M: SpaceForm, Rball: float):
    if not Rball > 0:
        raise DomainError(f"ball radius must be positive, got {Rball}")
    if M.k > 0 and Rball >= math.pi / (2 * math.sqrt(M.k)):
        raise DomainError("geodesic ball is convex only for radius < pi/(2 sqrt(k))")


def cap_angle(M: SpaceForm, Rball: float, s):
    """Half-opening angle of ``dB_x(s)`` inside the ball of radius ``Rball`` whose
    boundary passes through ``x``.

    From the space-form law of cosines,
    ``cos(psi) = 2 cs_k(R) sn_k(s/2)^2 / (sn_k(s) sn_k(R))`` (``s / 2R`` when k = 0).
    """
    s = np.asarray(s, dtype=float)
    k = M.k
    ratio = 2 * cs(k, Rball) * sn(k, s / 2) ** 2 / (sn(k, s) * sn(k, Rball))
    return np.arccos(np.clip(ratio, -1.0, 1.0))


def _sine_power_integral(n: int, psi: float, tol: Tolerance) -> float:
    if psi <= 0:
        return 0.0
    return integrate(lambda u: np.sin(u) ** (n - 2), 0.0, psi, tol)


def cap_area_witness(M: SpaceForm, Rball: float, r: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Area of ``dB_x(r)`` inside the ball; for n = 2 the two arcs together."""
    _check_ball(M, Rball)
    if not 0 < r <= 2 * Rball:
        raise DomainError(f"radius must lie in (0, {2 * Rball}]")
    psi = float(cap_angle(M, Rball, r))
    return sphere_area(M.n - 1) * float(sn(M.k, r)) ** (M.n - 1) * _sine_power_integral(M.n, psi, tol)


def relative_volume(M: SpaceForm, Rball: float, r: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """``|B_x(r) cap Omega|`` by nested quadrature: outer radius, inner cap angle."""
    _check_ball(M, Rball)
    if r <= 0:
        return 0.0
    r = min(float(r), 2 * Rball)
    n = M.n
    const = sphere_area(n - 1)

    def integrand(s):
        psi = cap_angle(M, Rball, s)
        inner = np.array([_sine_power_integral(n, x, tol) for x in psi])
        return const * sn(M.k, s) ** (n - 1) * inner

    return integrate(integrand, 0.0, r, tol)


def relative_radius(M: SpaceForm, Rball: float, beta: float, tol: Tolerance = DEFAULT_TOL) -> float:
    total = model_volume(M, Rball, tol)
    if not 0 < beta < total:
        raise DomainError(f"volume must lie in (0, {total!r}), got {beta!r}")
    return solve_monotone(lambda r: relative_volume(M, Rball, r, tol), beta, 0.0, 2 * Rball, tol)


def relative_ball_profile(M: SpaceForm, Rball: float, beta: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """``I_x(beta)`` for the ball ``Omega``: cap area at the radius enclosing ``beta``."""
    return cap_area_witness(M, Rball, relative_radius(M, Rball, beta, tol), tol)


def verify_relative(
    M: SpaceForm,
    Rball: float,
    params: BoundParams,
    betas: Sequence[float],
    report_tol: float = DEFAULT_REPORT_TOL,
    tol: Tolerance = DEFAULT_TOL,
    jobs: int = 1,
) -> list[ComparisonReport]:
    """Check ``I_x(beta) - h2^H(beta, g_k) <= relative_bound`` for a geodesic ball in ``M``."""
    if params.n != M.n or params.k != M.k:
        raise DomainError("parameters must describe the ambient space form")
    _check_ball(M, Rball)
    status = hypothesis_status(params, relative=True)

    def row(beta):
        lhs = relative_ball_profile(M, Rball, beta, tol) - half_space_h2(M, beta, tol)
        rhs = relative_bound(params, beta, tol, enforce=False)
        return ComparisonReport.upper(
            "relative_gap", _inputs(params, beta, ball_radius=float(Rball)), lhs, rhs, report_tol, status
        )

    return map_ordered(row, sorted(float(b) for b in betas), jobs)
