"""Isoperimetric profile comparison under integral Ricci curvature bounds."""

from .bounds import (
    BoundParams,
    c1_constant,
    c_constant,
    check_radius_dilation,
    f_error,
    f_tilde,
    kappa,
    main_bound,
    mid_gap_bound,
    q_exponent,
    relative_bound,
    verify_h2,
    verify_relative,
)
from .errors import BracketError, DomainError, IsoprofileError, NonConvergence, SmallnessViolation
from .numerics import Tolerance, integrate, solve_monotone
from .profile_ode import ProfileCurve, levy_gromov_check, model_ode_residual, supersolution_residuals
from .reports import ComparisonReport
from .spaceform import SpaceForm, half_space_h2, levy_gromov_constants, model_h1, model_h2, sn, cs
from .warped import WarpedManifold, ball_profile, integral_ricci_norm, ricci_eigenvalues

__version__ = "0.1.0"
