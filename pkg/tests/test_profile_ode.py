import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isoprofile.errors import DomainError
from isoprofile.profile_ode import (
    ProfileCurve,
    levy_gromov_check,
    model_h1_curve,
    model_h1_derivative,
    model_ode_residual,
    sphere_h1_curve,
    supersolution_reports,
    supersolution_residuals,
    symmetric_grid,
)
from isoprofile.spaceform import SpaceForm, model_h1, model_h2, unit_ball_volume


def test_symmetric_grid():
    g = symmetric_grid(20)
    assert len(g) == 20
    assert np.all(np.diff(g) > 0)
    assert np.allclose(g + g[::-1], 1.0)
    assert g[0] == pytest.approx(1e-3)
    odd = symmetric_grid(21)
    assert odd[10] == pytest.approx(0.5)
    scaled = symmetric_grid(5, 0.01, 0.0, 4.0)
    assert scaled[0] == pytest.approx(0.04) and scaled[-1] == pytest.approx(3.96)
    with pytest.raises(DomainError):
        symmetric_grid(1)


def test_curve_validation():
    with pytest.raises(DomainError):
        ProfileCurve([0.2, 0.1], [1.0, 1.0])
    with pytest.raises(DomainError):
        ProfileCurve([0.1, 0.2], [1.0, -1.0])
    with pytest.raises(DomainError):
        ProfileCurve([0.1, 0.2], [1.0, 1.0], kind="bogus")


def test_curve_csv_round_trip(tmp_path):
    curve = model_h1_curve(SpaceForm(3, 1.0), symmetric_grid(11))
    path = tmp_path / "curve.csv"
    curve.write(path)
    back = ProfileCurve.read(path)
    assert np.array_equal(back.grid, curve.grid)
    assert np.array_equal(back.values, curve.values)
    assert path.read_text().startswith("beta,value\n")


def test_curve_read_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,y\n0.1,1\n")
    with pytest.raises(DomainError):
        ProfileCurve.read(path)


def test_model_curve_symmetric():
    curve = model_h1_curve(SpaceForm(2, 1.0), symmetric_grid(20))
    assert np.allclose(curve.values, curve.values[::-1], atol=1e-10)


def test_model_ode_residual_examples():
    M = SpaceForm(2, 1.0)
    assert model_ode_residual(M, 0.5) == pytest.approx(0.0, abs=1e-12)
    assert model_h1_derivative(M, 0.5) == pytest.approx(0.0, abs=1e-10)
    assert model_ode_residual(M, 0.3) == pytest.approx(0.0, abs=1e-8)
    with pytest.raises(DomainError):
        model_ode_residual(M, 1.0)
    with pytest.raises(DomainError):
        model_ode_residual(SpaceForm(2, 0.0), 0.5)


def test_model_derivative_matches_finite_difference():
    M = SpaceForm(3, 1.0)
    h = 1e-6
    for beta in (0.1, 0.3, 0.7):
        fd = (model_h1(M, beta + h) - model_h1(M, beta - h)) / (2 * h)
        assert model_h1_derivative(M, beta) == pytest.approx(fd, abs=1e-6)


@settings(deadline=None, max_examples=30)
@given(st.integers(2, 4), st.sampled_from([0.5, 1.0, 4.0]), st.floats(0.01, 0.99))
def test_model_ode_identity(n, k, beta):
    assert abs(model_ode_residual(SpaceForm(n, k), beta)) <= 1e-7


def test_h1_h2_relation():
    M = SpaceForm(3, 1.0)
    total = M.total_volume
    for beta in symmetric_grid(15, 0.01):
        assert model_h1(M, beta) == pytest.approx(model_h2(M, beta * total) / total, abs=1e-10)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_small_volume_asymptotics(n):
    M = SpaceForm(n, 1.0)
    beta = 1e-6
    limit = n * (unit_ball_volume(n) / M.total_volume) ** (1 / n)
    assert model_h1(M, beta) / beta ** ((n - 1) / n) == pytest.approx(limit, rel=1e-2)


def test_supersolution_model_curve():
    M = SpaceForm(2, 1.0)
    curve = model_h1_curve(M, symmetric_grid(401, 0.01))
    prev = None
    for alpha in (1.01, 1.05, 1.5):
        check = supersolution_residuals(curve, alpha, M, math.pi)
        assert check.is_supersolution
        assert check.lam == pytest.approx(2.0)
        if prev is not None:
            assert np.all(check.residuals >= prev)
        prev = check.residuals
    doubled = supersolution_residuals(curve.scaled(2.0), 1.01, M, math.pi)
    assert np.all(doubled.residuals > 0.4)


def test_supersolution_domain():
    curve = model_h1_curve(SpaceForm(2, 1.0), symmetric_grid(11))
    with pytest.raises(DomainError):
        supersolution_residuals(curve, 1.0, SpaceForm(2, 1.0), math.pi)
    with pytest.raises(DomainError):
        supersolution_residuals(curve, 1.1, SpaceForm(2, -1.0), math.pi)


def test_supersolution_reports_shape():
    M = SpaceForm(2, 1.0)
    curve = model_h1_curve(M, symmetric_grid(41, 0.01))
    reports = supersolution_reports(curve, 1.05, M, math.pi)
    assert len(reports) == 39
    assert all(r.passed for r in reports)
    assert all(r.theorem_id == "supersolution" for r in reports)


def test_sphere_rescaling():
    grid = symmetric_grid(9)
    base = model_h1_curve(SpaceForm(2, 1.0), grid)
    assert np.allclose(sphere_h1_curve(2, 4.0, grid).values, 2 * base.values)
    # h1 of the sphere of curvature K equals the model profile of k = K
    direct = model_h1_curve(SpaceForm(3, 4.0), grid)
    assert np.allclose(sphere_h1_curve(3, 4.0, grid).values, direct.values, rtol=1e-9)


def test_levy_gromov_trivial_and_rescaled():
    M = SpaceForm(2, 1.0)
    grid = symmetric_grid(20)
    same = levy_gromov_check(model_h1_curve(M, grid), M, math.pi, 1.05)
    assert all(r.passed for r in same)
    assert all(r.inputs["L"] == 1.0 for r in same)
    rescaled = levy_gromov_check(sphere_h1_curve(2, 4.0, grid), M, math.pi / 2, 1.1)
    assert all(r.passed and r.margin > 0 for r in rescaled)
    assert rescaled[0].inputs["epsilon"] == pytest.approx(0.0642824, abs=1e-6)


def test_levy_gromov_margin_grows_with_epsilon():
    M = SpaceForm(3, 1.0)
    curve = sphere_h1_curve(3, 2.0, symmetric_grid(10))
    diam = math.pi / math.sqrt(2)
    lo = levy_gromov_check(curve, M, diam, 1.01)
    hi = levy_gromov_check(curve, M, diam, 1.5)
    assert all(b.margin > a.margin for a, b in zip(lo, hi))
    assert lo[0].inputs["L"] >= 1


def test_levy_gromov_rejects_unnormalized_grid():
    curve = ProfileCurve([0.5, 2.0], [1.0, 1.0])
    with pytest.raises(DomainError):
        levy_gromov_check(curve, SpaceForm(2, 1.0), math.pi, 1.1)
