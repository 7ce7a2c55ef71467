"""End-to-end acceptance checks, one test per criterion."""

import math
import subprocess
import sys
import time

import numpy as np

from isoprofile.bounds import (
    BoundParams,
    bound_params_for,
    c_constant,
    check_radius_dilation,
    extremal_radius,
    f_error,
    f_error_closed_form,
    kappa,
    verify_h2,
    verify_relative,
)
from isoprofile.profile_ode import (
    levy_gromov_check,
    model_h1_curve,
    sphere_h1_curve,
    supersolution_residuals,
    symmetric_grid,
)
from isoprofile.spaceform import (
    SpaceForm,
    levy_gromov_constants,
    model_h1,
    model_h2,
    model_volume,
    unit_ball_volume,
)
from isoprofile.warped import (
    euclidean,
    hyperbolic,
    integral_ricci_norm,
    m_plus_norm,
    perturbed_sphere,
    sphere,
)


def test_model_identities(criterion):
    worst_closed = 0.0
    for n in (2, 3, 4):
        M = SpaceForm(n, 0.0)
        omega = unit_ball_volume(n)
        for beta in np.geomspace(1e-3, 1e3, 50):
            exact = n * omega ** (1 / n) * beta ** ((n - 1) / n)
            worst_closed = max(worst_closed, abs(model_h2(M, beta) - exact) / max(1.0, exact))
    worst_rel = 0.0
    worst_asym = 0.0
    for n in (2, 3, 4):
        M = SpaceForm(n, 1.0)
        total = M.total_volume
        for beta in symmetric_grid(20, 0.01):
            worst_rel = max(worst_rel, abs(model_h1(M, beta) - model_h2(M, beta * total) / total))
            if n == 2:
                # independent oracle: caps on the unit 2-sphere have h2(t) = sqrt(t (4 pi - t))
                t = beta * total
                worst_rel = max(worst_rel, abs(model_h1(M, beta) - math.sqrt(t * (total - t)) / total))
        limit = n * (unit_ball_volume(n) / total) ** (1 / n)
        ratio = model_h1(M, 1e-6) / 1e-6 ** ((n - 1) / n)
        worst_asym = max(worst_asym, abs(ratio / limit - 1))
    ok = worst_closed <= 1e-8 and worst_rel <= 1e-10 and worst_asym <= 1e-2
    criterion(1, "model identities", ok,
              f"closed form {worst_closed:.2e}, h1/h2 {worst_rel:.2e}, asymptotic {worst_asym:.2e}")


def test_equality_cases(criterion):
    worst = 0.0
    for W, k in ((sphere(2), 1.0), (sphere(3), 1.0), (euclidean(2, 3.0), 0.0), (euclidean(3, 3.0), 0.0)):
        P = bound_params_for(W, 2.0, k)
        reports = verify_h2(W, P, symmetric_grid(20, 1e-3, 0.0, W.total_volume))
        if not all(r.passed for r in reports):
            worst = math.inf
        worst = max(worst, max(max(abs(r.lhs), abs(r.rhs)) for r in reports))
    criterion(2, "equality cases (round sphere, Euclidean)", worst <= 1e-8, f"max |lhs|, |rhs| = {worst:.2e}")


def test_main_bound_perturbed_sphere(criterion):
    start = time.perf_counter()
    worst = math.inf
    passed = True
    for n in (2, 3):
        for delta in (0.01, 0.05):
            # a small cap keeps the diameter below pi/2 and the dilation factor below 2
            W = perturbed_sphere(n, delta, R=0.02)
            P = bound_params_for(W, 2.0, 1.0)
            reports = verify_h2(W, P, symmetric_grid(20, 1e-3, 0.0, W.total_volume))
            passed &= all(r.passed for r in reports) and P.norm > 0
            worst = min(worst, min(r.margin for r in reports))
    elapsed = time.perf_counter() - start
    criterion(3, "main bound on perturbed spheres", passed and elapsed < 10,
              f"worst margin {worst:.3e}, {elapsed:.2f}s")


def test_f_closed_form(criterion):
    worst = 0.0
    n = 3
    for p in (1.6, 2.0, 3.0):
        for d in (0.5, 1.0, 2.0):
            for norm in (1e-4, 1e-3, 1e-2, 5e-2, 1e-1):
                P = BoundParams(n=n, p=p, k=0.0, d=d, norm=norm)
                for beta in (0.01, 1.0, 10.0):
                    worst = max(worst, abs(f_error(P, beta) - f_error_closed_form(P, beta)))
    criterion(4, "f integral form vs closed form (k = 0)", worst <= 1e-8, f"max error {worst:.2e}")


def _preset_draw(rng):
    n = int(rng.integers(2, 4))
    p = n / 2 + float(rng.uniform(0.2, 2.0))
    kind = int(rng.integers(4))
    if kind == 0:
        return perturbed_sphere(n, float(rng.uniform(0.0, 0.2))), 1.0, p
    if kind == 1:
        return euclidean(n, 3.0), float(rng.choice([0.0, 0.5, 1.0])), p
    if kind == 2:
        return hyperbolic(n, 3.0), float(rng.choice([-1.0, -0.5, 0.0])), p
    return sphere(n, 1.0), float(rng.choice([0.0, 0.5, 1.0])), p


def test_comparison_ingredients(criterion):
    rng = np.random.default_rng(20240607)
    violations = 0
    for _ in range(1000):
        W, k, p = _preset_draw(rng)
        limit = W.R if k <= 0 else min(W.R, math.pi / (2 * math.sqrt(k)))
        r = float(rng.uniform(0.01, 0.999 * limit))
        norm = integral_ricci_norm(W, p, k, r).value
        # mean curvature excess controlled by the curvature excess
        if m_plus_norm(W, p, k, r) > math.sqrt(kappa(W.n, p) * norm) * (1 + 1e-10) + 1e-12:
            violations += 1
        # relative volume comparison
        C = c_constant(BoundParams(n=W.n, p=p, k=k, d=r, norm=0.0))
        bound = (1 + C * math.sqrt(norm)) ** (2 * p) * model_volume(SpaceForm(W.n, k), r)
        if W.volume(r) > bound * (1 + 1e-10):
            violations += 1
    criterion(5, "mean-curvature and volume comparison on presets", violations == 0,
              f"{violations} violations in 1000 draws")


def test_radius_dilation(criterion):
    rng = np.random.default_rng(99)
    failures = 0
    worst_equality = 0.0
    for k in (-1.0, 0.0, 1.0):
        for _ in range(1000):
            n = int(rng.integers(2, 5))
            if k > 0:
                alpha = float(rng.uniform(1.0, 2.0))
                r = float(rng.uniform(0.01, math.pi / 2))
            else:
                alpha = float(rng.uniform(1.0, 10.0))
                r = float(rng.uniform(0.01, 3.0))
            rbar = extremal_radius(k, n, alpha, r) * float(rng.uniform(0.5, 1.0) if rng.random() < 0.5 else 1.0)
            if not check_radius_dilation(k, n, alpha, r, rbar):
                failures += 1
            if k == 0:
                worst_equality = max(worst_equality, abs(extremal_radius(k, n, alpha, r) - alpha ** (1 / n) * r) / r)
    ok = failures == 0 and worst_equality <= 1e-12
    criterion(6, "radius dilation", ok, f"{failures} failures in 3000 draws, k=0 equality error {worst_equality:.1e}")


def test_supersolution(criterion):
    worst_neg = math.inf
    worst_limit = 0.0
    for n in (2, 3):
        M = SpaceForm(n, 1.0)
        curve = model_h1_curve(M, symmetric_grid(3001, 0.01))
        for alpha in (1.01, 1.05, 1.5):
            worst_neg = min(worst_neg, supersolution_residuals(curve, alpha, M, math.pi).min_residual)
        limit = supersolution_residuals(curve, 1 + 1e-9, M, math.pi)
        worst_limit = max(worst_limit, float(np.max(np.abs(limit.residuals))))
    ok = worst_neg >= -1e-9 and worst_limit <= 1e-6
    criterion(7, "model profile is a super-solution", ok,
              f"min residual {worst_neg:.3e}, max |residual| as alpha -> 1: {worst_limit:.2e}")


def test_levy_gromov(criterion):
    M = SpaceForm(2, 1.0)
    diam = math.pi / 2
    consts = levy_gromov_constants(M, diam, alpha=1.1)
    curve = sphere_h1_curve(2, 4.0, symmetric_grid(20))
    main = levy_gromov_check(curve, M, diam, 1.1)
    corollary = levy_gromov_check(curve, M, diam, 1 + 1e-6)
    ok = (
        abs(consts.L - math.sqrt(2)) <= 1e-12
        and abs(consts.epsilon - 0.064282) <= 1e-6
        and all(r.margin > 0 for r in main)
        and all(r.margin >= -1e-5 for r in corollary)
    )
    criterion(8, "improved Levy-Gromov comparison", ok,
              f"L={consts.L:.12f}, eps={consts.epsilon:.7f}, min margin {min(r.margin for r in main):.3e}")


def test_relative_case(criterion):
    start = time.perf_counter()
    worst = -math.inf
    passed = True
    for k in (0.0, -1.0):
        M = SpaceForm(2, k)
        Rball = 1.0
        params = BoundParams(n=2, p=2, k=k, d=2 * Rball, norm=0.0)
        grid = symmetric_grid(20, 1e-3, 0.0, model_volume(M, Rball))
        reports = verify_relative(M, Rball, params, grid)
        passed &= all(r.passed and r.lhs <= 1e-7 for r in reports)
        worst = max(worst, max(r.lhs for r in reports))
    elapsed = time.perf_counter() - start
    criterion(9, "relative profile of balls vs half space", passed and elapsed < 30,
              f"max lhs {worst:.3e}, {elapsed:.2f}s")


def test_cli_determinism(criterion, tmp_path):
    config = tmp_path / "run.ini"
    config.write_text(
        "[verify]\ntheorem = h2_gap\n"
        "[manifold]\npreset = perturbed_sphere\nn = 3\ndelta = 0.05\nR = 0.02\n"
        "[model]\nn = 3\nk = 1\n[bound]\np = 2\n"
    )
    outputs = []
    for jobs in (1, 8, 1, 8):
        out = tmp_path / f"report_{len(outputs)}.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "isoprofile", "verify", "--config", str(config),
             "--jobs", str(jobs), "--out", str(out)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outputs.append(out.read_bytes())
    identical = all(o == outputs[0] for o in outputs)
    criterion(10, "deterministic CLI reports across --jobs", identical, f"{len(outputs)} runs, {len(outputs[0])} bytes")
