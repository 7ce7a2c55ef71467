"""Command-line interface.

Every command reads an INI file (``--config``) whose sections are documented
in the README; ``--set section.key=value`` overrides single entries.

Exit codes: 0 all checks pass, 1 an inequality or hypothesis failed,
2 invalid input, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
from pathlib import Path

import numpy as np

from .bounds import (
    BoundParams,
    c1_constant,
    c_constant,
    dilation_factor,
    hypothesis_status,
    kappa,
    q_exponent,
    verify_h2,
    verify_relative,
)
from .errors import DomainError, NonConvergence
from .numerics import Tolerance
from .profile_ode import (
    ProfileCurve,
    levy_gromov_check,
    model_h1_curve,
    model_h2_curve,
    sphere_h1_curve,
    supersolution_reports,
    symmetric_grid,
)
from .reports import DEFAULT_REPORT_TOL, all_passed, reports_to_csv, reports_to_json, worst_margin
from .spaceform import SpaceForm, levy_gromov_constants, model_volume
from .warped import PRESETS, WarpedManifold, integral_ricci_norm, load_table

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3

THEOREMS = ("h2_gap", "relative_gap", "supersolution", "levy_gromov")


class ConfigError(DomainError):
    pass


class Config:
    """Typed access to the INI sections with ``--set`` overrides applied."""

    def __init__(self, parser: configparser.ConfigParser):
        self._p = parser

    @classmethod
    def load(cls, path: str | None, overrides: list[str]) -> "Config":
        parser = configparser.ConfigParser(interpolation=None)
        if path is not None:
            if not Path(path).is_file():
                raise ConfigError(f"config file not found: {path}")
            try:
                parser.read(path)
            except configparser.Error as exc:
                raise ConfigError(f"cannot parse {path}: {' '.join(str(exc).split())}") from exc
        for item in overrides:
            key, sep, value = item.partition("=")
            section, dot, name = key.partition(".")
            if not (sep and dot and section and name):
                raise ConfigError(f"override must look like section.key=value, got {item!r}")
            if not parser.has_section(section):
                parser.add_section(section)
            parser.set(section, name, value)
        return cls(parser)

    def has(self, section: str, key: str) -> bool:
        return self._p.has_option(section, key)

    def get(self, section: str, key: str, default=None) -> str:
        if self.has(section, key):
            return self._p.get(section, key).strip()
        if default is None:
            raise ConfigError(f"missing [{section}] {key}")
        return default

    def float(self, section: str, key: str, default: float | None = None) -> float:
        raw = self.get(section, key, None if default is None else repr(default))
        try:
            value = float(eval_number(raw))
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key}: not a number: {raw!r}") from exc
        return value

    def int(self, section: str, key: str, default: int | None = None) -> int:
        value = self.float(section, key, None if default is None else float(default))
        if value != int(value):
            raise ConfigError(f"[{section}] {key}: expected an integer, got {value}")
        return int(value)


def eval_number(raw: str) -> float:
    """Parse a float, also accepting ``pi``, ``pi/2``, ``2*pi`` and ``inf``."""
    text = raw.strip().lower().replace(" ", "")
    try:
        return float(text)
    except ValueError:
        pass
    factor = 1.0
    if "*" in text:
        head, _, text = text.partition("*")
        factor = float(head)
    divisor = 1.0
    if "/" in text:
        text, _, tail = text.partition("/")
        divisor = float(tail)
    if text != "pi":
        raise ValueError(raw)
    return factor * math.pi / divisor


# --- config to objects -------------------------------------------------------


def make_manifold(cfg: Config) -> WarpedManifold:
    n = cfg.int("manifold", "n")
    preset = cfg.get("manifold", "preset")
    if preset == "table":
        path = cfg.get("manifold", "table")
        if not Path(path).is_file():
            raise ConfigError(f"table file not found: {path}")
        return load_table(path, n)
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; choose from {', '.join(sorted(PRESETS))} or table")
    R = cfg.float("manifold", "R") if cfg.has("manifold", "R") else None
    if preset == "euclidean":
        if R is None:
            raise ConfigError("missing [manifold] R")
        return PRESETS[preset](n, R)
    if preset == "sphere":
        return PRESETS[preset](n, cfg.float("manifold", "k", 1.0), R)
    if preset == "hyperbolic":
        if R is None:
            raise ConfigError("missing [manifold] R")
        return PRESETS[preset](n, R, cfg.float("manifold", "k", -1.0))
    return PRESETS[preset](n, cfg.float("manifold", "delta"), R)


def make_model(cfg: Config) -> SpaceForm:
    return SpaceForm(cfg.int("model", "n"), cfg.float("model", "k"))


def make_tolerance(cfg: Config) -> Tolerance:
    return Tolerance(
        abs_tol=cfg.float("tolerance", "abs", 1e-10),
        rel_tol=cfg.float("tolerance", "rel", 1e-10),
        max_depth=cfg.int("tolerance", "max_depth", 60),
    )


def make_grid(cfg: Config, lo: float, hi: float) -> np.ndarray:
    """``[grid]`` count/margin on ``(lo, hi)``, or explicit min/max bounds."""
    count = cfg.int("grid", "count", 20)
    margin = cfg.float("grid", "margin", 1e-3)
    if cfg.has("grid", "min") or cfg.has("grid", "max"):
        gmin = cfg.float("grid", "min")
        gmax = cfg.float("grid", "max")
        if not 0 < gmin < gmax:
            raise ConfigError("[grid] needs 0 < min < max")
        if math.isfinite(hi) and gmax >= hi:
            raise ConfigError(f"[grid] max must stay below {hi!r}")
        if count == 1:
            return np.array([gmin])
        return np.geomspace(gmin, gmax, count)
    if not math.isfinite(hi):
        raise ConfigError("[grid] min and max are required on non-compact models")
    return symmetric_grid(count, margin, lo, hi)


# --- commands ----------------------------------------------------------------


def cmd_model_profile(cfg: Config, args) -> int:
    M = make_model(cfg)
    tol = make_tolerance(cfg)
    kind = cfg.get("grid", "kind", "h2")
    if kind == "h1":
        if not M.compact:
            raise ConfigError("h1 needs k > 0")
        curve = model_h1_curve(M, make_grid(cfg, 0.0, 1.0), tol, args.jobs)
    elif kind == "h2":
        curve = model_h2_curve(M, make_grid(cfg, 0.0, M.total_volume), tol, args.jobs)
    else:
        raise ConfigError(f"[grid] kind must be h1 or h2, got {kind!r}")
    _emit(curve.to_csv(), args.out)
    return EXIT_OK


def _bound_params(cfg: Config, n: int, k: float, d: float, norm: float) -> BoundParams:
    return BoundParams(n=n, p=cfg.float("bound", "p"), k=k, d=cfg.float("bound", "d", d), norm=norm)


def _curve(cfg: Config, grid, tol, jobs) -> ProfileCurve:
    source = cfg.get("verify", "curve", "model")
    n = cfg.int("model", "n")
    if source == "model":
        return model_h1_curve(make_model(cfg), grid, tol, jobs)
    if source == "sphere":
        return sphere_h1_curve(n, cfg.float("verify", "curvature"), grid, tol, jobs)
    if not Path(source).is_file():
        raise ConfigError(f"curve file not found: {source}")
    return ProfileCurve.read(source)


def run_verify(cfg: Config, jobs: int = 1, report_tol: float | None = None):
    """Evaluate the configured check; returns the list of reports."""
    theorem = cfg.get("verify", "theorem")
    if theorem not in THEOREMS:
        raise ConfigError(f"unknown theorem {theorem!r}; choose from {', '.join(THEOREMS)}")
    tol = make_tolerance(cfg)
    if report_tol is None:
        report_tol = cfg.float("tolerance", "report", DEFAULT_REPORT_TOL)

    if theorem == "h2_gap":
        W = make_manifold(cfg)
        k = cfg.float("model", "k")
        if cfg.has("bound", "norm"):
            norm = cfg.float("bound", "norm")
        else:
            norm = integral_ricci_norm(W, cfg.float("bound", "p"), k, tol=tol).value
        params = _bound_params(cfg, W.n, k, W.diam, norm)
        # both profiles must be defined on the grid
        grid = make_grid(cfg, 0.0, min(W.total_volume, params.model.total_volume))
        return verify_h2(W, params, grid, report_tol, tol, jobs)

    if theorem == "relative_gap":
        M = make_model(cfg)
        Rball = cfg.float("verify", "ball_radius")
        params = _bound_params(cfg, M.n, M.k, 2 * Rball, cfg.float("bound", "norm", 0.0))
        grid = make_grid(cfg, 0.0, model_volume(M, Rball, tol))
        return verify_relative(M, Rball, params, grid, report_tol, tol, jobs)

    M = make_model(cfg)
    alpha = cfg.float("bound", "alpha")
    diam = cfg.float("bound", "d", M.radial_limit)
    grid = make_grid(cfg, 0.0, 1.0)
    curve = _curve(cfg, grid, tol, jobs)
    if theorem == "supersolution":
        return supersolution_reports(curve, alpha, M, diam, report_tol, tol)
    return levy_gromov_check(curve, M, diam, alpha, report_tol, tol, jobs)


def cmd_verify(cfg: Config, args) -> int:
    reports = run_verify(cfg, args.jobs, args.tol)
    fmt = cfg.get("output", "format", "json" if args.out and args.out.endswith(".json") else "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"[output] format must be csv or json, got {fmt!r}")
    text = reports_to_json(reports) if fmt == "json" else reports_to_csv(reports)
    _emit(text, args.out)
    passed = all_passed(reports)
    failed = [r for r in reports if not r.passed]
    statuses = sorted({r.status for r in failed})
    print(
        f"{reports[0].theorem_id if reports else 'none'}: {len(reports) - len(failed)}/{len(reports)} passed, "
        f"worst margin {worst_margin(reports):.6g}"
        + (f", failures: {','.join(statuses)}" if statuses else "")
    )
    return EXIT_OK if passed else EXIT_FAIL


def _sig15(x):
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else None)
    return float(f"{x:.15g}")


def constants_record(cfg: Config) -> dict:
    n = cfg.int("constants", "n")
    p = cfg.float("constants", "p")
    k = cfg.float("constants", "k")
    out = {"n": n, "p": p, "k": k, "kappa": kappa(n, p), "q": q_exponent(n, p, k)}
    if cfg.has("constants", "d"):
        d = cfg.float("constants", "d")
        norm = cfg.float("constants", "norm", 0.0)
        params = BoundParams(n=n, p=p, k=k, d=d, norm=norm)
        out.update(d=d, norm=norm, C=c_constant(params), C1=c1_constant(params))
        if norm > 0:
            out.update(dilation=dilation_factor(params), relative_dilation=dilation_factor(params, True))
        out["hypotheses"] = hypothesis_status(params)
        if k > 0:
            alpha = cfg.float("constants", "alpha") if cfg.has("constants", "alpha") else None
            lg = levy_gromov_constants(SpaceForm(n, k), d, alpha)
            out.update(d_prime=lg.d_prime, gamma=lg.gamma, **{"lambda": lg.lam}, L=lg.L)
            if alpha is not None:
                out.update(alpha=alpha, epsilon=lg.epsilon)
    return {key: (_sig15(v) if isinstance(v, float) else v) for key, v in out.items()}


def cmd_constants(cfg: Config, args) -> int:
    _emit(json.dumps(constants_record(cfg), indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def cmd_norm(cfg: Config, args) -> int:
    W = make_manifold(cfg)
    tol = make_tolerance(cfg)
    radius = cfg.float("norm", "radius") if cfg.has("norm", "radius") else None
    result = integral_ricci_norm(W, cfg.float("norm", "p"), cfg.float("norm", "k"), radius, tol)
    record = {
        "manifold": W.name,
        "n": W.n,
        "p": result.p,
        "k": result.k,
        "radius": result.radius,
        "whole": result.whole,
        "value": result.value,
    }
    _emit(json.dumps({k: (_sig15(v) if isinstance(v, float) else v) for k, v in record.items()},
                     indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


COMMANDS = {
    "model-profile": cmd_model_profile,
    "verify": cmd_verify,
    "constants": cmd_constants,
    "norm": cmd_norm,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="isoprofile", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="INI configuration file")
    parser.add_argument("--out", help="output file (default: standard output)")
    parser.add_argument("--tol", type=float, help="pass/fail tolerance for reports")
    parser.add_argument("--jobs", type=int, default=1, help="worker threads for grid evaluation")
    parser.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override a config entry (repeatable)")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"error: invalid input: {_one_line(exc)}", file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:
        # --help
        return EXIT_OK if not exc.code else EXIT_INPUT
    if args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    if args.tol is not None and not args.tol >= 0:
        print("error: --tol must be non-negative", file=sys.stderr)
        return EXIT_INPUT
    try:
        cfg = Config.load(args.config, args.set)
        return COMMANDS[args.command](cfg, args)
    except NonConvergence as exc:
        print(f"error: non-convergence: {_one_line(exc)}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, ValueError, OSError) as exc:
        print(f"error: invalid input: {_one_line(exc)}", file=sys.stderr)
        return EXIT_INPUT


def _one_line(exc: Exception) -> str:
    return " ".join(str(exc).split())


if __name__ == "__main__":
    sys.exit(main())
