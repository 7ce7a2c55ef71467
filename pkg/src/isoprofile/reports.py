"""Comparison reports and their CSV / JSON serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
U = TypeVar("U")

DEFAULT_REPORT_TOL = 1e-7

CSV_COLUMNS = ("theorem_id", "beta", "lhs", "rhs", "margin", "pass", "status")

# statuses other than "ok" mean the inequality was not certified
STATUS_OK = "ok"
STATUS_VIOLATION = "violation"
STATUS_SMALLNESS = "smallness_violation"
STATUS_DIAMETER = "diameter_violation"


@dataclass(frozen=True)
class ComparisonReport:
    """One grid point of an inequality check.

    ``margin`` is the signed slack of the claimed inequality (``rhs - lhs`` for
    upper bounds, ``lhs - rhs`` for lower bounds), so ``passed`` holds exactly
    when ``margin >= -tol`` and no hypothesis of the claim was violated.
    """

    theorem_id: str
    inputs: dict
    lhs: float
    rhs: float
    margin: float
    tol: float
    status: str = STATUS_OK
    passed: bool = field(init=False)

    def __post_init__(self):
        ok = self.status == STATUS_OK and self.margin >= -self.tol
        object.__setattr__(self, "passed", bool(ok))
        if self.status == STATUS_OK and not ok:
            object.__setattr__(self, "status", STATUS_VIOLATION)

    @classmethod
    def upper(cls, theorem_id, inputs, lhs, rhs, tol=DEFAULT_REPORT_TOL, status=STATUS_OK):
        """Report for a claim ``lhs <= rhs``."""
        return cls(theorem_id, inputs, lhs, rhs, rhs - lhs, tol, status)

    @classmethod
    def lower(cls, theorem_id, inputs, lhs, rhs, tol=DEFAULT_REPORT_TOL, status=STATUS_OK):
        """Report for a claim ``lhs >= rhs``."""
        return cls(theorem_id, inputs, lhs, rhs, lhs - rhs, tol, status)

    def as_dict(self) -> dict:
        return {
            "theorem_id": self.theorem_id,
            "inputs": {k: _jsonable(v) for k, v in self.inputs.items()},
            "lhs": _jsonable(self.lhs),
            "rhs": _jsonable(self.rhs),
            "margin": _jsonable(self.margin),
            "tol": self.tol,
            "pass": self.passed,
            "status": self.status,
        }


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def format_float(x: float) -> str:
    # repr is the shortest string that round-trips (at most 17 digits)
    return repr(float(x))


def map_ordered(fn: Callable[[T], U], items: Sequence[T], jobs: int = 1) -> list[U]:
    """Apply ``fn`` to every item, possibly on ``jobs`` threads; keeps input order."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def reports_to_csv(reports: Iterable[ComparisonReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rep in reports:
        writer.writerow([
            rep.theorem_id,
            format_float(rep.inputs.get("beta", math.nan)),
            format_float(rep.lhs),
            format_float(rep.rhs),
            format_float(rep.margin),
            "true" if rep.passed else "false",
            rep.status,
        ])
    return buf.getvalue()


def reports_to_json(reports: Iterable[ComparisonReport]) -> str:
    rows = [rep.as_dict() for rep in reports]
    return json.dumps({"rows": rows}, indent=2, sort_keys=True) + "\n"


def worst_margin(reports: Sequence[ComparisonReport]) -> float:
    return min((r.margin for r in reports), default=math.nan)


def all_passed(reports: Iterable[ComparisonReport]) -> bool:
    return all(r.passed for r in reports)
