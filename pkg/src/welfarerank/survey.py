"""Stated-preference estimation from multiple-price-list responses.

Each price list varies one amount along its rows; the respondent's switch
row brackets an indifference point, read off as the midpoint of the
bracketing amounts. A welfare-weight item compares two household profiles
differing in one attribute by ``x_delta``; indifference at amounts (a, b)
implies omega = (b/a)**(1/x_delta). An impact-weight item trades a money
amount a against b units of another outcome, implying lambda = a/b.

Respondents who never switch or switch more than once reveal no unique
indifference point; those responses are marked invalid and dropped, and
estimates are medians across respondents with bootstrap standard errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DomainError
from .model import LOG_1p01


@dataclass
class MplRow:
    amount_a: float
    amount_b: float
    chose_a: bool


@dataclass
class MplResponse:
    respondent_id: str
    focal_attribute: str
    kind: str                       # "omega" | "lambda"
    rows: list
    x_delta: float = 1.0            # attribute difference; omega items only

    def __post_init__(self):
        if self.kind not in ("omega", "lambda"):
            raise DataError(f"unknown price-list kind {self.kind!r}")


@dataclass
class Crossover:
    a: float
    b: float


@dataclass
class SurveyEstimate:
    omega_median: dict              # attribute -> omega (multiplicative scale)
    lambda_median: dict
    se: dict                        # "omega:<attr>" in increments, "lambda:<name>" raw
    n_respondents: int
    n_valid: dict = field(default_factory=dict)
    n_invalid: int = 0

    def omega_increments(self) -> dict:
        return {k: math.log(w) / LOG_1p01 for k, w in self.omega_median.items()}


def _monotone(values) -> bool:
    diffs = np.diff(values)
    return bool(np.all(diffs >= 0) or np.all(diffs <= 0))


def crossover(rows) -> Crossover | None:
    """Midpoint indifference amounts at the unique switch row, else None.

    Precondition: each amount column is monotone along rows and at least one
    strictly varies (that is what makes a price list).
    """
    if len(rows) < 2:
        raise DataError("a price list needs at least 2 rows")
    a = np.array([r.amount_a for r in rows], dtype=float)
    b = np.array([r.amount_b for r in rows], dtype=float)
    if not (_monotone(a) and _monotone(b)):
        raise DataError("price-list amounts must be monotone along rows")
    if np.ptp(a) == 0 and np.ptp(b) == 0:
        raise DataError("price-list amounts never vary")
    choices = [bool(r.chose_a) for r in rows]
    switches = [i for i in range(1, len(choices)) if choices[i] != choices[i - 1]]
    if len(switches) != 1:
        return None
    i = switches[0]
    return Crossover(a=float((a[i - 1] + a[i]) / 2), b=float((b[i - 1] + b[i]) / 2))


def omega_from_crossover(a: float, b: float, x_delta: float) -> float:
    """(b/a)^(1/x_delta): the per-unit multiplicative weight on the attribute."""
    if x_delta == 0:
        raise DomainError("x_delta must be nonzero")
    if not (a > 0 and b > 0):
        raise DomainError(f"crossover amounts must be positive, got ({a}, {b})")
    return (b / a) ** (1.0 / x_delta)


def lambda_from_crossover(a: float, b: float) -> float:
    """a/b: value of one unit of the outcome in numeraire units."""
    if b == 0:
        raise DomainError("crossover outcome amount must be nonzero")
    return a / b


def aggregate(responses, n_boot: int = 200, seed: int = 0) -> SurveyEstimate:
    """Median stated preferences across respondents, bootstrap SEs.

    A respondent's repeated items for the same focal attribute are averaged
    first (geometric mean for omega, arithmetic for lambda), then medians are
    taken across respondents. SEs are standard deviations of the median over
    respondent-level bootstrap resamples; omega SEs are reported in
    1%-increment units to match the estimate reports.
    """
    per_respondent = {}
    n_invalid = 0
    respondents = set()
    for r in responses:
        respondents.add(r.respondent_id)
        cx = crossover(r.rows)
        if cx is None:
            n_invalid += 1
            continue
        if r.kind == "omega":
            value = math.log(omega_from_crossover(cx.a, cx.b, r.x_delta))
            key = ("omega", r.focal_attribute)
        else:
            value = lambda_from_crossover(cx.a, cx.b)
            key = ("lambda", r.focal_attribute)
        per_respondent.setdefault(key, {}).setdefault(r.respondent_id, []).append(value)

    values = {
        key: {rid: float(np.mean(vs)) for rid, vs in by_resp.items()}
        for key, by_resp in per_respondent.items()
    }
    omega_median, lambda_median, se, n_valid = {}, {}, {}, {}
    rng = np.random.default_rng(seed)
    for (kind, attr), by_resp in values.items():
        arr = np.array(list(by_resp.values()))
        med = float(np.median(arr))
        boots = np.median(
            arr[rng.integers(0, len(arr), size=(n_boot, len(arr)))], axis=1
        )
        sd = float(np.std(boots, ddof=1)) if len(arr) > 1 else 0.0
        n_valid[f"{kind}:{attr}"] = len(arr)
        if kind == "omega":
            omega_median[attr] = math.exp(med)
            se[f"omega:{attr}"] = sd / LOG_1p01
        else:
            lambda_median[attr] = med
            se[f"lambda:{attr}"] = sd
    return SurveyEstimate(
        omega_median=omega_median,
        lambda_median=lambda_median,
        se=se,
        n_respondents=len(respondents),
        n_valid=n_valid,
        n_invalid=n_invalid,
    )
