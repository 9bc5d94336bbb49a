"""Domain types and the welfare arithmetic shared by every other module.

The social objective scores a household by

    delta_S = mu(x) * (dv_numeraire + sum_j lambda_j * dv_j + C)

where ``mu(x) = prod_k omega_k ** x_k`` is the welfare weight implied by the
household's characteristics, ``dv_j`` are treatment effects on each outcome in
utility units (after the outcome's transform), ``lambda_j`` prices each
non-numeraire outcome in units of the numeraire, and ``C`` is the intrinsic
value of treating the household regardless of measured impact.

All functions here are pure and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, DomainError

LOG_1p01 = math.log(1.01)

TRANSFORMS = ("log", "linear")


@dataclass(frozen=True)
class OutcomeSpec:
    """One outcome dimension of the welfare function.

    ``transform`` maps the raw outcome level into utility units: ``log`` for
    ln(y), ``linear`` for y itself. Exactly one outcome in a model is the
    numeraire (its utility weight is fixed at 1). ``bad`` marks outcomes where
    lower is better (e.g. sick days), which only matters for frontier
    direction handling and reporting, never for the welfare arithmetic.
    """

    name: str
    transform: str = "linear"
    is_numeraire: bool = False
    units: str = ""
    bad: bool = False

    def __post_init__(self):
        if self.transform not in TRANSFORMS:
            raise ConfigError(f"unknown transform {self.transform!r} for outcome {self.name!r}")


def validate_outcomes(outcomes) -> int:
    """Check the one-numeraire invariant; return the numeraire index."""
    numeraires = [i for i, o in enumerate(outcomes) if o.is_numeraire]
    if len(numeraires) != 1:
        raise ConfigError(
            f"exactly one outcome must be the numeraire, found {len(numeraires)}"
        )
    names = [o.name for o in outcomes]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate outcome names: {names}")
    return numeraires[0]


@dataclass
class Household:
    """A single unit of analysis.

    ``x`` holds the welfare covariates preferences are defined over; ``x_tilde``
    the (possibly larger) set used to model treatment-effect heterogeneity.
    ``tier`` is the observed priority level (larger = higher priority); -1
    marks a household outside the ranked estimation sample.
    """

    id: str
    x: dict = field(default_factory=dict)
    x_tilde: dict = field(default_factory=dict)
    y_baseline: dict = field(default_factory=dict)
    y_endline: dict = field(default_factory=dict)
    treated: bool = False
    tier: int = -1


@dataclass
class TreatmentEffectMatrix:
    """Per-household, per-outcome treatment effects in utility units.

    ``delta`` is (n_households, n_outcomes), aligned with ``ids`` and
    ``outcomes``; ``source`` records how each outcome's column was estimated
    ('ols', 'forest' or 'external').
    """

    ids: list
    outcomes: list
    delta: np.ndarray
    source: dict

    def __post_init__(self):
        self.delta = np.asarray(self.delta, dtype=float)
        if self.delta.shape != (len(self.ids), len(self.outcomes)):
            raise DataError(
                f"treatment-effect matrix shape {self.delta.shape} does not match "
                f"{len(self.ids)} households x {len(self.outcomes)} outcomes"
            )
        if not np.all(np.isfinite(self.delta)):
            bad = [self.ids[i] for i in np.where(~np.isfinite(self.delta).all(axis=1))[0][:5]]
            raise DataError(f"non-finite treatment effects for households {bad}")
        if len(set(self.ids)) != len(self.ids):
            raise DataError("duplicate household ids in treatment-effect matrix")

    def column(self, outcome: str) -> np.ndarray:
        return self.delta[:, self.outcomes.index(outcome)]

    def aligned_to(self, ids) -> np.ndarray:
        """Rows of ``delta`` reordered to match ``ids``; errors on missing households."""
        pos = {h: i for i, h in enumerate(self.ids)}
        try:
            idx = np.array([pos[h] for h in ids])
        except KeyError as exc:
            raise DataError(f"household {exc.args[0]!r} has no treatment effects") from None
        return self.delta[idx]

    def average_te(self) -> dict:
        """Average treatment effect per outcome (mean of the predicted effects)."""
        return {o: float(m) for o, m in zip(self.outcomes, self.delta.mean(axis=0))}


@dataclass
class PreferenceParams:
    """The welfare primitives: multiplicative weights, impact prices, C, sigma.

    ``omega`` maps each welfare covariate to a positive multiplier per unit of
    that covariate. ``lam`` maps each non-numeraire outcome to its value in
    numeraire utility units (the numeraire's own weight is fixed at 1 and
    never appears here). ``sigma`` scales the ranking noise.
    """

    omega: dict
    lam: dict
    C: float
    sigma: float

    def __post_init__(self):
        for k, w in self.omega.items():
            if not (w > 0) or not math.isfinite(w):
                raise DomainError(f"omega[{k!r}] must be positive and finite, got {w}")
        if not (self.sigma > 0) or not math.isfinite(self.sigma):
            raise DomainError(f"sigma must be positive and finite, got {self.sigma}")

    def omega_increments(self) -> dict:
        """Welfare weights expressed as counts of successive 1% increments."""
        return {k: to_increments(w) for k, w in self.omega.items()}


@dataclass
class WelfareImpactVector:
    """delta_S per household, aligned ``ids`` and ``values``."""

    ids: list
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise DataError("non-finite welfare impact values")

    def as_dict(self) -> dict:
        return dict(zip(self.ids, self.values.tolist()))


def utility_delta(spec: OutcomeSpec, y0: float, y1: float) -> float:
    """Utility change g(y1) - g(y0) under the outcome's transform."""
    if spec.transform == "log":
        if not (y0 > 0 and y1 > 0):
            raise DomainError(
                f"log transform for outcome {spec.name!r} requires positive values, "
                f"got ({y0}, {y1})"
            )
        return math.log(y1) - math.log(y0)
    return y1 - y0


def welfare_weight(omega: dict, x: dict) -> float:
    """mu(x) = prod_k omega_k ** x_k; equals 1 at the all-zero covariate vector."""
    log_mu = 0.0
    for k, w in omega.items():
        if k not in x:
            raise ConfigError(f"covariate {k!r} missing from household characteristics")
        if not (w > 0):
            raise DomainError(f"omega[{k!r}] must be positive, got {w}")
        log_mu += x[k] * math.log(w)
    return math.exp(log_mu)


def welfare_impact(params: PreferenceParams, dv: dict, x: dict) -> float:
    """delta_S for one household: mu(x) * (dv_numeraire + sum lambda_j dv_j + C).

    The numeraire is the unique key of ``dv`` that carries no lambda.
    """
    numeraire = [o for o in dv if o not in params.lam]
    if len(numeraire) != 1:
        raise ConfigError(
            f"expected exactly one numeraire among outcomes {sorted(dv)} given "
            f"lambda over {sorted(params.lam)}, found {numeraire}"
        )
    inner = dv[numeraire[0]] + params.C
    for j, lam_j in params.lam.items():
        if j not in dv:
            raise ConfigError(f"outcome {j!r} has a lambda but no treatment effect")
        inner += lam_j * dv[j]
    return welfare_weight(params.omega, x) * inner


def to_increments(omega_k: float) -> float:
    """Express a multiplicative weight as a count of successive 1% increments.

    log base 1.01 of omega: 1.01**v maps back to v.
    """
    if not (omega_k > 0):
        raise DomainError(f"weight must be positive, got {omega_k}")
    return math.log(omega_k) / LOG_1p01


def from_increments(v: float) -> float:
    """Inverse of :func:`to_increments`: 1.01**v."""
    return math.exp(v * LOG_1p01)
