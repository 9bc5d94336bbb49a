"""Columnar dataset of households: covariates, outcomes, treatment, tiers."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, DataError
from .model import Household, OutcomeSpec, validate_outcomes
from .ranklik import RankingTiers, tiers_from_ranking


@dataclass
class Dataset:
    """Estimation sample in columnar form.

    ``x`` holds the welfare covariates (one column per name in
    ``welfare_covariates``), ``x_tilde`` the heterogeneity covariates.
    Outcome arrays are (n, n_outcomes) with NaN for missing endline or
    baseline values. ``tier`` is the raw priority value (larger = higher
    priority; ties allowed); -1 marks unranked households.
    """

    ids: list
    outcomes: list
    welfare_covariates: list
    het_covariates: list
    x: np.ndarray
    x_tilde: np.ndarray
    y_baseline: np.ndarray
    y_endline: np.ndarray
    treated: np.ndarray
    tier: np.ndarray

    def __post_init__(self):
        n = len(self.ids)
        if len(set(self.ids)) != n:
            raise DataError("duplicate household ids")
        validate_outcomes(self.outcomes)
        self.x = np.asarray(self.x, dtype=float).reshape(n, len(self.welfare_covariates))
        self.x_tilde = np.asarray(self.x_tilde, dtype=float).reshape(n, len(self.het_covariates))
        self.y_baseline = np.asarray(self.y_baseline, dtype=float).reshape(n, len(self.outcomes))
        self.y_endline = np.asarray(self.y_endline, dtype=float).reshape(n, len(self.outcomes))
        self.treated = np.asarray(self.treated, dtype=bool).reshape(n)
        self.tier = np.asarray(self.tier, dtype=float).reshape(n)
        if not np.all(np.isfinite(self.x)):
            raise DataError("non-finite welfare covariate values")

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def numeraire(self) -> OutcomeSpec:
        return self.outcomes[validate_outcomes(self.outcomes)]

    @property
    def outcome_names(self) -> list:
        return [o.name for o in self.outcomes]

    def outcome(self, name: str) -> OutcomeSpec:
        for o in self.outcomes:
            if o.name == name:
                return o
        raise ConfigError(f"unknown outcome {name!r}")

    def x_map(self, i: int) -> dict:
        return dict(zip(self.welfare_covariates, self.x[i].tolist()))

    def x_tilde_map(self, i: int) -> dict:
        return dict(zip(self.het_covariates, self.x_tilde[i].tolist()))

    def x_maps(self) -> dict:
        """id -> welfare covariate map, for the likelihood entry points."""
        return {h: self.x_map(i) for i, h in enumerate(self.ids)}

    def households(self):
        for i, h in enumerate(self.ids):
            yield Household(
                id=h,
                x=self.x_map(i),
                x_tilde=self.x_tilde_map(i),
                y_baseline={o: v for o, v in zip(self.outcome_names, self.y_baseline[i]) if np.isfinite(v)},
                y_endline={o: v for o, v in zip(self.outcome_names, self.y_endline[i]) if np.isfinite(v)},
                treated=bool(self.treated[i]),
                tier=int(self.tier[i]) if self.tier[i] >= 0 else -1,
            )

    def subset(self, indices, relabel_ids=False) -> "Dataset":
        """Row subset; ``relabel_ids`` assigns fresh positional ids (needed for
        bootstrap resamples, where households repeat)."""
        indices = np.asarray(indices)
        ids = [f"r{j}" for j in range(len(indices))] if relabel_ids else [self.ids[i] for i in indices]
        return replace(
            self,
            ids=ids,
            x=self.x[indices],
            x_tilde=self.x_tilde[indices],
            y_baseline=self.y_baseline[indices],
            y_endline=self.y_endline[indices],
            treated=self.treated[indices],
            tier=self.tier[indices],
        )

    def ranking_tiers(self) -> RankingTiers:
        """Tier structure over the ranked households (tier >= 0)."""
        ranked = {h: t for h, t in zip(self.ids, self.tier) if t >= 0}
        if len(ranked) < self.n:
            raise DataError(
                f"{self.n - len(ranked)} households have no rank tier; "
                "restrict the sample before estimating preferences"
            )
        return tiers_from_ranking(ranked)

    def binarized(self) -> "Dataset":
        """Same sample with the ranking collapsed to 2 tiers at the median.

        The top half (strictly above the median tier value, with the boundary
        resolved by id order to hit exactly n//2) gets tier 1, the rest 0.
        """
        order = sorted(range(self.n), key=lambda i: (-self.tier[i], str(self.ids[i])))
        k = self.n // 2
        new_tier = np.zeros(self.n)
        for i in order[:k]:
            new_tier[i] = 1.0
        return replace(self, tier=new_tier)
