"""Invert observed allocation rankings into the welfare weights, impact
weights, and intrinsic-value constant consistent with them, given
heterogeneous treatment effects; run the forward direction from preferences
to counterfactual allocations and outcome frontiers."""

from .model import (
    Household,
    OutcomeSpec,
    PreferenceParams,
    TreatmentEffectMatrix,
    WelfareImpactVector,
    from_increments,
    to_increments,
    utility_delta,
    welfare_impact,
    welfare_weight,
)
from .ranklik import (
    KERNEL_BACKEND,
    RankingTiers,
    exploded_loglik_fast,
    exploded_loglik_naive,
    ranking_probability,
    tiers_from_ranking,
)

__version__ = "0.1.0"

__all__ = [
    "Household",
    "OutcomeSpec",
    "PreferenceParams",
    "TreatmentEffectMatrix",
    "WelfareImpactVector",
    "from_increments",
    "to_increments",
    "utility_delta",
    "welfare_impact",
    "welfare_weight",
    "KERNEL_BACKEND",
    "RankingTiers",
    "exploded_loglik_fast",
    "exploded_loglik_naive",
    "ranking_probability",
    "tiers_from_ranking",
    "__version__",
]
