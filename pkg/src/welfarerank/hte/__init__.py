"""Per-household treatment effects: interacted OLS, honest forest, or external."""

from .ols import OlsTeModel, fit_ols_te, predict_te_ols
from .forest import ForestConfig, ForestTeModel, feature_importance, fit_causal_forest, predict_te_forest
from .matrix import build_te_matrix, load_te_csv, save_te_csv

__all__ = [
    "OlsTeModel",
    "fit_ols_te",
    "predict_te_ols",
    "ForestConfig",
    "ForestTeModel",
    "feature_importance",
    "fit_causal_forest",
    "predict_te_forest",
    "build_te_matrix",
    "load_te_csv",
    "save_te_csv",
]
