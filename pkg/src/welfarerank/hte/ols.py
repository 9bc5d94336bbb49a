"""Interacted least squares for heterogeneous treatment effects.

Fits g(y_endline) = b0 + bx.x + (bT + bTx.x) T + e on the households with an
observed endline, so the fitted treatment effect bT + bTx.x is already a
utility delta. Estimation uses QR (lstsq); tests verify it against plain
normal equations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..data import Dataset
from ..errors import ConfigError, DomainError, EstimationError, SingularDesignError
from ..model import OutcomeSpec


@dataclass
class OlsTeModel:
    outcome: str
    covariates: list
    beta0: float
    beta_x: dict
    beta_T: float
    beta_Tx: dict
    residual_variance: float
    r2: float
    n: int

    def __post_init__(self):
        if set(self.beta_x) != set(self.beta_Tx):
            raise ConfigError("beta_x and beta_Tx must cover the same covariates")


def _design(x: np.ndarray, treated: np.ndarray):
    t = treated.astype(float)[:, None]
    return np.hstack([np.ones((len(x), 1)), x, t, x * t])


def _column_names(covariates):
    return ["(intercept)", *covariates, "T", *[f"T:{c}" for c in covariates]]


def _check_rank(design: np.ndarray, names):
    r = scipy.linalg.qr(design, mode="r", pivoting=True)
    rdiag = np.abs(np.diag(r[0]))
    tol = max(design.shape) * np.finfo(float).eps * (rdiag.max() if rdiag.size else 0.0)
    rank = int(np.sum(rdiag > tol))
    if rank < design.shape[1]:
        dropped = sorted(r[1][rank:].tolist())
        raise SingularDesignError([names[j] for j in dropped])


def transform_outcome(spec: OutcomeSpec, y: np.ndarray) -> np.ndarray:
    if spec.transform == "log":
        if np.any(y[np.isfinite(y)] <= 0):
            raise DomainError(f"log transform for outcome {spec.name!r} requires positive values")
        return np.log(y)
    return np.asarray(y, dtype=float)


def fit_ols_te(dataset: Dataset, outcome, covariates=None) -> OlsTeModel:
    """Least-squares fit of the interacted regression on the transformed endline.

    Households with a missing endline for this outcome, or missing
    heterogeneity covariates, are dropped from the fit (they can still be
    predicted). Requires at least 2*(2k+2) usable rows and a full-rank design.
    """
    spec = dataset.outcome(outcome) if isinstance(outcome, str) else outcome
    covariates = list(covariates) if covariates is not None else list(dataset.het_covariates)
    cols = [dataset.het_covariates.index(c) for c in covariates]
    j = dataset.outcome_names.index(spec.name)

    y = transform_outcome(spec, dataset.y_endline[:, j])
    x = dataset.x_tilde[:, cols]
    keep = np.isfinite(y) & np.all(np.isfinite(x), axis=1)
    y, x, treated = y[keep], x[keep], dataset.treated[keep]

    k = len(covariates)
    min_n = 2 * (2 * k + 2)
    if len(y) < min_n:
        raise EstimationError(
            f"outcome {spec.name!r}: {len(y)} usable households, need >= {min_n} "
            f"for {k} interacted covariates"
        )
    design = _design(x, treated)
    _check_rank(design, _column_names(covariates))
    beta, _, _, _ = np.linalg.lstsq(design, y, rcond=None)

    resid = y - design @ beta
    dof = len(y) - design.shape[1]
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return OlsTeModel(
        outcome=spec.name,
        covariates=covariates,
        beta0=float(beta[0]),
        beta_x=dict(zip(covariates, beta[1 : k + 1].tolist())),
        beta_T=float(beta[k + 1]),
        beta_Tx=dict(zip(covariates, beta[k + 2 :].tolist())),
        residual_variance=ss_res / dof if dof > 0 else 0.0,
        r2=1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0,
        n=len(y),
    )


def predict_te_ols(model: OlsTeModel, x_tilde: dict) -> float:
    """Fitted treatment effect bT + bTx.x for one household."""
    te = model.beta_T
    for c in model.covariates:
        if c not in x_tilde:
            raise ConfigError(f"covariate {c!r} missing from household characteristics")
        te += model.beta_Tx[c] * x_tilde[c]
    return float(te)


def predict_te_ols_matrix(model: OlsTeModel, x: np.ndarray, covariates) -> np.ndarray:
    """Vectorized prediction; ``x`` columns follow ``covariates``."""
    cols = [covariates.index(c) for c in model.covariates]
    btx = np.array([model.beta_Tx[c] for c in model.covariates])
    return model.beta_T + x[:, cols] @ btx
