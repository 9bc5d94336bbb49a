"""Synthetic data generator following the package's own ranking model.

Draws households with a mix of binary and continuous characteristics, gives
each a heterogeneous treatment effect per outcome, scores them with the
welfare function, and ranks them by score plus extreme-value noise. Because
the data generating process is exactly the estimation model, the generator
doubles as the ground-truth oracle for estimator tests: the emitted run
carries the true preferences, true effects, and true scores.

Outcomes: a log-transformed numeraire ("consumption") plus two linear "bad"
outcomes ("school_days_missed", "sick_days") where negative effects are
improvements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .model import OutcomeSpec, PreferenceParams, TreatmentEffectMatrix, from_increments

OUTCOMES = [
    OutcomeSpec("consumption", transform="log", is_numeraire=True, units="pesos/month"),
    OutcomeSpec("school_days_missed", transform="linear", units="days/child", bad=True),
    OutcomeSpec("sick_days", transform="linear", units="days/child", bad=True),
]

WELFARE_COVARIATES = ["group", "log_income", "hh_size", "age", "educ"]
HET_COVARIATES = WELFARE_COVARIATES + ["z_cons", "z_school", "z_health"]

# defaults in 1%-increment units; magnitudes typical of cash-transfer targeting
DEFAULT_OMEGA_INCREMENTS = {
    "group": -12.4,
    "log_income": -14.3,
    "hh_size": 5.6,
    "age": -10.0,
    "educ": -39.9,
}
DEFAULT_LAMBDA = {"school_days_missed": -0.03, "sick_days": 0.08}


@dataclass
class SimConfig:
    n: int = 2000
    seed: int = 0
    sigma: float = 0.05
    C: float = 0.47
    omega_increments: dict = field(default_factory=lambda: dict(DEFAULT_OMEGA_INCREMENTS))
    lam: dict = field(default_factory=lambda: dict(DEFAULT_LAMBDA))
    treat_frac: float = 0.5
    binary_tiers: bool = False
    outcome_noise: dict = field(
        default_factory=lambda: {"consumption": 0.20, "school_days_missed": 0.6, "sick_days": 0.7}
    )
    missing_endline_rate: float = 0.0


@dataclass
class SimulatedRun:
    """A generated dataset plus everything the generator knows to be true."""

    dataset: Dataset
    te_true: TreatmentEffectMatrix
    truth: PreferenceParams
    delta_s: np.ndarray
    config: SimConfig


def true_te(x_tilde: np.ndarray) -> np.ndarray:
    """Treatment effects in utility units as linear functions of het covariates.

    Columns of x_tilde follow HET_COVARIATES. The numeraire effect varies with
    group membership, income, and an independent factor, which is what makes
    welfare weights identifiable; the two bads load on their own factors so
    impact weights are identifiable too.
    """
    group = x_tilde[:, 0]
    log_income = x_tilde[:, 1]
    z_cons = x_tilde[:, 5]
    z_school = x_tilde[:, 6]
    z_health = x_tilde[:, 7]
    te_cons = 0.135 + 0.10 * group - 0.05 * log_income + 0.10 * z_cons
    te_school = -0.05 - 0.6 * z_school + 0.2 * log_income
    te_sick = -0.20 - 0.8 * z_health + 0.3 * group
    return np.column_stack([te_cons, te_school, te_sick])


def simulate(cfg: SimConfig) -> SimulatedRun:
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n
    group = rng.binomial(1, 0.4, n).astype(float)
    log_income = rng.normal(0.0, 0.7, n)
    hh_size = rng.integers(1, 9, n).astype(float)
    age = rng.normal(0.0, 1.0, n)
    educ = rng.binomial(1, 0.15, n).astype(float)
    z = rng.normal(0.0, 1.0, (n, 3))
    x_tilde = np.column_stack([group, log_income, hh_size, age, educ, z])
    x = x_tilde[:, :5]

    treated = rng.random(n) < cfg.treat_frac
    te = true_te(x_tilde)

    truth = PreferenceParams(
        omega={k: from_increments(v) for k, v in cfg.omega_increments.items()},
        lam=dict(cfg.lam),
        C=cfg.C,
        sigma=cfg.sigma,
    )
    theta = np.array([np.log(truth.omega[c]) for c in WELFARE_COVARIATES])
    mu = np.exp(x @ theta)
    lam_vec = np.array([truth.lam[o.name] for o in OUTCOMES if not o.is_numeraire])
    delta_s = mu * (te[:, 0] + te[:, 1:] @ lam_vec + truth.C)

    # outcome levels in utility units: a predictable component m(x_tilde)
    # shared by baseline and endline, plus independent period noise. Keeping
    # the endline's unpredictable part equal to outcome_noise means the
    # effect estimators face exactly that residual.
    m = np.column_stack(
        [
            5.0 + 0.25 * log_income + 0.03 * hh_size,   # log consumption
            3.0 + 0.3 * log_income + 0.2 * z[:, 1],     # school days missed
            4.0 + 0.5 * group + 0.3 * z[:, 2],          # sick days
        ]
    )
    noise = np.column_stack(
        [rng.normal(0.0, cfg.outcome_noise[o.name], n) for o in OUTCOMES]
    )
    baseline_noise = np.column_stack(
        [rng.normal(0.0, s, n) for s in (0.35, 0.4, 0.5)]
    )
    drift = np.array([0.05, -0.1, -0.2])
    g_base = m + baseline_noise
    g_end = m + drift[None, :] + te * treated[:, None] + noise
    y_baseline = g_base.copy()
    y_endline = g_end.copy()
    y_baseline[:, 0] = np.exp(g_base[:, 0])
    y_endline[:, 0] = np.exp(g_end[:, 0])

    if cfg.missing_endline_rate > 0:
        mask = rng.random((n, len(OUTCOMES))) < cfg.missing_endline_rate
        y_endline[mask] = np.nan

    score = delta_s + rng.gumbel(0.0, cfg.sigma, n)
    if cfg.binary_tiers:
        tier = (score >= np.median(score)).astype(float)
    else:
        tier = np.argsort(np.argsort(score)).astype(float)  # 0 = lowest priority

    ids = [f"hh{i:05d}" for i in range(n)]
    dataset = Dataset(
        ids=ids,
        outcomes=list(OUTCOMES),
        welfare_covariates=list(WELFARE_COVARIATES),
        het_covariates=list(HET_COVARIATES),
        x=x,
        x_tilde=x_tilde,
        y_baseline=y_baseline,
        y_endline=y_endline,
        treated=treated,
        tier=tier,
    )
    te_true = TreatmentEffectMatrix(
        ids=ids,
        outcomes=[o.name for o in OUTCOMES],
        delta=te,
        source={o.name: "external" for o in OUTCOMES},
    )
    return SimulatedRun(dataset=dataset, te_true=te_true, truth=truth, delta_s=delta_s, config=cfg)
