"""Estimate preferences from an observed ranking by maximum likelihood.

Everything runs on unconstrained transforms (theta = ln omega, s = ln sigma)
so positivity never needs explicit constraints; a welfare weight driven to
its zero lower bound shows up as theta diverging downward and is flagged as
a corner. Optimization is quasi-Newton (L-BFGS-B on the mean negative
log-likelihood with analytic gradients) from several starts: one neutral
(omega=1, lambda=0, C=0, sigma=1) plus seeded perturbations.

Standard errors come from a two-step bootstrap: resample households with
replacement, re-estimate treatment effects on the resample, then re-estimate
preferences, so both sources of uncertainty propagate. Draws that hit the
omega corner are excluded from the standard deviations, with the exclusion
count reported.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.optimize
from scipy.stats import chi2

from .data import Dataset
from .errors import ConfigError, DataError, IdentificationWarning, NonConvergenceError
from .hte import ForestConfig, build_te_matrix
from .model import LOG_1p01, PreferenceParams, TreatmentEffectMatrix
from .ranklik.loglik import PreferenceLikelihood

THETA_BOUND = 2000 * LOG_1p01          # generous box keeping exp() finite
LN_SIGMA_BOUNDS = (math.log(1e-8), math.log(1e8))


@dataclass
class EstimateConfig:
    n_starts: int = 8
    seed: int = 0
    max_iter: int = 2000
    loglik_tol: float = 1e-8           # absolute change in mean loglik
    gradient_tol: float = 1e-6         # scaled gradient norm at the optimum
    corner_increments: float = 500.0   # |log_1.01 omega| beyond this is a corner
    perturb_scale: float = 0.15


@dataclass
class EstimateResult:
    params: PreferenceParams
    loglik: float
    converged: bool
    n_iterations: int
    n_starts_used: int
    gradient_norm: float
    corner_flags: set
    n_households: int
    param_names: list
    theta_vec: np.ndarray
    start_logliks: list = field(default_factory=list)

    def free_values(self) -> dict:
        return dict(zip(self.param_names, self.theta_vec.tolist()))


@dataclass
class BootstrapResult:
    draws: list                      # retained EstimateResults, by draw index
    n_requested: int
    n_excluded_corner: int
    se: dict                         # free-parameter scale (ln omega, lambda, C, ln sigma)
    param_names: list
    draw_values: np.ndarray          # (n_retained, P)
    sigma_se: float                  # std of sigma itself (reporting scale)
    point: "EstimateResult | None" = None   # full-sample fit the SEs attach to

    def se_increments(self) -> dict:
        """SEs of the welfare-weight block in 1%-increment units."""
        return {
            name.split(":", 1)[1]: s / LOG_1p01
            for name, s in self.se.items()
            if name.startswith("ln_omega:")
        }


def _likelihood_for(dataset: Dataset, te: TreatmentEffectMatrix | None, zero_impacts=False,
                    free_lambda=True, free_C=True, free_sigma=True,
                    fixed_C=0.0, fixed_sigma=1.0) -> PreferenceLikelihood:
    tiers = dataset.ranking_tiers()
    order, sizes = tiers.layout(dataset.ids)
    rest = [o.name for o in dataset.outcomes if not o.is_numeraire]
    if zero_impacts:
        dv0, dvr = None, None
    else:
        aligned = te.aligned_to(dataset.ids)
        cols = {o: k for k, o in enumerate(te.outcomes)}
        dv0 = aligned[:, cols[dataset.numeraire.name]]
        dvr = aligned[:, [cols[o] for o in rest]]
    return PreferenceLikelihood(
        ids=dataset.ids,
        x=dataset.x,
        dv_numeraire=dv0,
        dv_rest=dvr,
        covariates=dataset.welfare_covariates,
        rest_outcomes=rest,
        order=order,
        tier_sizes=sizes,
        free_lambda=free_lambda and not zero_impacts,
        free_C=free_C and not zero_impacts,
        free_sigma=free_sigma and not zero_impacts,
        fixed_C=fixed_C,
        fixed_sigma=fixed_sigma,
        zero_impacts=zero_impacts,
    )


def _bounds(lik: PreferenceLikelihood):
    bounds = []
    for name in lik.param_names:
        if name.startswith("ln_omega:"):
            bounds.append((-THETA_BOUND, THETA_BOUND))
        elif name == "ln_sigma":
            bounds.append(LN_SIGMA_BOUNDS)
        else:
            bounds.append((-1e3, 1e3))
    return bounds


def _scaled_grad_norm(grad: np.ndarray, vec: np.ndarray) -> float:
    return float(np.max(np.abs(grad) * np.maximum(1.0, np.abs(vec)))) if len(vec) else 0.0


def _objective(lik: PreferenceLikelihood):
    """Mean negative loglik with gradient; overflow from an extreme step is
    +inf so the line search backs off instead of crashing."""
    n = lik.n

    def objective(vec):
        try:
            ll, grad = lik.loglik_and_grad(vec)
        except DataError:
            return np.inf, np.zeros(len(vec))
        return -ll / n, -grad / n

    return objective


def _fit_from_starts(lik: PreferenceLikelihood, starts, cfg: EstimateConfig):
    n = lik.n
    objective = _objective(lik)

    # the gradient criterion governs convergence; ftol is set well below it so
    # L-BFGS-B does not stop on flat stretches with the gradient still large
    options = {
        "maxiter": cfg.max_iter,
        "ftol": cfg.loglik_tol / (100 * n),
        "gtol": cfg.gradient_tol / 100,
    }
    best = None
    start_logliks = []
    for vec0 in starts:
        res = scipy.optimize.minimize(
            objective,
            vec0,
            jac=True,
            method="L-BFGS-B",
            bounds=_bounds(lik),
            options=options,
        )
        start_logliks.append(-res.fun * n)
        if best is None or res.fun < best.fun:
            best = res
    # restarting at the incumbent resets the Hessian approximation and
    # reliably squeezes the last order of magnitude out of the gradient
    best.x, best.fun, best.jac = _newton_polish(objective, best.x, best.fun, best.jac, cfg)
    gnorm = _scaled_grad_norm(best.jac, best.x)
    converged = bool(np.isfinite(best.fun)) and gnorm < cfg.gradient_tol
    return best, gnorm, converged, start_logliks


def _newton_polish(objective, x, fun, grad, cfg: EstimateConfig, max_steps=5):
    """Damped Newton refinement with a finite-difference Hessian.

    L-BFGS-B reliably gets within ~1e-5 of a stationary point but its curved
    final steps stall there; a few Newton steps close the gap to the
    gradient tolerance at negligible cost (P extra gradient evaluations per
    step).
    """
    p = len(x)
    for _ in range(max_steps):
        if _scaled_grad_norm(grad, x) < cfg.gradient_tol:
            break
        hess = np.empty((p, p))
        for j in range(p):
            h = 1e-6 * max(1.0, abs(x[j]))
            up, dn = x.copy(), x.copy()
            up[j] += h
            dn[j] -= h
            hess[:, j] = (objective(up)[1] - objective(dn)[1]) / (2 * h)
        hess = 0.5 * (hess + hess.T)
        try:
            step = np.linalg.solve(hess, -grad)
        except np.linalg.LinAlgError:
            break
        improved = False
        for t in (1.0, 0.5, 0.1):
            cand = x + t * step
            try:
                f_c, g_c = objective(cand)
            except Exception:
                continue
            if np.isfinite(f_c) and (
                f_c < fun or _scaled_grad_norm(g_c, cand) < _scaled_grad_norm(grad, x)
            ):
                x, fun, grad = cand, f_c, g_c
                improved = True
                break
        if not improved:
            break
    return x, fun, grad


def _starts(lik: PreferenceLikelihood, cfg: EstimateConfig, extra=None):
    rng = np.random.default_rng([cfg.seed, 0x5741])
    starts = [np.zeros(lik.n_params)]
    if extra is not None:
        starts.insert(0, np.asarray(extra, dtype=float))
    while len(starts) < max(1, cfg.n_starts):
        starts.append(rng.normal(0.0, cfg.perturb_scale, lik.n_params))
    return starts[: max(1, cfg.n_starts)]


def _corner_flags(lik, vec, cfg, two_sided=False) -> set:
    bound = cfg.corner_increments * LOG_1p01
    flags = set()
    for name, v in zip(lik.param_names, vec):
        if not name.startswith("ln_omega:"):
            continue
        if v < -bound or (two_sided and v > bound):
            flags.add(name.split(":", 1)[1])
    return flags


def _check_identification(dataset: Dataset, te: TreatmentEffectMatrix):
    dv0 = te.aligned_to(dataset.ids)[:, te.outcomes.index(dataset.numeraire.name)]
    if np.std(dv0) < 1e-12:
        warnings.warn(
            "treatment effects on the numeraire are homogeneous; sigma and the "
            "welfare weights are not separately identified",
            IdentificationWarning,
            stacklevel=3,
        )


def estimate_preferences(dataset: Dataset, te: TreatmentEffectMatrix,
                         config: EstimateConfig | None = None,
                         warm_start: np.ndarray | None = None) -> EstimateResult:
    """Maximum-likelihood preferences (omega, lambda, C, sigma) from the ranking.

    Multi-start quasi-Newton on the unconstrained transform; returns the best
    local optimum found, with corner diagnostics. ``warm_start`` prepends an
    extra start vector (bootstrap draws restart from the point estimate).
    """
    cfg = config or EstimateConfig()
    _check_identification(dataset, te)
    lik = _likelihood_for(dataset, te)
    best, gnorm, converged, start_lls = _fit_from_starts(lik, _starts(lik, cfg, warm_start), cfg)
    if not np.isfinite(best.fun):
        raise NonConvergenceError("no start produced a finite likelihood")
    return EstimateResult(
        params=lik.unpack(best.x),
        loglik=float(-best.fun * lik.n),
        converged=converged,
        n_iterations=int(best.nit),
        n_starts_used=len(start_lls),
        gradient_norm=gnorm,
        corner_flags=_corner_flags(lik, best.x, cfg),
        n_households=lik.n,
        param_names=list(lik.param_names),
        theta_vec=np.asarray(best.x, dtype=float),
        start_logliks=start_lls,
    )


def characterize_decision_rule(dataset: Dataset, config: EstimateConfig | None = None) -> EstimateResult:
    """Constrained fit describing *who is prioritized*, effects zeroed out.

    Scores collapse to mu(x) (impacts 0, C fixed at 1, sigma fixed at 1 since
    only the scale of ln mu is identified), so the fitted omega-tilde are the
    covariate priorities of the observed ranking, reportable in 1%-increment
    units. A covariate that perfectly separates tiers diverges and is
    reported as a corner (checked in both directions here).
    """
    cfg = config or EstimateConfig()
    lik = _likelihood_for(dataset, None, zero_impacts=True, fixed_C=1.0, fixed_sigma=1.0)
    best, gnorm, converged, start_lls = _fit_from_starts(lik, _starts(lik, cfg), cfg)
    if not np.isfinite(best.fun):
        raise NonConvergenceError("no start produced a finite likelihood")
    return EstimateResult(
        params=lik.unpack(best.x),
        loglik=float(-best.fun * lik.n),
        converged=converged,
        n_iterations=int(best.nit),
        n_starts_used=len(start_lls),
        gradient_norm=gnorm,
        corner_flags=_corner_flags(lik, best.x, cfg, two_sided=True),
        n_households=lik.n,
        param_names=list(lik.param_names),
        theta_vec=np.asarray(best.x, dtype=float),
        start_logliks=start_lls,
    )


@dataclass
class PipelineConfig:
    """Everything a bootstrap draw needs to rerun the two estimation steps."""

    estimators: dict = field(default_factory=lambda: {"*": "ols"})
    forest: ForestConfig = field(default_factory=ForestConfig)
    estimate: EstimateConfig = field(default_factory=EstimateConfig)
    external_te: TreatmentEffectMatrix | None = None
    bootstrap_starts: int = 2
    cluster_covariate: str | None = None


def _refit_te(ds: Dataset, pipeline: PipelineConfig, rng_seed) -> TreatmentEffectMatrix:
    forest_cfg = replace(pipeline.forest, rng_seed=rng_seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        te, _ = build_te_matrix(
            ds, pipeline.estimators, forest_config=forest_cfg, external=pipeline.external_te
        )
    return te


def bootstrap(dataset: Dataset, pipeline: PipelineConfig, B: int, seed: int = 0) -> BootstrapResult:
    """Two-step bootstrap: resample households, refit effects, refit preferences.

    Each draw's RNG stream is derived from (seed, draw index), so results are
    deterministic and independent of execution order. Draws whose omega hits
    the corner bound are excluded from the reported standard deviations.
    """
    if B < 2:
        raise ConfigError(f"bootstrap needs B >= 2 draws, got {B}")
    full_te = _refit_te(dataset, pipeline, rng_seed=pipeline.forest.rng_seed)
    point = estimate_preferences(dataset, full_te, pipeline.estimate)
    draw_cfg = replace(
        pipeline.estimate, n_starts=max(1, pipeline.bootstrap_starts), seed=seed
    )

    if pipeline.cluster_covariate is not None:
        ci = dataset.het_covariates.index(pipeline.cluster_covariate)
        clusters = dataset.x_tilde[:, ci]
        unique = np.unique(clusters)

    retained, values, n_corner = [], [], 0
    for b in range(B):
        rng = np.random.default_rng([seed, b])
        if pipeline.cluster_covariate is None:
            idx = rng.integers(0, dataset.n, dataset.n)
        else:
            chosen = rng.choice(unique, size=len(unique), replace=True)
            idx = np.concatenate([np.where(clusters == c)[0] for c in chosen])
        ds_b = dataset.subset(idx, relabel_ids=True)
        if pipeline.external_te is not None:
            te_b = TreatmentEffectMatrix(
                ids=ds_b.ids,
                outcomes=pipeline.external_te.outcomes,
                delta=pipeline.external_te.aligned_to([dataset.ids[i] for i in idx]),
                source=pipeline.external_te.source,
            )
        else:
            te_b = _refit_te(ds_b, pipeline, rng_seed=int(rng.integers(2**31)))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IdentificationWarning)
            fit = estimate_preferences(ds_b, te_b, draw_cfg, warm_start=point.theta_vec)
        if fit.corner_flags:
            n_corner += 1
            continue
        retained.append(fit)
        values.append(fit.theta_vec)

    if not retained:
        raise NonConvergenceError(f"all {B} bootstrap draws hit corner solutions")
    draw_values = np.vstack(values)
    se = dict(zip(point.param_names, draw_values.std(axis=0, ddof=1).tolist()))
    sigma_draws = [r.params.sigma for r in retained]
    return BootstrapResult(
        draws=retained,
        n_requested=B,
        n_excluded_corner=n_corner,
        se=se,
        param_names=list(point.param_names),
        draw_values=draw_values,
        sigma_se=float(np.std(sigma_draws, ddof=1)),
        point=point,
    )


def characterize_bootstrap(dataset: Dataset, config: EstimateConfig | None = None,
                           B: int = 50, seed: int = 0) -> BootstrapResult:
    """Household-resampling bootstrap of the constrained decision-rule fit.

    No treatment effects enter the constrained model, so this is a one-step
    bootstrap; corner draws are excluded the same way as in :func:`bootstrap`.
    """
    if B < 2:
        raise ConfigError(f"bootstrap needs B >= 2 draws, got {B}")
    cfg = config or EstimateConfig()
    point = characterize_decision_rule(dataset, cfg)
    draw_cfg = replace(cfg, n_starts=2, seed=seed)

    retained, values, n_corner = [], [], 0
    for b in range(B):
        rng = np.random.default_rng([seed, b])
        idx = rng.integers(0, dataset.n, dataset.n)
        ds_b = dataset.subset(idx, relabel_ids=True)
        lik = _likelihood_for(ds_b, None, zero_impacts=True, fixed_C=1.0, fixed_sigma=1.0)
        best, gnorm, converged, _ = _fit_from_starts(
            lik, [point.theta_vec, np.zeros(lik.n_params)], draw_cfg
        )
        flags = _corner_flags(lik, best.x, draw_cfg, two_sided=True)
        if flags:
            n_corner += 1
            continue
        values.append(np.asarray(best.x))
        retained.append(
            EstimateResult(
                params=lik.unpack(best.x),
                loglik=float(-best.fun * lik.n),
                converged=converged,
                n_iterations=int(best.nit),
                n_starts_used=2,
                gradient_norm=gnorm,
                corner_flags=flags,
                n_households=lik.n,
                param_names=list(lik.param_names),
                theta_vec=np.asarray(best.x, dtype=float),
            )
        )
    if not retained:
        raise NonConvergenceError(f"all {B} bootstrap draws hit corner solutions")
    draw_values = np.vstack(values)
    se = dict(zip(point.param_names, draw_values.std(axis=0, ddof=1).tolist()))
    return BootstrapResult(
        draws=retained,
        n_requested=B,
        n_excluded_corner=n_corner,
        se=se,
        param_names=list(point.param_names),
        draw_values=draw_values,
        sigma_se=0.0,
        point=point,
    )


@dataclass
class CommonWeightsTest:
    statistic: float
    dof: int
    p_value: float
    loglik_a: float
    loglik_b: float
    loglik_restricted: float


def test_common_weights(dataset_a: Dataset, te_a: TreatmentEffectMatrix,
                        dataset_b: Dataset, te_b: TreatmentEffectMatrix,
                        config: EstimateConfig | None = None) -> CommonWeightsTest:
    """Likelihood-ratio test that two rankings share the same welfare weights.

    The restricted model shares omega across the two datasets but keeps
    (lambda, C, sigma) dataset-specific; the statistic is twice the loglik
    gap, chi-square with one degree of freedom per welfare covariate.
    """
    if dataset_a.welfare_covariates != dataset_b.welfare_covariates:
        raise ConfigError("the two datasets must share the welfare covariate set")
    cfg = config or EstimateConfig()
    fit_a = estimate_preferences(dataset_a, te_a, cfg)
    fit_b = estimate_preferences(dataset_b, te_b, cfg)

    lik_a = _likelihood_for(dataset_a, te_a)
    lik_b = _likelihood_for(dataset_b, te_b)
    k = len(dataset_a.welfare_covariates)
    pa = lik_a.n_params - k   # per-dataset non-shared block size
    pb = lik_b.n_params - k
    n_total = lik_a.n + lik_b.n

    def split(vec):
        vec_a = np.concatenate([vec[:k], vec[k:k + pa]])
        vec_b = np.concatenate([vec[:k], vec[k + pa:]])
        return vec_a, vec_b

    def objective(vec):
        vec_a, vec_b = split(vec)
        try:
            ll_a, g_a = lik_a.loglik_and_grad(vec_a)
            ll_b, g_b = lik_b.loglik_and_grad(vec_b)
        except DataError:
            return np.inf, np.zeros_like(vec)
        grad = np.zeros_like(vec)
        grad[:k] = g_a[:k] + g_b[:k]
        grad[k:k + pa] = g_a[k:]
        grad[k + pa:] = g_b[k:]
        return -(ll_a + ll_b) / n_total, -grad / n_total

    theta0 = 0.5 * (fit_a.theta_vec[:k] + fit_b.theta_vec[:k])
    start = np.concatenate([theta0, fit_a.theta_vec[k:], fit_b.theta_vec[k:]])
    rng = np.random.default_rng([cfg.seed, 0xC0]); starts = [start, np.zeros_like(start)]
    while len(starts) < max(2, cfg.n_starts // 2):
        starts.append(start + rng.normal(0, cfg.perturb_scale, len(start)))
    bounds = ([(-THETA_BOUND, THETA_BOUND)] * k
              + _bounds(lik_a)[k:] + _bounds(lik_b)[k:])
    options = {
        "maxiter": cfg.max_iter,
        "ftol": cfg.loglik_tol / (100 * n_total),
        "gtol": cfg.gradient_tol / 100,
    }
    best = None
    for vec0 in starts:
        res = scipy.optimize.minimize(
            objective, vec0, jac=True, method="L-BFGS-B", bounds=bounds, options=options,
        )
        if best is None or res.fun < best.fun:
            best = res
    ll_restricted = float(-best.fun * n_total)
    stat = max(0.0, 2.0 * (fit_a.loglik + fit_b.loglik - ll_restricted))
    return CommonWeightsTest(
        statistic=stat,
        dof=k,
        p_value=float(chi2.sf(stat, k)),
        loglik_a=fit_a.loglik,
        loglik_b=fit_b.loglik,
        loglik_restricted=ll_restricted,
    )
