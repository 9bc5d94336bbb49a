"""Likelihood of an observed tiered ranking given preference parameters.

The ranking model: household i's latent score is delta_S_i + sigma * eps_i
with iid extreme-value noise, and the observed tiers are the resulting
priority order. The likelihood of the full ranking is a product of sequential
logit choice probabilities, where each household competes against itself plus
every household in strictly lower tiers. Ties are treated as simultaneous
choices over the lower tiers, so tier-mates never enter each other's
denominators (the convention under which the 2-tier binary allocation is
well defined).

Free parameters are estimated on unconstrained transforms: theta_k = ln
omega_k per welfare covariate, lambda_j per non-numeraire outcome, C, and
s = ln sigma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ..errors import ConfigError, DataError
from ..model import PreferenceParams, TreatmentEffectMatrix
from .tiers import RankingTiers


@dataclass
class LogLikResult:
    loglik: float
    gradient: dict


class PreferenceLikelihood:
    """Maps a free-parameter vector to the ranking log-likelihood.

    Holds the design (welfare covariates, treatment effects, tier layout)
    once; evaluations are pure and cheap, so optimizers, multi-starts and
    bootstrap draws can share an instance across threads.

    Parameter vector layout: [theta (one per welfare covariate)] +
    [lambda (one per non-numeraire outcome, if free)] + [C if free] +
    [ln sigma if free]. The constrained decision-rule characterization uses
    ``zero_impacts=True`` with lambda/C/sigma fixed, which reduces scores to
    mu(x) alone.
    """

    def __init__(
        self,
        ids,
        x,
        dv_numeraire,
        dv_rest,
        covariates,
        rest_outcomes,
        order,
        tier_sizes,
        free_lambda=True,
        free_C=True,
        free_sigma=True,
        fixed_lambda=None,
        fixed_C=0.0,
        fixed_sigma=1.0,
        zero_impacts=False,
    ):
        self.ids = list(ids)
        n = len(self.ids)
        x = np.asarray(x, dtype=float).reshape(n, -1)
        dv_numeraire = np.zeros(n) if zero_impacts else np.asarray(dv_numeraire, dtype=float)
        if dv_rest is None or zero_impacts:
            dv_rest = np.zeros((n, len(rest_outcomes)))
        dv_rest = np.asarray(dv_rest, dtype=float).reshape(n, len(rest_outcomes))
        order = np.asarray(order)
        self.covariates = list(covariates)
        self.rest_outcomes = list(rest_outcomes)
        self.tier_sizes = np.asarray(tier_sizes, dtype=np.int64)
        # tier-ordered copies; everything downstream works in this order
        self._ids_ordered = [self.ids[i] for i in order]
        self._x = np.ascontiguousarray(x[order])
        self._dv0 = np.ascontiguousarray(dv_numeraire[order])
        self._dvr = np.ascontiguousarray(dv_rest[order])
        self.free_lambda = free_lambda and len(rest_outcomes) > 0
        self.free_C = free_C
        self.free_sigma = free_sigma
        self.fixed_lambda = np.zeros(len(rest_outcomes)) if fixed_lambda is None else np.asarray(fixed_lambda, float)
        self.fixed_C = float(fixed_C)
        self.fixed_sigma = float(fixed_sigma)
        self.param_names = [f"ln_omega:{c}" for c in self.covariates]
        if self.free_lambda:
            self.param_names += [f"lambda:{o}" for o in self.rest_outcomes]
        if self.free_C:
            self.param_names.append("C")
        if self.free_sigma:
            self.param_names.append("ln_sigma")
        self.n_params = len(self.param_names)
        self.n = n

    # ---- parameter vector <-> named parameters ----------------------------

    def pack(self, params: PreferenceParams) -> np.ndarray:
        vec = [math.log(params.omega[c]) for c in self.covariates]
        if self.free_lambda:
            vec += [params.lam[o] for o in self.rest_outcomes]
        if self.free_C:
            vec.append(params.C)
        if self.free_sigma:
            vec.append(math.log(params.sigma))
        return np.asarray(vec, dtype=float)

    def unpack(self, vec) -> PreferenceParams:
        vec = np.asarray(vec, dtype=float)
        k = len(self.covariates)
        omega = {c: math.exp(v) for c, v in zip(self.covariates, vec[:k])}
        pos = k
        if self.free_lambda:
            lam = {o: float(v) for o, v in zip(self.rest_outcomes, vec[pos:pos + len(self.rest_outcomes)])}
            pos += len(self.rest_outcomes)
        else:
            lam = {o: float(v) for o, v in zip(self.rest_outcomes, self.fixed_lambda)}
        C = float(vec[pos]) if self.free_C else self.fixed_C
        pos += int(self.free_C)
        sigma = math.exp(float(vec[pos])) if self.free_sigma else self.fixed_sigma
        return PreferenceParams(omega=omega, lam=lam, C=C, sigma=sigma)

    # ---- evaluation --------------------------------------------------------

    def _components(self, vec):
        vec = np.asarray(vec, dtype=float)
        k = len(self.covariates)
        theta = vec[:k]
        pos = k
        if self.free_lambda:
            lam = vec[pos:pos + len(self.rest_outcomes)]
            pos += len(self.rest_outcomes)
        else:
            lam = self.fixed_lambda
        C = vec[pos] if self.free_C else self.fixed_C
        pos += int(self.free_C)
        s = vec[pos] if self.free_sigma else math.log(self.fixed_sigma)
        with np.errstate(over="ignore"):
            mu = np.exp(self._x @ theta)
            inner = self._dv0 + self._dvr @ lam + C
            u = mu * inner * math.exp(-s)
        return u, mu, inner, math.exp(-s)

    def utilities(self, vec) -> np.ndarray:
        """Scaled utilities delta_S / sigma in tier order (uncentered)."""
        u, _, _, _ = self._components(vec)
        if not np.all(np.isfinite(u)):
            bad = self._ids_ordered[int(np.where(~np.isfinite(u))[0][0])]
            raise DataError(f"non-finite welfare impact for household {bad!r}")
        return u

    def _derivs(self, u, mu, inv_sigma):
        du = np.empty((self.n, self.n_params))
        k = len(self.covariates)
        du[:, :k] = self._x * u[:, None]
        pos = k
        if self.free_lambda:
            j = len(self.rest_outcomes)
            du[:, pos:pos + j] = self._dvr * (mu * inv_sigma)[:, None]
            pos += j
        if self.free_C:
            du[:, pos] = mu * inv_sigma
            pos += 1
        if self.free_sigma:
            du[:, pos] = -u
        return du

    def loglik(self, vec) -> float:
        from . import kernel_loglik_and_grad

        u = self.utilities(vec)
        du = np.zeros((self.n, 0))
        ll, _ = kernel_loglik_and_grad(u - u.max(), du, self.tier_sizes)
        return float(ll)

    def loglik_and_grad(self, vec):
        """(loglik, gradient vector) via the single-pass kernel."""
        from . import kernel_loglik_and_grad

        u, mu, _, inv_sigma = self._components(vec)
        if not np.all(np.isfinite(u)):
            bad = self._ids_ordered[int(np.where(~np.isfinite(u))[0][0])]
            raise DataError(f"non-finite welfare impact for household {bad!r}")
        du = self._derivs(u, mu, inv_sigma)
        ll, grad = kernel_loglik_and_grad(u - u.max(), du, self.tier_sizes)
        return float(ll), grad

    def loglik_naive(self, vec) -> float:
        """Reference evaluation: per-household logsumexp over {self} + lower tiers.

        O(N^2); exists as the oracle the fast path is tested against.
        """
        u = self.utilities(vec)
        offsets = np.concatenate(([0], np.cumsum(self.tier_sizes)))
        total = 0.0
        for t in range(len(self.tier_sizes)):
            lo, hi = offsets[t], offsets[t + 1]
            lower = u[offsets[t + 1]:]
            for i in range(lo, hi):
                pool = np.concatenate(([u[i]], lower))
                total += u[i] - logsumexp(pool)
        return float(total)

    def utility_spread(self, vec) -> float:
        """Range of scaled utilities; spreads beyond ~700 saturate comparisons."""
        u = self.utilities(vec)
        return float(u.max() - u.min())


def _build(params: PreferenceParams, te: TreatmentEffectMatrix, x: dict, tiers: RankingTiers):
    ids = te.ids
    covariates = list(params.omega)
    rest = [o for o in te.outcomes if o in params.lam]
    numeraire = [o for o in te.outcomes if o not in params.lam]
    if len(numeraire) != 1:
        raise ConfigError(
            f"expected exactly one numeraire among {te.outcomes} given lambda over "
            f"{sorted(params.lam)}, found {numeraire}"
        )
    if set(params.lam) - set(te.outcomes):
        raise ConfigError(f"lambda outcomes {sorted(set(params.lam) - set(te.outcomes))} missing from treatment effects")
    try:
        xmat = np.array([[x[h][c] for c in covariates] for h in ids], dtype=float)
    except KeyError as exc:
        raise ConfigError(f"covariate lookup failed: {exc.args[0]!r}") from None
    order, sizes = tiers.layout(ids)
    lik = PreferenceLikelihood(
        ids=ids,
        x=xmat,
        dv_numeraire=te.column(numeraire[0]),
        dv_rest=np.column_stack([te.column(o) for o in rest]) if rest else np.zeros((len(ids), 0)),
        covariates=covariates,
        rest_outcomes=rest,
        order=order,
        tier_sizes=sizes,
    )
    return lik, lik.pack(params)


def exploded_loglik_naive(params: PreferenceParams, te: TreatmentEffectMatrix, x: dict, tiers: RankingTiers) -> float:
    """Ranking log-likelihood by direct per-household logsumexp (the oracle path)."""
    lik, vec = _build(params, te, x, tiers)
    return lik.loglik_naive(vec)


def exploded_loglik_fast(params: PreferenceParams, te: TreatmentEffectMatrix, x: dict, tiers: RankingTiers) -> LogLikResult:
    """Ranking log-likelihood and analytic gradient via the single-pass kernel."""
    lik, vec = _build(params, te, x, tiers)
    ll, grad = lik.loglik_and_grad(vec)
    return LogLikResult(loglik=ll, gradient=dict(zip(lik.param_names, grad.tolist())))


def ranking_probability(params: PreferenceParams, te: TreatmentEffectMatrix, x: dict, tiers: RankingTiers) -> float:
    """exp(loglik) for small rankings, where the number is still interpretable."""
    if tiers.n_households > 15:
        raise ConfigError(
            f"ranking probability only offered for N<=15 (got {tiers.n_households}); "
            "use the log-likelihood directly"
        )
    lik, vec = _build(params, te, x, tiers)
    return float(math.exp(lik.loglik(vec)))
