"""Forward direction: from preferences to allocations, outcomes, frontiers.

Given a preference vector, households are scored by their welfare impact and
the top K selected (budget = headcount). The implied covariate priorities of
any counterfactual allocation come from re-running the constrained
decision-rule characterization on the induced ranking, and expected outcomes
from switching each selected household's predicted effect on.

The frontier sweeps allocation space: each direction on the outcome sphere
picks the size-K set maximizing that weighted combination of (sign-adjusted)
effects, which traces exactly the support points of the feasible set of
average-impact vectors; their convex hull is the attainable frontier.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .data import Dataset
from .errors import ConfigError, DataError
from .inference import EstimateConfig, EstimateResult, characterize_decision_rule
from .model import PreferenceParams, TreatmentEffectMatrix, WelfareImpactVector

WEIGHTINGS = ("raw", "welfare_weighted", "survey_weighted")


@dataclass
class CounterfactualResult:
    scores: WelfareImpactVector
    selected: set
    implied_priorities: dict          # covariate -> log_1.01 units
    expected_outcomes: dict           # outcome -> mean level (transformed scale)
    k: int


@dataclass
class FrontierPoint:
    direction: tuple
    impacts: tuple                    # per-outcome average impact, natural sign
    on_hull: bool = False


@dataclass
class FrontierResult:
    points: list
    hull_vertices: list               # indices into points
    weighting: str
    degenerate: bool = False
    outcomes: list = field(default_factory=list)


def score_households(params: PreferenceParams, te: TreatmentEffectMatrix,
                     x: np.ndarray, covariates, numeraire: str) -> WelfareImpactVector:
    """Vectorized welfare impact mu(x) * (dv0 + lambda.dv + C) per household."""
    theta = np.array([np.log(params.omega[c]) for c in covariates])
    mu = np.exp(np.asarray(x, dtype=float) @ theta)
    rest = [o for o in te.outcomes if o != numeraire]
    missing = set(params.lam) - set(rest)
    if missing:
        raise ConfigError(f"lambda refers to unknown outcomes: {sorted(missing)}")
    inner = te.column(numeraire) + params.C
    for o in rest:
        inner = inner + params.lam.get(o, 0.0) * te.column(o)
    return WelfareImpactVector(ids=list(te.ids), values=mu * inner)


def allocate_top_k(scores: WelfareImpactVector, k: int) -> set:
    """The K highest-impact households; ties broken by ascending id."""
    n = len(scores.ids)
    if not (0 < k <= n):
        raise ConfigError(f"K must be in 1..{n}, got {k}")
    order = sorted(range(n), key=lambda i: (-scores.values[i], str(scores.ids[i])))
    return {scores.ids[i] for i in order[:k]}


def expected_outcomes(selection: set, te: TreatmentEffectMatrix, dataset: Dataset) -> dict:
    """Mean per-outcome level (transformed scale) if exactly ``selection`` is treated.

    Baseline is each household's predicted untreated endline: observed endline
    de-treated by its estimated effect for actually-treated households. The
    log numeraire is reported in log points, linear outcomes in raw units.
    """
    from .hte.ols import transform_outcome

    aligned = te.aligned_to(dataset.ids)
    sel = np.array([h in selection for h in dataset.ids])
    treated = dataset.treated.astype(float)
    out = {}
    for j, spec in enumerate(dataset.outcomes):
        y = transform_outcome(spec, dataset.y_endline[:, j])
        if not np.all(np.isfinite(y)):
            raise DataError(
                f"outcome {spec.name!r}: counterfactual outcomes need complete endlines"
            )
        dv = aligned[:, te.outcomes.index(spec.name)]
        untreated = y - treated * dv
        out[spec.name] = float(np.mean(untreated + sel * dv))
    return out


def characterize_counterfactual_rule(scores: WelfareImpactVector, dataset: Dataset,
                                     config: EstimateConfig | None = None) -> dict:
    """Covariate priorities (log 1.01 units) implied by a score vector."""
    fit = characterize_from_scores(scores, dataset, config)
    return fit.params.omega_increments()


def characterize_from_scores(scores: WelfareImpactVector, dataset: Dataset,
                             config: EstimateConfig | None = None) -> EstimateResult:
    ranked = dataset.subset(np.arange(dataset.n))
    by_id = scores.as_dict()
    try:
        values = np.array([by_id[h] for h in dataset.ids])
    except KeyError as exc:
        raise DataError(f"score missing for household {exc.args[0]!r}") from None
    # rank order, not raw scores: tiers care only about the ordering
    ranked.tier = np.argsort(np.argsort(values)).astype(float)
    return characterize_decision_rule(ranked, config)


def frontier(te: TreatmentEffectMatrix, dataset: Dataset, k: int,
             n_directions: int = 2048, weighting: str = "raw", seed: int = 0,
             mu: np.ndarray | None = None) -> FrontierResult:
    """Attainable average-impact frontier over all size-K allocations.

    Directions are uniform on the outcome sphere (plus every signed axis, so
    single-outcome policies are exact frontier points). "Bads" enter
    direction handling with flipped sign so a positive direction component
    always means improving that outcome; reported impacts keep natural signs.
    Under welfare/survey weighting each household's impact is premultiplied
    by its welfare weight mu before averaging.
    """
    if weighting not in WEIGHTINGS:
        raise ConfigError(f"weighting must be one of {WEIGHTINGS}, got {weighting!r}")
    if n_directions < 6:
        raise ConfigError(f"n_directions must be >= 6, got {n_directions}")
    j = len(te.outcomes)
    if j != 3:
        raise ConfigError(f"the frontier sweep expects 3 outcomes, got {j}")
    n = len(te.ids)
    if not (0 < k <= n):
        raise ConfigError(f"K must be in 1..{n}, got {k}")

    signs = np.array([-1.0 if dataset.outcome(o).bad else 1.0 for o in te.outcomes])
    impacts = te.delta.copy()
    if weighting != "raw":
        if mu is None:
            raise ConfigError(f"{weighting} frontier needs per-household welfare weights")
        impacts = impacts * np.asarray(mu, dtype=float)[:, None]
    adjusted = impacts * signs[None, :]

    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(n_directions, j))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    axes = np.vstack([np.eye(j), -np.eye(j)])
    dirs = np.vstack([dirs, axes])

    points = []
    for w in dirs:
        value = adjusted @ w
        top = np.argpartition(-value, k - 1)[:k]
        points.append(impacts[top].sum(axis=0) / n)
    pts = np.asarray(points)

    degenerate = bool(np.allclose(pts, pts[0], atol=1e-12))
    hull_vertices = []
    if degenerate:
        warnings.warn("all effects equal: frontier collapses to a single point", stacklevel=2)
    else:
        try:
            hull = ConvexHull(pts)
            hull_vertices = sorted(int(v) for v in hull.vertices)
        except QhullError:
            # coplanar/collinear cloud: joggle into full dimension
            hull = ConvexHull(pts, qhull_options="QJ")
            hull_vertices = sorted(int(v) for v in hull.vertices)
    on_hull = set(hull_vertices)
    return FrontierResult(
        points=[
            FrontierPoint(direction=tuple(d.tolist()), impacts=tuple(p.tolist()), on_hull=i in on_hull)
            for i, (d, p) in enumerate(zip(dirs, pts))
        ],
        hull_vertices=hull_vertices,
        weighting=weighting,
        degenerate=degenerate,
        outcomes=list(te.outcomes),
    )


def counterfactual_allocation(params: PreferenceParams, te: TreatmentEffectMatrix,
                              dataset: Dataset, k: int,
                              config: EstimateConfig | None = None) -> CounterfactualResult:
    """Full forward run: scores, selection, implied priorities, outcomes."""
    aligned = TreatmentEffectMatrix(
        ids=list(dataset.ids), outcomes=te.outcomes,
        delta=te.aligned_to(dataset.ids), source=te.source,
    )
    scores = score_households(
        params, aligned, dataset.x, dataset.welfare_covariates, dataset.numeraire.name
    )
    selection = allocate_top_k(scores, k)
    return CounterfactualResult(
        scores=scores,
        selected=selection,
        implied_priorities=characterize_counterfactual_rule(scores, dataset, config),
        expected_outcomes=expected_outcomes(selection, aligned, dataset),
        k=k,
    )
