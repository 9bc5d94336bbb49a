"""A simplified honest causal forest.

Each tree draws a subsample, splits it into two disjoint halves, grows its
structure greedily on the first half (maximizing between-child variance of
the estimated effect, n_L*n_R*(tau_L - tau_R)^2 over a quantile grid of
candidate thresholds), and estimates leaf effects as mean(treated) -
mean(control) on the second half. Splitting never sees the estimation half,
which is what keeps leaf estimates unbiased for the leaf population.

Trees are keyed by (seed, tree_index) and the sample is id-sorted before any
randomness, so fits are reproducible and invariant to input row order, and
trees can be grown in parallel without changing the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..data import Dataset
from ..errors import ConfigError, EstimationError
from .ols import transform_outcome


@dataclass
class ForestConfig:
    n_trees: int = 200
    min_leaf: int = 10            # per treatment arm, on the split half
    subsample_fraction: float = 0.5
    max_depth: int = 8
    max_thresholds: int = 32
    rng_seed: int = 0

    def validate(self):
        if self.n_trees <= 0:
            raise ConfigError(f"n_trees must be positive, got {self.n_trees}")
        if not (0 < self.subsample_fraction <= 1):
            raise ConfigError("subsample_fraction must be in (0, 1]")
        if self.min_leaf < 1 or self.max_depth < 0:
            raise ConfigError("min_leaf >= 1 and max_depth >= 0 required")


@dataclass
class TreeNode:
    """Split record; leaves have covariate None. Estimation-half statistics
    are attached to every node so prediction can fall back to the deepest
    ancestor with both treatment arms."""

    covariate: int | None = None
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    n_treated: int = 0
    n_control: int = 0
    mean_treated: float = 0.0
    mean_control: float = 0.0
    n_split: int = 0

    @property
    def is_leaf(self):
        return self.covariate is None

    @property
    def has_both_arms(self):
        return self.n_treated >= 1 and self.n_control >= 1

    def effect(self) -> float:
        return self.mean_treated - self.mean_control


@dataclass
class Tree:
    root: TreeNode
    split_indices: np.ndarray      # positions into the fit sample (id-sorted)
    estimation_indices: np.ndarray


@dataclass
class ForestTeModel:
    outcome: str
    covariates: list
    trees: list
    config: ForestConfig
    ids: list = field(default_factory=list)   # id-sorted fit sample


def _split_candidates(values: np.ndarray, max_thresholds: int) -> np.ndarray:
    qs = np.linspace(0.0, 1.0, max_thresholds + 2)[1:-1]
    cand = np.unique(np.quantile(values, qs))
    return cand[(cand >= values.min()) & (cand < values.max())]


def _best_split(x, y, t, idx, cfg: ForestConfig):
    """(covariate, threshold, gain) maximizing n_L*n_R*(tau_L - tau_R)^2, or None.

    One sort per covariate, then every candidate threshold is evaluated from
    cumulative per-arm counts and outcome sums in O(1).
    """
    best = None
    yt = y[idx]
    tt = t[idx]
    for c in range(x.shape[1]):
        v = x[idx, c]
        order = np.argsort(v, kind="stable")
        vs, ts, ys = v[order], tt[order], yt[order]
        cand = _split_candidates(vs, cfg.max_thresholds)
        if cand.size == 0:
            continue
        cum_t = np.cumsum(ts)
        cum_c = np.cumsum(~ts)
        cum_yt = np.cumsum(ys * ts)
        cum_yc = np.cumsum(ys * ~ts)
        pos = np.searchsorted(vs, cand, side="right") - 1
        nlt, nlc = cum_t[pos], cum_c[pos]
        nrt, nrc = cum_t[-1] - nlt, cum_c[-1] - nlc
        ok = (
            (nlt >= cfg.min_leaf)
            & (nlc >= cfg.min_leaf)
            & (nrt >= cfg.min_leaf)
            & (nrc >= cfg.min_leaf)
        )
        if not ok.any():
            continue
        with np.errstate(invalid="ignore", divide="ignore"):
            tau_l = cum_yt[pos] / nlt - cum_yc[pos] / nlc
            tau_r = (cum_yt[-1] - cum_yt[pos]) / nrt - (cum_yc[-1] - cum_yc[pos]) / nrc
            gain = (nlt + nlc) * (nrt + nrc) * (tau_l - tau_r) ** 2
        gain[~ok] = -np.inf
        b = int(np.argmax(gain))
        if np.isfinite(gain[b]) and (best is None or gain[b] > best[2]):
            best = (c, float(cand[b]), float(gain[b]))
    return best


def _grow(x, y, t, idx, depth, cfg: ForestConfig) -> TreeNode:
    node = TreeNode(n_split=len(idx))
    if depth >= cfg.max_depth:
        return node
    best = _best_split(x, y, t, idx, cfg)
    if best is None or best[2] <= 0.0:
        return node
    c, thr, _ = best
    mask = x[idx, c] <= thr
    node.covariate = c
    node.threshold = thr
    node.left = _grow(x, y, t, idx[mask], depth + 1, cfg)
    node.right = _grow(x, y, t, idx[~mask], depth + 1, cfg)
    return node


def _attach_estimates(node: TreeNode, x, y, t, idx):
    treated = idx[t[idx]]
    control = idx[~t[idx]]
    node.n_treated = len(treated)
    node.n_control = len(control)
    node.mean_treated = float(y[treated].mean()) if len(treated) else 0.0
    node.mean_control = float(y[control].mean()) if len(control) else 0.0
    if not node.is_leaf:
        mask = x[idx, node.covariate] <= node.threshold
        _attach_estimates(node.left, x, y, t, idx[mask])
        _attach_estimates(node.right, x, y, t, idx[~mask])


def fit_causal_forest(dataset: Dataset, outcome, covariates=None, config: ForestConfig | None = None) -> ForestTeModel:
    """Honest forest of effect trees for one outcome (transformed scale)."""
    cfg = config or ForestConfig()
    cfg.validate()
    spec = dataset.outcome(outcome) if isinstance(outcome, str) else outcome
    covariates = list(covariates) if covariates is not None else list(dataset.het_covariates)
    cols = [dataset.het_covariates.index(c) for c in covariates]
    j = dataset.outcome_names.index(spec.name)

    y = transform_outcome(spec, dataset.y_endline[:, j])
    x = dataset.x_tilde[:, cols]
    keep = np.isfinite(y) & np.all(np.isfinite(x), axis=1)
    ids = [dataset.ids[i] for i in np.where(keep)[0]]
    # id-sort so fits do not depend on input row order
    sort = np.argsort(np.array(ids, dtype=object).astype(str))
    ids = [ids[i] for i in sort]
    y = y[keep][sort]
    x = x[keep][sort]
    t = dataset.treated[keep][sort]

    n = len(y)
    if n < 4 * cfg.min_leaf:
        raise EstimationError(f"outcome {spec.name!r}: {n} households, need >= {4 * cfg.min_leaf}")
    if t.sum() == 0 or (~t).sum() == 0:
        raise EstimationError(f"outcome {spec.name!r}: need both treated and control households")

    trees = []
    for ti in range(cfg.n_trees):
        rng = np.random.default_rng([cfg.rng_seed, ti])
        m = max(4, int(round(cfg.subsample_fraction * n)))
        sub = rng.choice(n, size=min(m, n), replace=False)
        rng.shuffle(sub)
        half = len(sub) // 2
        split_idx, est_idx = np.sort(sub[:half]), np.sort(sub[half:])
        if not (t[split_idx].any() and (~t[split_idx]).any() and t[est_idx].any() and (~t[est_idx]).any()):
            # a degenerate half-sample: fall back to a root-only tree
            root = TreeNode(n_split=len(split_idx))
        else:
            root = _grow(x, y, t, split_idx, 0, cfg)
        _attach_estimates(root, x, y, t, est_idx)
        trees.append(Tree(root=root, split_indices=split_idx, estimation_indices=est_idx))
    return ForestTeModel(outcome=spec.name, covariates=covariates, trees=trees, config=cfg, ids=ids)


def _predict_tree(root: TreeNode, row: np.ndarray) -> float:
    node = root
    last_valid = root if root.has_both_arms else None
    while not node.is_leaf:
        node = node.left if row[node.covariate] <= node.threshold else node.right
        if node.has_both_arms:
            last_valid = node
    if last_valid is None:
        raise EstimationError("tree has no node with both treatment arms")
    return last_valid.effect()


def predict_te_forest(model: ForestTeModel, x_tilde: dict) -> float:
    """Average over trees of the effect in the deepest valid node containing x."""
    if not model.trees:
        raise EstimationError("empty forest")
    row = np.array([x_tilde[c] for c in model.covariates], dtype=float)
    return float(np.mean([_predict_tree(tr.root, row) for tr in model.trees]))


def predict_te_forest_matrix(model: ForestTeModel, x: np.ndarray, covariates) -> np.ndarray:
    cols = [covariates.index(c) for c in model.covariates]
    xm = x[:, cols]
    out = np.zeros(len(xm))
    for tr in model.trees:
        out += np.array([_predict_tree(tr.root, row) for row in xm])
    return out / len(model.trees)


def feature_importance(model: ForestTeModel) -> dict:
    """Split-frequency importance weighted by split-half node size, sum 1.

    A forest that never splits has no importance signal; that degenerate case
    returns the uniform distribution.
    """
    weights = np.zeros(len(model.covariates))

    def visit(node: TreeNode):
        if node.is_leaf:
            return
        weights[node.covariate] += node.n_split
        visit(node.left)
        visit(node.right)

    for tr in model.trees:
        visit(tr.root)
    total = weights.sum()
    if total == 0:
        weights[:] = 1.0 / len(weights)
    else:
        weights /= total
    return dict(zip(model.covariates, weights.tolist()))
