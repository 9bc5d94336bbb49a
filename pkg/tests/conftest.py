import numpy as np
import pytest

from welfarerank.model import PreferenceParams, TreatmentEffectMatrix
from welfarerank.ranklik import tiers_from_ranking


def random_instance(rng, n=None, n_cov=None, n_tiers=None, sigma=None):
    """A random (params, te, x, tiers) likelihood instance.

    Utilities are kept O(1) so instances are well conditioned; tier counts
    range from 2 up to n (singleton tiers).
    """
    n = n or int(rng.integers(3, 12))
    n_cov = n_cov if n_cov is not None else int(rng.integers(1, 4))
    ids = [f"h{i}" for i in range(n)]
    covs = [f"x{k}" for k in range(n_cov)]
    outcomes = ["num", "o1", "o2"]
    x = {
        h: {c: float(v) for c, v in zip(covs, rng.normal(0, 0.8, n_cov))}
        for h in ids
    }
    te = TreatmentEffectMatrix(
        ids=ids,
        outcomes=outcomes,
        delta=rng.normal(0, 0.6, (n, 3)),
        source={o: "external" for o in outcomes},
    )
    params = PreferenceParams(
        omega={c: float(np.exp(rng.normal(0, 0.3))) for c in covs},
        lam={"o1": float(rng.normal(0, 0.3)), "o2": float(rng.normal(0, 0.3))},
        C=float(rng.normal(0, 0.5)),
        sigma=sigma if sigma is not None else float(np.exp(rng.normal(0, 0.4))),
    )
    if n_tiers is None:
        n_tiers = int(rng.integers(2, n + 1))
    n_tiers = min(n_tiers, n)
    # random tier labels covering exactly n_tiers levels
    labels = np.concatenate([np.arange(n_tiers), rng.integers(0, n_tiers, n - n_tiers)])
    rng.shuffle(labels)
    tiers = tiers_from_ranking({h: int(t) for h, t in zip(ids, labels)})
    return params, te, x, tiers


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
