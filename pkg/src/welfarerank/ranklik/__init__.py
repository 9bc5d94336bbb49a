"""Exploded-logit likelihood of a tied ranking, with analytic gradients.

The hot loglik+gradient kernel has two interchangeable implementations: a
Cython extension (built at install time) and a pure-numpy fallback. The
compiled one is preferred at import; ``KERNEL_BACKEND`` records which is
active, and ``WELFARERANK_FORCE_PY_KERNEL=1`` forces the fallback.
"""

import os

from . import _kernel_py

if os.environ.get("WELFARERANK_FORCE_PY_KERNEL"):
    _kernel = _kernel_py
else:
    try:
        from . import _kernel  # type: ignore[attr-defined]
    except ImportError:
        _kernel = _kernel_py

KERNEL_BACKEND = _kernel.BACKEND
kernel_loglik_and_grad = _kernel.loglik_and_grad

from .tiers import RankingTiers, tiers_from_ranking  # noqa: E402
from .loglik import (  # noqa: E402
    LogLikResult,
    PreferenceLikelihood,
    exploded_loglik_fast,
    exploded_loglik_naive,
    ranking_probability,
)

__all__ = [
    "KERNEL_BACKEND",
    "kernel_loglik_and_grad",
    "RankingTiers",
    "tiers_from_ranking",
    "LogLikResult",
    "PreferenceLikelihood",
    "exploded_loglik_fast",
    "exploded_loglik_naive",
    "ranking_probability",
]
