"""Pure-numpy evaluation of the tiered ranking likelihood and its gradient.

Fallback for the compiled kernel in ``_kernel.pyx``; same contract, same
reverse-pass algorithm, but the per-tier loop runs in Python. The compiled
path is typically 10-100x faster on full rankings (many small tiers); see
benchmarks/bench_loglik.py.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def loglik_and_grad(u, du, tier_sizes):
    """Log-likelihood and gradient of a tiered ranking under scaled utilities.

    Parameters
    ----------
    u : (N,) float array
        Scaled utilities (delta_S / sigma), arranged tier-contiguously with
        tier 0 (highest priority) first. Callers should center u (subtract
        its max); every exponential below is then bounded by 1.
    du : (N, P) float array
        Derivative of each household's utility with respect to each free
        parameter.
    tier_sizes : (T,) int array
        Number of households per tier, top tier first.

    Returns
    -------
    (loglik, grad) where ``grad`` has shape (P,).

    Each household's term is u_i - log(exp(u_i) + sum_lower exp(u)), where
    "lower" means all strictly lower tiers: tier members never appear in each
    other's denominators. The bottom tier contributes exactly 0.
    """
    u = np.ascontiguousarray(u, dtype=float)
    du = np.ascontiguousarray(du, dtype=float)
    tier_sizes = np.asarray(tier_sizes, dtype=np.int64)
    n, p = du.shape
    offsets = np.concatenate(([0], np.cumsum(tier_sizes)))
    if offsets[-1] != n:
        raise ValueError("tier sizes do not sum to the number of households")

    loglik = 0.0
    grad = np.zeros(p)
    # Suffix accumulators over tiers already visited (all strictly lower):
    # m = max utility, es = sum exp(u - m), gs = sum exp(u - m) * du.
    m = -np.inf
    es = 0.0
    gs = np.zeros(p)
    for t in range(len(tier_sizes) - 1, -1, -1):
        lo, hi = offsets[t], offsets[t + 1]
        ut = u[lo:hi]
        dut = du[lo:hi]
        if es > 0.0:
            mi = np.maximum(ut, m)
            ai = np.exp(ut - mi)
            scale = np.exp(m - mi)
            denom = ai + es * scale
            loglik += float(np.sum(ut - mi - np.log(denom)))
            w_self = ai / denom
            grad += (dut * (1.0 - w_self)[:, None]).sum(axis=0)
            grad -= (scale / denom) @ np.broadcast_to(gs, (hi - lo, p))
        # fold this tier into the suffix for the next (higher) tier
        mt = float(ut.max())
        new_m = max(m, mt)
        if es > 0.0:
            r = np.exp(m - new_m)
            es *= r
            gs *= r
        e = np.exp(ut - new_m)
        es += float(e.sum())
        gs += e @ dut
        m = new_m
    return loglik, grad
