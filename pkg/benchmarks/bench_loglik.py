#!/usr/bin/env python3
"""Benchmark the ranking-likelihood kernel: compiled extension vs numpy fallback.

The kernel evaluates the tiered exploded-logit log-likelihood and its
gradient in one reverse pass. Full rankings (every tier a singleton) are the
worst case for the fallback, whose per-tier loop runs in Python.

    python benchmarks/bench_loglik.py [--n 2000 500 100] [--params 9] [--repeat 20]
"""

import argparse
import time

import numpy as np

from welfarerank import ranklik
from welfarerank.ranklik import _kernel_py


def make_instance(rng, n, p, n_tiers):
    u = rng.normal(0, 2, n)
    u -= u.max()
    du = rng.normal(0, 1, (n, p))
    labels = np.concatenate([np.arange(n_tiers), rng.integers(0, n_tiers, n - n_tiers)])
    sizes = np.bincount(labels, minlength=n_tiers).astype(np.int64)
    return u, du, sizes


def bench(fn, args, repeat):
    fn(*args)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, nargs="+", default=[100, 500, 2000, 10000])
    ap.add_argument("--params", type=int, default=9)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    have_compiled = ranklik.KERNEL_BACKEND == "compiled"
    if not have_compiled:
        print("note: compiled kernel not built; timing the fallback only")
    rng = np.random.default_rng(0)

    print(f"{'N':>7} {'tiers':>7} {'python':>12} {'compiled':>12} {'speedup':>9}")
    for n in args.n:
        for n_tiers in (2, max(2, n // 10), n):
            inst = make_instance(rng, n, args.params, n_tiers)
            t_py = bench(_kernel_py.loglik_and_grad, inst, args.repeat)
            if have_compiled:
                t_c = bench(ranklik._kernel.loglik_and_grad, inst, args.repeat)
                ll_py = _kernel_py.loglik_and_grad(*inst)[0]
                ll_c = ranklik._kernel.loglik_and_grad(*inst)[0]
                assert abs(ll_py - ll_c) < 1e-9, "kernels disagree"
                print(f"{n:>7} {n_tiers:>7} {t_py * 1e3:>10.3f}ms {t_c * 1e3:>10.3f}ms {t_py / t_c:>8.1f}x")
            else:
                print(f"{n:>7} {n_tiers:>7} {t_py * 1e3:>10.3f}ms {'n/a':>12} {'n/a':>9}")


if __name__ == "__main__":
    main()
