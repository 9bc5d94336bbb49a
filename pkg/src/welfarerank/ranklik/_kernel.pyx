# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled evaluation of the tiered ranking likelihood and its gradient.

Single reverse pass over tiers maintaining a running-max logsumexp and the
matching exp-weighted gradient sums: O(N*P) after the tier sort. Contract is
identical to ``_kernel_py.loglik_and_grad``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, INFINITY

cnp.import_array()

BACKEND = "compiled"


def loglik_and_grad(u_in, du_in, tier_sizes_in):
    """(loglik, grad) for scaled utilities ``u`` tier-contiguous, top tier first.

    See the python fallback for the full parameter description; callers
    should pass max-centered utilities.
    """
    cdef double[::1] u = np.ascontiguousarray(u_in, dtype=np.float64)
    cdef double[:, ::1] du = np.ascontiguousarray(du_in, dtype=np.float64)
    cdef long long[::1] sizes = np.ascontiguousarray(tier_sizes_in, dtype=np.int64)

    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t p = du.shape[1]
    cdef Py_ssize_t n_tiers = sizes.shape[0]
    cdef Py_ssize_t total = 0
    cdef Py_ssize_t t, i, k, lo, hi
    for t in range(n_tiers):
        total += sizes[t]
    if total != n or du.shape[0] != n:
        raise ValueError("tier sizes do not sum to the number of households")

    grad_arr = np.zeros(p, dtype=np.float64)
    gs_arr = np.zeros(p, dtype=np.float64)
    cdef double[::1] grad = grad_arr
    cdef double[::1] gs = gs_arr

    cdef double loglik = 0.0
    cdef double m = -INFINITY   # suffix max utility
    cdef double es = 0.0        # suffix sum exp(u - m)
    cdef double mi, ai, scale, denom, ui, e, mt, new_m, r, c1, c2

    hi = n
    for t in range(n_tiers - 1, -1, -1):
        lo = hi - sizes[t]
        if es > 0.0:
            for i in range(lo, hi):
                ui = u[i]
                mi = ui if ui > m else m
                ai = exp(ui - mi)
                scale = exp(m - mi)
                denom = ai + es * scale
                loglik += ui - mi - log(denom)
                c1 = 1.0 - ai / denom
                c2 = scale / denom
                for k in range(p):
                    grad[k] += c1 * du[i, k] - c2 * gs[k]
        mt = u[lo]
        for i in range(lo + 1, hi):
            if u[i] > mt:
                mt = u[i]
        new_m = mt if mt > m else m
        if es > 0.0:
            r = exp(m - new_m)
            es *= r
            for k in range(p):
                gs[k] *= r
        for i in range(lo, hi):
            e = exp(u[i] - new_m)
            es += e
            for k in range(p):
                gs[k] += e * du[i, k]
        m = new_m
        hi = lo
    return loglik, grad_arr
