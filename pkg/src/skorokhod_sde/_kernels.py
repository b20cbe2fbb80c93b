"""Hot numeric kernels, numba-accelerated when available.

Set ``SKOROKHOD_SDE_NO_NUMBA=1`` to force the pure-numpy/python fallbacks
(used by ``benchmarks/bench_kernels.py`` to compare both paths).
"""
from __future__ import annotations

import os

import numpy as np


def _want_numba() -> bool:
    flag = os.environ.get("SKOROKHOD_SDE_NO_NUMBA", "0").strip().lower()
    return flag not in {"1", "true", "yes"}


# ---------------------------------------------------------------------------
# pure fallbacks


def _reflect_scan_py(w, lo):
    # Sequential scan: maintains the running minimum of w and emits the
    # reflected point and local-time value one sample at a time.
    n = w.shape[0]
    xi = np.empty(n)
    phi = np.empty(n)
    running_min = w[0]
    for k in range(n):
        if w[k] < running_min:
            running_min = w[k]
        push = lo - running_min
        if push < 0.0:
            push = 0.0
        phi[k] = push
        xi[k] = w[k] + push
    return xi, phi


def _minimal_push_scan_py(w, lo):
    # Independent greedy construction of the minimal nondecreasing push:
    # phi_k is the smallest value >= phi_{k-1} with w_k + phi_k >= lo.
    n = w.shape[0]
    phi = np.empty(n)
    prev = 0.0
    for k in range(n):
        need = lo - w[k]
        cur = prev if prev > need else need
        if cur < 0.0:
            cur = 0.0
        phi[k] = cur
        prev = cur
    return phi


def _holder_max_numba_src(values, times, alpha):
    n = values.shape[0]
    d = values.shape[1]
    best = 0.0
    for i in range(n - 1):
        for j in range(i + 1, n):
            num = 0.0
            for c in range(d):
                num += abs(values[j, c] - values[i, c])
            ratio = num / (times[j] - times[i]) ** alpha
            if ratio > best:
                best = ratio
    return best


def _holder_max_np(values, times, alpha):
    # Row-at-a-time to keep memory linear in the path length.
    n = values.shape[0]
    best = 0.0
    for i in range(n - 1):
        num = np.abs(values[i + 1 :] - values[i]).sum(axis=1)
        ratio = num / (times[i + 1 :] - times[i]) ** alpha
        m = float(ratio.max())
        if m > best:
            best = m
    return best


# ---------------------------------------------------------------------------
# kernel selection

NUMBA_ENABLED = _want_numba()

if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a hard dep, but be safe
        NUMBA_ENABLED = False

if NUMBA_ENABLED:
    reflect_scan_1d = njit(cache=True)(_reflect_scan_py)
    minimal_push_scan = njit(cache=True)(_minimal_push_scan_py)
    holder_pair_max = njit(cache=True)(_holder_max_numba_src)
else:
    reflect_scan_1d = _reflect_scan_py
    minimal_push_scan = _minimal_push_scan_py
    holder_pair_max = _holder_max_np
