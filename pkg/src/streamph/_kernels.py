"""Pairwise distance kernels.

Two interchangeable backends produce bit-identical output: a numba ``@njit``
kernel and a pure numpy fallback. The numba path is used when numba imports
and ``STREAMPH_DISABLE_NUMBA`` is unset (or ``0``).

Both backends accumulate coordinates strictly left to right so results match
the scalar reference in :mod:`streamph.oracle` to the last bit.
"""
from __future__ import annotations

import os

import numpy as np

EUCLIDEAN = 0
MANHATTAN = 1

_disabled = os.environ.get("STREAMPH_DISABLE_NUMBA", "0") not in ("", "0", "false", "False")

try:
    if _disabled:
        raise ImportError("numba disabled by STREAMPH_DISABLE_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


def pair_block_numpy(points, i0, i1, max_eps, metric):
    """Return (source, target, length) for rows i0..i1 against every later row."""
    n, d = points.shape
    srcs, tgts, dists = [], [], []
    for i in range(i0, i1):
        if i + 1 >= n:
            break
        diff = points[i + 1:] - points[i]
        acc = np.zeros(n - i - 1)
        if metric == EUCLIDEAN:
            for k in range(d):
                acc += diff[:, k] * diff[:, k]
            acc = np.sqrt(acc)
        else:
            for k in range(d):
                acc += np.abs(diff[:, k])
        keep = np.nonzero(acc <= max_eps)[0]
        srcs.append(np.full(keep.size, i, dtype=np.uint32))
        tgts.append((keep + i + 1).astype(np.uint32))
        dists.append(acc[keep])
    if not srcs:
        return (np.empty(0, np.uint32), np.empty(0, np.uint32), np.empty(0, np.float64))
    return np.concatenate(srcs), np.concatenate(tgts), np.concatenate(dists)


if HAS_NUMBA:

    @njit(cache=True)
    def _pair_block_jit(points, i0, i1, max_eps, metric):
        n, d = points.shape
        cap = 0
        for i in range(i0, i1):
            cap += n - i - 1
        src = np.empty(cap, np.uint32)
        tgt = np.empty(cap, np.uint32)
        dist = np.empty(cap, np.float64)
        m = 0
        for i in range(i0, i1):
            for j in range(i + 1, n):
                acc = 0.0
                if metric == 0:
                    for k in range(d):
                        t = points[j, k] - points[i, k]
                        acc += t * t
                    acc = np.sqrt(acc)
                else:
                    for k in range(d):
                        acc += abs(points[j, k] - points[i, k])
                if acc <= max_eps:
                    src[m] = i
                    tgt[m] = j
                    dist[m] = acc
                    m += 1
        return src[:m], tgt[:m], dist[:m]

    def pair_block_numba(points, i0, i1, max_eps, metric):
        return _pair_block_jit(points, i0, i1, float(max_eps), metric)

    pair_block = pair_block_numba
else:
    pair_block_numba = None
    pair_block = pair_block_numpy
