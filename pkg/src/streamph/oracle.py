"""Brute-force reference implementations for testing and ``selfcheck``.

Nothing here touches the clique registry, the persistence state or the
distance kernels.
"""
from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from .types import INF, ContractError, Interval, Simplex, simplex_key


def bron_kerbosch(adj) -> set[frozenset]:
    """All maximal cliques of a graph given by a boolean adjacency matrix."""
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    nbrs = [set(np.nonzero(adj[v])[0].tolist()) - {v} for v in range(n)]
    out: set[frozenset] = set()

    def expand(r, p, x):
        if not p and not x:
            out.add(frozenset(r))
            return
        pivot = max(p | x, key=lambda u: len(p & nbrs[u]))
        for v in list(p - nbrs[pivot]):
            expand(r | {v}, p & nbrs[v], x & nbrs[v])
            p = p - {v}
            x = x | {v}

    expand(set(), set(range(n)), set())
    return out


def scalar_distance(a, b, metric: str = "euclidean") -> float:
    acc = 0.0
    for x, y in zip(a, b):
        t = float(y) - float(x)
        acc += t * t if metric == "euclidean" else abs(t)
    return math.sqrt(acc) if metric == "euclidean" else acc


def distance_matrix(points, metric: str = "euclidean") -> np.ndarray:
    if metric == "matrix":
        return np.asarray(points, dtype=np.float64)
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    mat = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            mat[i, j] = mat[j, i] = scalar_distance(pts[i], pts[j], metric)
    return mat


def rips_batch(points, epsilon: float, max_dim: int, metric: str = "euclidean") -> list[Simplex]:
    """Every clique of the epsilon graph with at most max_dim + 1 vertices."""
    dist = distance_matrix(points, metric)
    n = len(dist)
    adj = dist <= epsilon
    out = [Simplex((v,), 0.0) for v in range(n)]
    layer = [(v,) for v in range(n)]
    for _ in range(max_dim):
        nxt = []
        for c in layer:
            for w in range(c[-1] + 1, n):
                if all(adj[u, w] for u in c):
                    nxt.append(c + (w,))
        for c in nxt:
            out.append(Simplex(c, max(dist[u, v] for u, v in combinations(c, 2))))
        layer = nxt
    out.sort(key=simplex_key)
    return out


def barcode_bruteforce(stream, max_dim: int | None = None) -> list[Interval]:
    """Textbook boundary-matrix reduction over Z/2, columns stored as int bitsets."""
    index = {}
    cols = []
    for j, s in enumerate(stream):
        col = 0
        if len(s.vertices) > 1:
            for facet in combinations(s.vertices, len(s.vertices) - 1):
                if facet not in index:
                    raise ContractError(f"facet {facet} missing before {s.vertices}")
                col |= 1 << index[facet]
        index[s.vertices] = j
        cols.append(col)

    low_owner = {}
    pivots = set()
    for j in range(len(cols)):
        col = cols[j]
        while col:
            low = col.bit_length() - 1
            if low not in low_owner:
                break
            col ^= cols[low_owner[low]]
        cols[j] = col
        if col:
            low = col.bit_length() - 1
            low_owner[low] = j
            pivots.add(low)

    out = []
    for low, j in low_owner.items():
        out.append(Interval(len(stream[low].vertices) - 1, stream[low].filtration, stream[j].filtration))
    for j, col in enumerate(cols):
        if col == 0 and j not in pivots:
            out.append(Interval(len(stream[j].vertices) - 1, stream[j].filtration, INF))
    if max_dim is not None:
        out = [iv for iv in out if iv.dim < max_dim]
    return sorted(out, key=Interval.as_tuple)
