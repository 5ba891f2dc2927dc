"""Incremental maintenance of maximal cliques under edge insertion.

Each inserted edge (s, t) produces candidate cliques ``(ls & lt) | {s, t}`` from
pairs of maximal cliques around s and t. Only maximal intersections survive, old
cliques swallowed by a candidate are dropped, and the new simplices are the
subsets of each maximal intersection joined with the edge.
"""
from __future__ import annotations

from collections import Counter
from itertools import combinations
from typing import Iterable

from .types import ContractError, Edge, InputError, Simplex, simplex_key

Clique = frozenset


def maximal_filter(cliques: Iterable[frozenset]) -> list[frozenset]:
    """Drop duplicates and every set strictly contained in another one."""
    uniq = sorted(set(cliques), key=len, reverse=True)
    kept: list[frozenset] = []
    for c in uniq:
        # a superset is at least as long, so it is already in ``kept``
        if not any(c < k for k in kept):
            kept.append(c)
    return kept


class CliqueRegistry:
    """Maximal cliques of the graph built so far, indexed by vertex.

    ``max_dim`` caps emitted simplices; stored cliques are always the true
    maximal cliques of the graph. ``listing_threshold=True`` swaps in the
    ``1 < min |cl - ncl|`` retention test from the original pseudocode, which
    is wrong and exists only so the self-check can prove it catches it.
    """

    def __init__(self, n: int, max_dim: int, listing_threshold: bool = False):
        if n < 1:
            raise InputError("registry needs at least one vertex")
        if max_dim < 1:
            raise InputError("max_dim must be >= 1")
        self.n = n
        self.max_dim = max_dim
        self.listing_threshold = listing_threshold
        self.cliques: set[frozenset] = set()
        self.by_vertex: list[set[frozenset]] = [set() for _ in range(n)]
        for v in range(n):
            self._add(frozenset((v,)))

    def _add(self, c: frozenset) -> None:
        self.cliques.add(c)
        for v in c:
            self.by_vertex[v].add(c)

    def _remove(self, c: frozenset) -> None:
        self.cliques.discard(c)
        for v in c:
            self.by_vertex[v].discard(c)

    def __len__(self) -> int:
        return len(self.cliques)

    def cliques_containing(self, v: int) -> set[frozenset]:
        if not 0 <= v < self.n:
            raise InputError(f"vertex {v} out of range [0, {self.n})")
        return set(self.by_vertex[v])

    def has_edge(self, s: int, t: int) -> bool:
        small, other = (s, t) if len(self.by_vertex[s]) <= len(self.by_vertex[t]) else (t, s)
        return any(other in c for c in self.by_vertex[small])

    def vertex_simplices(self) -> list[Simplex]:
        return [Simplex((v,), 0.0) for v in range(self.n)]

    def process_edge(self, edge: Edge) -> list[Simplex]:
        """Insert ``edge`` and return the simplices it creates, in simplex order."""
        s, t, length = edge
        if s == t:
            raise InputError(f"self-loop on vertex {s}")
        if not (0 <= s < self.n and 0 <= t < self.n):
            raise InputError(f"edge ({s}, {t}) out of range")
        if self.has_edge(s, t):
            raise ContractError(f"edge ({s}, {t}) inserted twice")

        around_s = list(self.by_vertex[s])
        around_t = list(self.by_vertex[t])
        intersections = maximal_filter(ls & lt for ls in around_s for lt in around_t)
        st = frozenset((s, t))
        new_cliques = [i | st for i in intersections]

        if self.listing_threshold:
            doomed = [c for c in self.cliques if not 1 < min(len(c - nc) for nc in new_cliques)]
        else:
            # only cliques through s or t can sit inside a candidate
            doomed = {c for c in around_s + around_t if any(c <= nc for nc in new_cliques)}
        for c in doomed:
            self._remove(c)
        for c in new_cliques:
            self._add(c)

        cap = self.max_dim - 1
        seen: set[tuple[int, ...]] = set()
        for inter in intersections:
            base = sorted(inter)
            for k in range(min(cap, len(base)) + 1):
                for sub in combinations(base, k):
                    seen.add(tuple(sorted(sub + (s, t))))
        out = [Simplex(v, length) for v in seen]
        out.sort(key=simplex_key)
        return out

    def size_histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(len(c) for c in self.cliques).items()))

    def sorted_cliques(self) -> list[tuple[int, ...]]:
        return sorted(tuple(sorted(c)) for c in self.cliques)

    @classmethod
    def from_cliques(cls, n: int, max_dim: int, cliques: Iterable[Iterable[int]]) -> "CliqueRegistry":
        reg = cls.__new__(cls)
        reg.n, reg.max_dim, reg.listing_threshold = n, max_dim, False
        reg.cliques = set()
        reg.by_vertex = [set() for _ in range(n)]
        for c in cliques:
            reg._add(frozenset(c))
        return reg


def stream_simplices(edges: Iterable[Edge], n: int, max_dim: int):
    """Yield the vertex simplices, then each edge's batch, one simplex at a time."""
    reg = CliqueRegistry(n, max_dim)
    yield from reg.vertex_simplices()
    for e in edges:
        yield from reg.process_edge(e)
