"""Incremental Z/2 persistence over a stream of simplices.

Marked simplices are the ones whose insertion created a class. Each marked
simplex owns a cascade: ``{i}`` while its class is alive, and after the class
dies, the reduced boundary of the killing simplex (a cycle whose youngest
term is the marked simplex). Reduction of a new boundary repeatedly cancels
its youngest term against that term's cascade until the youngest term is a
live marked simplex, or the chain vanishes.

By default unmarked terms are stripped from boundaries before reduction,
which leaves the pairing unchanged. With ``representatives=True`` full
boundaries are reduced instead, so each stored cascade is a genuine cycle.

Closed intervals are handed back to the caller and never kept here.
"""
from __future__ import annotations

from array import array
from itertools import combinations
from statistics import mean

from .types import INF, ContractError, Interval, Simplex


class StreamOrderError(ContractError):
    """A simplex arrived before one of its faces, twice, or out of filtration order."""


class PersistenceState:
    def __init__(self, max_dim: int | None = None, representatives: bool = False):
        self.max_dim = max_dim
        self.representatives = representatives
        self.vertices: list[tuple[int, ...]] = []
        self.filtration = array("d")
        self.marked = bytearray()
        self.index_of: dict[tuple[int, ...], int] = {}
        self.cascades: dict[int, frozenset[int]] = {}
        self.pairings: dict[int, int] = {}
        self.closed_count = 0
        self.n_reductions = 0

    def __len__(self) -> int:
        return len(self.vertices)

    def boundary(self, s: Simplex) -> set[int]:
        if len(s.vertices) == 1:
            return set()
        out = set()
        for facet in combinations(s.vertices, len(s.vertices) - 1):
            i = self.index_of.get(facet)
            if i is None:
                raise StreamOrderError(f"facet {facet} of {s.vertices} has not been consumed")
            out.add(i)
        return out

    def add_simplex(self, s: Simplex) -> Interval | None:
        """Consume ``s``; return the interval it closes, if any."""
        if s.vertices in self.index_of:
            raise StreamOrderError(f"simplex {s.vertices} consumed twice")
        if self.filtration and s.filtration < self.filtration[-1]:
            raise StreamOrderError(
                f"simplex {s.vertices} at {s.filtration} arrives after filtration {self.filtration[-1]}"
            )
        d = self.boundary(s)
        if not self.representatives:
            d = {i for i in d if self.marked[i]}
        cascades, pairings = self.cascades, self.pairings
        while d:
            tau = max(d)
            if tau not in pairings:
                break
            d ^= cascades[tau]
            self.n_reductions += 1

        idx = len(self.vertices)
        self.vertices.append(s.vertices)
        self.filtration.append(s.filtration)
        self.index_of[s.vertices] = idx
        if not d:
            self.marked.append(1)
            cascades[idx] = frozenset((idx,))
            return None
        self.marked.append(0)
        pairings[tau] = idx
        cascades[tau] = frozenset(d)
        self.closed_count += 1
        rep = None
        if self.representatives:
            rep = tuple(self.vertices[i] for i in sorted(d))
        return Interval(len(self.vertices[tau]) - 1, self.filtration[tau], s.filtration, rep)

    def _reported(self, dim: int) -> bool:
        return self.max_dim is None or dim < self.max_dim

    def open_intervals(self) -> list[Interval]:
        out = []
        for i, c in self.cascades.items():
            if i not in self.pairings:
                dim = len(self.vertices[i]) - 1
                if self._reported(dim):
                    out.append(Interval(dim, self.filtration[i], INF))
        out.sort(key=lambda iv: (iv.dim, iv.birth))
        return out

    def betti_numbers(self) -> list[int]:
        top = self.max_dim if self.max_dim is not None else max(
            (len(v) for v in self.vertices), default=1)
        betti = [0] * top
        for iv in self.open_intervals():
            if iv.dim < top:
                betti[iv.dim] += 1
        return betti

    def simplex_counts(self) -> list[int]:
        counts: list[int] = []
        for v in self.vertices:
            while len(counts) < len(v):
                counts.append(0)
            counts[len(v) - 1] += 1
        return counts

    def cascade_stats(self) -> dict[str, float]:
        sizes = [len(self.cascades[i]) for i in self.pairings]
        if not sizes:
            return {"paired": 0, "mean": 0.0, "max": 0}
        return {"paired": len(sizes), "mean": mean(sizes), "max": max(sizes)}
