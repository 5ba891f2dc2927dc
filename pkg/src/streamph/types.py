"""Shared vocabulary: edges, simplices, intervals and the global simplex order."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple


class StreamPHError(Exception):
    """Base class for all errors raised by streamph."""


class InputError(StreamPHError, ValueError):
    """Malformed user input (points, matrices, flags)."""


class ContractError(StreamPHError, RuntimeError):
    """An internal ordering or uniqueness contract was violated."""


class Edge(NamedTuple):
    source: int
    target: int
    length: float


class Simplex(NamedTuple):
    """A simplex of the Rips filtration: sorted vertex tuple plus its entry value."""

    vertices: tuple[int, ...]
    filtration: float

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


def simplex_key(s: Simplex) -> tuple:
    return (s.filtration, len(s.vertices), s.vertices)


def simplex_order(a: Simplex, b: Simplex) -> int:
    """Three-way comparison by (filtration, dimension, lexicographic vertices)."""
    ka, kb = simplex_key(a), simplex_key(b)
    return (ka > kb) - (ka < kb)


INF = math.inf


@dataclass(frozen=True)
class Interval:
    dim: int
    birth: float
    death: float = INF
    # cycle as a tuple of simplices; only filled when representatives are requested
    representative: tuple[tuple[int, ...], ...] | None = field(default=None, compare=False, repr=False)

    @property
    def is_open(self) -> bool:
        return self.death == INF

    @property
    def length(self) -> float:
        return self.death - self.birth

    def as_tuple(self) -> tuple[int, float, float]:
        return (self.dim, self.birth, self.death)
