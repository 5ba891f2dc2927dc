"""Randomized oracle-equivalence suites shared by the CLI ``selfcheck`` command."""
from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .cliques import CliqueRegistry, stream_simplices
from .edges import sorted_edges
from .oracle import barcode_bruteforce, bron_kerbosch, rips_batch
from .persistence import PersistenceState
from .types import Edge, Interval


@dataclass
class Failure:
    suite: str
    trial: int
    detail: str

    def __str__(self) -> str:
        return f"[{self.suite}] trial {self.trial}: {self.detail}"


def random_points(rng: random.Random, n: int, d: int) -> np.ndarray:
    return np.array([[rng.random() for _ in range(d)] for _ in range(n)])


def clique_trial(rng: random.Random, trial: int, max_n: int = 12, listing_threshold: bool = False):
    n = rng.randint(2, max_n)
    density = rng.random()
    pairs = [p for p in combinations(range(n), 2) if rng.random() < density]
    rng.shuffle(pairs)
    reg = CliqueRegistry(n, max_dim=n, listing_threshold=listing_threshold)
    adj = np.zeros((n, n), dtype=bool)
    for step, (s, t) in enumerate(pairs):
        reg.process_edge(Edge(s, t, float(step)))
        adj[s, t] = adj[t, s] = True
        want = bron_kerbosch(adj)
        if reg.cliques != want:
            got = sorted(map(sorted, reg.cliques))
            exp = sorted(map(sorted, want))
            return Failure("clique", trial, f"n={n} edge order={pairs[:step + 1]} "
                                            f"registry={got} bron_kerbosch={exp}")
    return None


def _canon(simplices):
    return sorted((s.vertices, s.filtration) for s in simplices)


def stream_trial(rng: random.Random, trial: int, max_n: int = 20):
    n = rng.randint(2, max_n)
    d = rng.choice((2, 3))
    max_dim = rng.choice((2, 3))
    eps = rng.uniform(0.2, 0.7)
    pts = random_points(rng, n, d)
    got = _canon(stream_simplices(sorted_edges(pts, max_epsilon=eps), n, max_dim))
    want = _canon(rips_batch(pts, eps, max_dim))
    if got != want:
        return Failure("stream", trial, f"eps={eps!r} max_dim={max_dim} points={pts.tolist()}; "
                                        f"streamed {len(got)} simplices, batch {len(want)}")
    return None


def engine_barcode(pts, eps: float, max_dim: int) -> list[Interval]:
    st = PersistenceState(max_dim=max_dim)
    out = []
    for s in stream_simplices(sorted_edges(pts, max_epsilon=eps), len(pts), max_dim):
        iv = st.add_simplex(s)
        if iv is not None:
            out.append(iv)
    out.extend(st.open_intervals())
    return sorted(out, key=Interval.as_tuple)


def barcode_trial(rng: random.Random, trial: int, max_n: int = 25):
    n = rng.randint(2, max_n)
    d = rng.choice((2, 3))
    max_dim = rng.choice((1, 2, 3))
    eps = rng.uniform(0.2, 0.6)
    pts = random_points(rng, n, d)
    got = engine_barcode(pts, eps, max_dim)
    want = barcode_bruteforce(rips_batch(pts, eps, max_dim), max_dim=max_dim)
    if got != want:
        diff = sorted(set(map(Interval.as_tuple, got)) ^ set(map(Interval.as_tuple, want)))
        return Failure("barcode", trial, f"eps={eps!r} max_dim={max_dim} points={pts.tolist()}; "
                                         f"differing intervals {diff[:5]}")
    return None


def run_suites(seed: int, trials: int, listing_threshold: bool = False, echo=print) -> list[Failure]:
    """Run each suite for ``trials`` trials; return the first failure of each suite."""
    failures = []
    suites = [
        ("clique", lambda rng, i: clique_trial(rng, i, listing_threshold=listing_threshold)),
        ("stream", stream_trial),
        ("barcode", barcode_trial),
    ]
    for k, (name, fn) in enumerate(suites):
        rng = random.Random(seed * 1000 + k)
        failure = None
        for i in range(trials):
            failure = fn(rng, i)
            if failure:
                break
        echo(f"{name}: {'FAIL' if failure else 'pass'} ({trials} trials, seed {seed})")
        if failure:
            failures.append(failure)
    return failures
