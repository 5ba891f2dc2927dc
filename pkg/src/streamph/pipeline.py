"""Interleaved driver: edge cursor -> clique registry -> persistence -> spill."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .cliques import CliqueRegistry
from .edges import HEADER_SIZE, EdgeFile
from .persistence import PersistenceState
from .store import Bundle, IntervalWriter, checkpoint_read, checkpoint_write, read_intervals
from .types import INF, Interval

log = logging.getLogger(__name__)


@dataclass
class RunStats:
    edges: int = 0
    simplices: int = 0
    peak_registry: int = 0
    max_batch: int = 0
    peak_live: int = 0
    checkpoints: int = 0
    interrupted: bool = False
    live_trace: list[int] = field(default_factory=list, repr=False)


class Engine:
    """Owns one run's registry, persistence state, cursor and interval writer."""

    def __init__(self, edge_file: EdgeFile, bundle: Bundle, writer: IntervalWriter,
                 reps=None, trace_live: bool = False):
        self.edge_file = edge_file
        self.bundle = bundle
        self.writer = writer
        self.reps = reps
        self.cursor = edge_file.cursor(bundle.offset)
        self.stats = RunStats(peak_registry=len(bundle.registry))
        self.trace_live = trace_live
        # simplices emitted by the registry but not yet consumed by the state
        self.live = 0

    @property
    def registry(self) -> CliqueRegistry:
        return self.bundle.registry

    @property
    def state(self) -> PersistenceState:
        return self.bundle.state

    @classmethod
    def fresh(cls, edge_file: EdgeFile, n: int, max_dim: int, intervals_path,
              representatives: bool = False, trace_live: bool = False) -> "Engine":
        reg = CliqueRegistry(n, max_dim)
        st = PersistenceState(max_dim=max_dim, representatives=representatives)
        bundle = Bundle(edge_file.fingerprint(), HEADER_SIZE, 0, 0.0, reg, st)
        reps = open(f"{intervals_path}.reps", "w") if representatives else None
        eng = cls(edge_file, bundle, IntervalWriter(intervals_path), reps, trace_live)
        eng._consume(reg.vertex_simplices())
        return eng

    @classmethod
    def resume(cls, checkpoint_path, edge_file: EdgeFile, intervals_path,
               trace_live: bool = False) -> "Engine":
        bundle = checkpoint_read(checkpoint_path, edge_file)
        writer = IntervalWriter(intervals_path, resume_count=bundle.closed_count)
        reps = open(f"{intervals_path}.reps", "a") if bundle.state.representatives else None
        return cls(edge_file, bundle, writer, reps, trace_live)

    def _consume(self, batch) -> None:
        st, writer = self.state, self.writer
        self.live += len(batch)
        self.stats.max_batch = max(self.stats.max_batch, len(batch))
        self.stats.peak_live = max(self.stats.peak_live, self.live)
        if self.trace_live:
            self.stats.live_trace.append(self.live)
        for s in batch:
            iv = st.add_simplex(s)
            self.live -= 1
            if iv is not None:
                writer.spill(iv)
                if self.reps is not None:
                    self._write_rep(iv)
        self.stats.simplices += len(batch)

    def _write_rep(self, iv: Interval) -> None:
        cycle = " ".join("-".join(map(str, v)) for v in iv.representative)
        self.reps.write(f"{iv.dim} {iv.birth!r} {iv.death!r}: {cycle}\n")

    def step(self, stop_epsilon: float = INF) -> bool:
        """Process one edge; False once the stream or the stop value is reached."""
        nxt = self.cursor.peek_length()
        if nxt is None or nxt > stop_epsilon:
            return False
        edge = self.cursor.next_edge()
        batch = self.registry.process_edge(edge)
        self._consume(batch)
        del batch
        b = self.bundle
        b.offset = self.cursor.offset
        b.edges_processed += 1
        b.epsilon = edge.length
        self.stats.edges += 1
        self.stats.peak_registry = max(self.stats.peak_registry, len(self.registry))
        return True

    def run(self, stop_epsilon: float = INF, checkpoint=None, checkpoint_every: int = 0,
            should_stop=lambda: False) -> RunStats:
        while self.step(stop_epsilon):
            if checkpoint and checkpoint_every and self.stats.edges % checkpoint_every == 0:
                self.checkpoint(checkpoint)
            if should_stop():
                self.stats.interrupted = True
                break
        if checkpoint:
            self.checkpoint(checkpoint)
        return self.stats

    def checkpoint(self, path) -> dict:
        self.writer.flush()
        if self.reps is not None:
            self.reps.flush()
        self.stats.checkpoints += 1
        return checkpoint_write(self.bundle, path)

    def finalize(self) -> int:
        """Append the open intervals with infinite death and close the files."""
        total = self.writer.finalize(self.state.open_intervals())
        self.cursor.close()
        if self.reps is not None:
            self.reps.close()
        return total

    def close(self) -> None:
        self.writer.close()
        self.cursor.close()
        if self.reps is not None:
            self.reps.close()


def summarize(intervals_path, limit: int = 10) -> dict:
    """Counts per dimension plus the longest bars of each dimension."""
    ivs = read_intervals(intervals_path)
    by_dim: dict[int, list[Interval]] = {}
    for iv in ivs:
        by_dim.setdefault(iv.dim, []).append(iv)
    counts = {d: len(v) for d, v in sorted(by_dim.items())}
    open_counts = {d: sum(iv.is_open for iv in v) for d, v in sorted(by_dim.items())}
    longest = {}
    for d, v in sorted(by_dim.items()):
        bars = [iv for iv in v if iv.death > iv.birth]
        bars.sort(key=lambda iv: (-(iv.death - iv.birth), iv.birth))
        longest[d] = bars[:limit]
    return {"counts": counts, "open": open_counts, "longest": longest, "total": len(ivs)}


def fmt_float(x: float) -> str:
    return "inf" if math.isinf(x) else repr(float(x))

