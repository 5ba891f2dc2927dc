"""On-disk neighbourhood graph: generation, external sort and streaming cursor.

Edge file layout (little-endian)::

    header  : b"SPHE" | uint16 version | uint16 reserved | uint64 record_count
    records : float64 length | uint32 source | uint32 target   (16 bytes each)

Sorted files order records ascending by (length, source, target).
"""
from __future__ import annotations

import hashlib
import math
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .types import Edge, InputError, StreamPHError

MAGIC = b"SPHE"
VERSION = 1
HEADER = struct.Struct("<4sHHQ")
HEADER_SIZE = HEADER.size
RECORD = np.dtype([("length", "<f8"), ("source", "<u4"), ("target", "<u4")])
RECORD_SIZE = RECORD.itemsize
_RECORD_STRUCT = struct.Struct("<dII")

# smallest accepted sort budget: 64 records per in-memory run
MIN_MEMORY_BUDGET = 64 * RECORD_SIZE

METRICS = ("euclidean", "manhattan", "matrix")

# target number of candidate pairs evaluated per kernel call
_PAIRS_PER_BLOCK = 1 << 20


class EdgeFileError(StreamPHError, OSError):
    """Edge file is malformed (bad magic, version, or size)."""


class StreamCorruptionError(EdgeFileError):
    """A record was cut short while streaming."""


@dataclass
class EdgeFile:
    path: Path
    record_count: int
    max_epsilon: float = math.inf

    @classmethod
    def open(cls, path) -> "EdgeFile":
        path = Path(path)
        with open(path, "rb") as f:
            raw = f.read(HEADER_SIZE)
            size = os.fstat(f.fileno()).st_size
        if len(raw) < HEADER_SIZE:
            raise EdgeFileError(f"{path}: truncated edge file header")
        magic, version, _, count = HEADER.unpack(raw)
        if magic != MAGIC:
            raise EdgeFileError(f"{path}: not an edge file (magic {magic!r})")
        if version != VERSION:
            raise EdgeFileError(f"{path}: unsupported edge file version {version}")
        body = size - HEADER_SIZE
        if body % RECORD_SIZE:
            raise EdgeFileError(f"{path}: body of {body} bytes is not a multiple of {RECORD_SIZE}")
        if body // RECORD_SIZE != count:
            raise EdgeFileError(f"{path}: header declares {count} records, body holds {body // RECORD_SIZE}")
        return cls(path, count)

    def read_all(self) -> np.ndarray:
        return np.fromfile(self.path, dtype=RECORD, offset=HEADER_SIZE, count=self.record_count)

    def cursor(self, offset: int = HEADER_SIZE) -> "EdgeCursor":
        return EdgeCursor(self, offset)

    def fingerprint(self) -> bytes:
        """Digest of header plus the leading and trailing MiB of records."""
        h = hashlib.sha256()
        window = 1 << 20
        with open(self.path, "rb") as f:
            h.update(f.read(HEADER_SIZE + window))
            size = os.fstat(f.fileno()).st_size
            tail = max(HEADER_SIZE + window, size - window)
            f.seek(tail)
            h.update(f.read())
        h.update(struct.pack("<Q", self.record_count))
        return h.digest()


def _write_header(f, count: int) -> None:
    f.write(HEADER.pack(MAGIC, VERSION, 0, count))


def write_edges(records: np.ndarray, out) -> EdgeFile:
    """Write a record array verbatim (no sorting) as an edge file."""
    records = np.ascontiguousarray(records, dtype=RECORD)
    out = Path(out)
    with open(out, "wb") as f:
        _write_header(f, len(records))
        f.write(records.tobytes())
    return EdgeFile(out, len(records))


def as_records(edges) -> np.ndarray:
    """Pack an iterable of (source, target, length) triples into RECORD layout."""
    edges = list(edges)
    arr = np.zeros(len(edges), dtype=RECORD)
    for i, (s, t, length) in enumerate(edges):
        arr[i] = (length, s, t)
    return arr


# -- input parsing ---------------------------------------------------------

def _numeric_rows(path, header: bool):
    rows = []
    skip = header
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if skip:
                skip = False
                continue
            fields = line.replace(",", " ").split()
            try:
                rows.append((lineno, [float(x) for x in fields]))
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from None
    return rows


def read_points(path, header: bool = False) -> np.ndarray:
    """Read one point per row from CSV or whitespace separated text."""
    rows = _numeric_rows(path, header)
    if not rows:
        raise InputError(f"{path}: no points")
    d = len(rows[0][1])
    for row, (lineno, vals) in enumerate(rows):
        if len(vals) != d:
            raise InputError(f"{path}:{lineno}: point {row} has {len(vals)} coordinates, expected {d}")
    pts = np.array([vals for _, vals in rows], dtype=np.float64)
    check_points(pts)
    return pts


def read_distance_matrix(path) -> np.ndarray:
    """Read a lower-triangular (diagonal included) or full square distance matrix.

    Row ``i`` of the triangular form lists d(i, 0), ..., d(i, i).
    """
    rows = _numeric_rows(path, False)
    if not rows:
        raise InputError(f"{path}: empty distance matrix")
    n = len(rows)
    lengths = [len(v) for _, v in rows]
    mat = np.zeros((n, n))
    if all(k == n for k in lengths):
        mat[:] = [v for _, v in rows]
        if not np.array_equal(mat, mat.T):
            raise InputError(f"{path}: square distance matrix is not symmetric")
    elif lengths == list(range(1, n + 1)):
        for i, (_, vals) in enumerate(rows):
            mat[i, : i + 1] = vals
        mat = np.tril(mat) + np.tril(mat, -1).T
    else:
        raise InputError(f"{path}: rows must be lower-triangular (lengths 1..n) or all of length n")
    if np.isnan(mat).any():
        i = int(np.nonzero(np.isnan(mat).any(axis=1))[0][0])
        raise InputError(f"{path}: NaN in distance matrix row {i}")
    if (mat < 0).any():
        raise InputError(f"{path}: negative distance")
    return mat


def check_points(points: np.ndarray) -> None:
    if points.ndim != 2 or points.shape[0] < 1:
        raise InputError("point cloud must be a non-empty n x d array")
    bad = np.isnan(points).any(axis=1)
    if bad.any():
        raise InputError(f"NaN coordinate in row {int(np.nonzero(bad)[0][0])}")


# -- generation --------------------------------------------------------------

def _matrix_blocks(mat: np.ndarray, max_epsilon: float):
    n = mat.shape[0]
    for i in range(n - 1):
        row = mat[i, i + 1:]
        keep = np.nonzero(row <= max_epsilon)[0]
        yield (np.full(keep.size, i, np.uint32), (keep + i + 1).astype(np.uint32), row[keep])


def _point_blocks(points: np.ndarray, metric: int, max_epsilon: float):
    n = points.shape[0]
    i = 0
    while i < n - 1:
        # grow the row block until it covers roughly _PAIRS_PER_BLOCK pairs
        j, pairs = i, 0
        while j < n - 1 and pairs < _PAIRS_PER_BLOCK:
            pairs += n - j - 1
            j += 1
        yield _kernels.pair_block(points, i, j, max_epsilon, metric)
        i = j


def compute_edges(points, metric: str, max_epsilon: float, out) -> EdgeFile:
    """Write every pair within ``max_epsilon`` to ``out`` in generation order."""
    if metric not in METRICS:
        raise InputError(f"unknown metric {metric!r}")
    if not max_epsilon >= 0:
        raise InputError("max_epsilon must be >= 0")
    points = np.ascontiguousarray(points, dtype=np.float64)
    if metric == "matrix":
        if points.ndim != 2 or points.shape[0] != points.shape[1]:
            raise InputError("matrix metric needs a square distance matrix")
        if np.isnan(points).any():
            raise InputError("NaN in distance matrix")
        blocks = _matrix_blocks(points, max_epsilon)
    else:
        check_points(points)
        code = _kernels.EUCLIDEAN if metric == "euclidean" else _kernels.MANHATTAN
        blocks = _point_blocks(points, code, float(max_epsilon))

    out = Path(out)
    count = 0
    with open(out, "wb") as f:
        _write_header(f, 0)
        for src, tgt, dist in blocks:
            rec = np.empty(len(src), dtype=RECORD)
            rec["length"], rec["source"], rec["target"] = dist, src, tgt
            f.write(rec.tobytes())
            count += len(rec)
        f.seek(0)
        _write_header(f, count)
    return EdgeFile(out, count, float(max_epsilon))


# -- external sort -------------------------------------------------------------

def _sort_records(rec: np.ndarray) -> np.ndarray:
    return rec[np.lexsort((rec["target"], rec["source"], rec["length"]))]


def _at_most(buf: np.ndarray, key) -> int:
    """Length of the prefix of sorted ``buf`` whose records are <= key."""
    length, source, target = key
    L, S, T = buf["length"], buf["source"], buf["target"]
    mask = (L < length) | ((L == length) & ((S < source) | ((S == source) & (T <= target))))
    return int(mask.sum())


class _Run:
    def __init__(self, path: str, count: int, chunk: int):
        self.f = open(path, "rb")
        self.left = count
        self.chunk = chunk
        self.buf = np.empty(0, dtype=RECORD)
        self.refill()

    def refill(self):
        k = min(self.chunk, self.left)
        if k:
            self.buf = np.frombuffer(self.f.read(k * RECORD_SIZE), dtype=RECORD)
            self.left -= k
        else:
            self.buf = np.empty(0, dtype=RECORD)

    @property
    def exhausted(self) -> bool:
        return self.left == 0

    def close(self):
        self.f.close()


def external_sort_edges(src: EdgeFile, out, memory_budget: int, tmpdir=None) -> EdgeFile:
    """Sort ``src`` into ``out`` using sorted runs of at most ``memory_budget`` bytes.

    The k-way merge holds one buffer per run, each ``memory_budget // (k + 1)``
    bytes (never less than 64 records). Output bytes do not depend on the budget.
    """
    if memory_budget < MIN_MEMORY_BUDGET:
        raise InputError(f"memory budget must be at least {MIN_MEMORY_BUDGET} bytes")
    src = EdgeFile.open(src.path)
    out = Path(out)
    run_records = memory_budget // RECORD_SIZE
    tmpdir = tmpdir or out.parent
    fd, tmp_out = tempfile.mkstemp(prefix=out.name + ".", suffix=".tmp", dir=tmpdir)
    os.close(fd)
    runs: list[tuple[str, int]] = []
    try:
        with open(src.path, "rb") as f:
            f.seek(HEADER_SIZE)
            left = src.record_count
            while left:
                k = min(run_records, left)
                raw = f.read(k * RECORD_SIZE)
                if len(raw) != k * RECORD_SIZE:
                    raise StreamCorruptionError(f"{src.path}: short read while sorting")
                rec = _sort_records(np.frombuffer(raw, dtype=RECORD))
                rfd, rpath = tempfile.mkstemp(prefix="run.", dir=tmpdir)
                with os.fdopen(rfd, "wb") as rf:
                    rf.write(rec.tobytes())
                runs.append((rpath, k))
                left -= k

        with open(tmp_out, "wb") as w:
            _write_header(w, src.record_count)
            if len(runs) == 1:
                with open(runs[0][0], "rb") as rf:
                    w.write(rf.read())
            elif runs:
                chunk = max(64, memory_budget // (RECORD_SIZE * (len(runs) + 1)))
                _merge(runs, chunk, w)
        os.replace(tmp_out, out)
    finally:
        for rpath, _ in runs:
            os.unlink(rpath)
        if os.path.exists(tmp_out):
            os.unlink(tmp_out)
    return EdgeFile(out, src.record_count, src.max_epsilon)


def _merge(runs, chunk: int, w) -> None:
    readers = [_Run(p, c, chunk) for p, c in runs]
    try:
        while True:
            live = [r for r in readers if len(r.buf)]
            if not live:
                break
            # records up to the smallest last key of a run with data still on
            # disk are safe to emit: nothing later can undercut them
            pending = [r for r in live if not r.exhausted]
            if pending:
                key = min(tuple(r.buf[-1].tolist()) for r in pending)
                cuts = [_at_most(r.buf, key) for r in live]
            else:
                cuts = [len(r.buf) for r in live]
            merged = np.concatenate([r.buf[:c] for r, c in zip(live, cuts)])
            w.write(_sort_records(merged).tobytes())
            for r, c in zip(live, cuts):
                r.buf = r.buf[c:]
                if not len(r.buf):
                    r.refill()
    finally:
        for r in readers:
            r.close()


# -- streaming -------------------------------------------------------------------

class EdgeCursor:
    """Single-owner sequential reader over an edge file.

    ``offset`` is the byte position of the next unread record and can be stored
    in a checkpoint and passed back in to resume.
    """

    def __init__(self, edge_file: EdgeFile, offset: int = HEADER_SIZE):
        end = HEADER_SIZE + edge_file.record_count * RECORD_SIZE
        if offset < HEADER_SIZE or offset > end or (offset - HEADER_SIZE) % RECORD_SIZE:
            raise EdgeFileError(f"invalid cursor offset {offset}")
        self.edge_file = edge_file
        self._end = end
        self._f = open(edge_file.path, "rb")
        self._f.seek(offset)
        self.offset = offset

    def next_edge(self) -> Edge | None:
        if self.offset >= self._end:
            return None
        raw = self._f.read(RECORD_SIZE)
        if len(raw) != RECORD_SIZE:
            raise StreamCorruptionError(f"{self.edge_file.path}: truncated record at offset {self.offset}")
        length, s, t = _RECORD_STRUCT.unpack(raw)
        self.offset += RECORD_SIZE
        return Edge(s, t, length)

    def peek_length(self) -> float | None:
        """Length of the next edge without consuming it."""
        if self.offset >= self._end:
            return None
        raw = self._f.read(RECORD_SIZE)
        self._f.seek(self.offset)
        if len(raw) != RECORD_SIZE:
            raise StreamCorruptionError(f"{self.edge_file.path}: truncated record at offset {self.offset}")
        return _RECORD_STRUCT.unpack(raw)[0]

    def __iter__(self):
        while (e := self.next_edge()) is not None:
            yield e

    def close(self):
        self._f.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def next_edge(cursor: EdgeCursor) -> Edge | None:
    return cursor.next_edge()


def sorted_edges(points, metric: str = "euclidean", max_epsilon: float = math.inf) -> list[Edge]:
    """In-memory equivalent of compute_edges + external_sort_edges, for small inputs."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    if metric == "matrix":
        blocks = list(_matrix_blocks(points, max_epsilon))
    else:
        code = _kernels.EUCLIDEAN if metric == "euclidean" else _kernels.MANHATTAN
        blocks = list(_point_blocks(points, code, float(max_epsilon)))
    parts = []
    for src, tgt, dist in blocks:
        rec = np.empty(len(src), dtype=RECORD)
        rec["length"], rec["source"], rec["target"] = dist, src, tgt
        parts.append(rec)
    if not parts:
        return []
    rec = _sort_records(np.concatenate(parts))
    return [Edge(int(s), int(t), float(x)) for x, s, t in rec.tolist()]
