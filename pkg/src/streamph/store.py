"""Checkpoint files and the append-only interval spill.

Checkpoint layout (little-endian), sections in this order::

    b"SPHC" | uint16 version | uint16 flags (bit 0: representatives)
    32-byte edge file fingerprint
    uint64 cursor offset | uint64 edges processed | uint64 closed_count
    float64 epsilon reached
    uint32 n | uint32 max_dim
    registry:    uint64 c | uint32 sizes[c] | uint32 vertices[sum sizes]
    consumed:    uint64 m | uint8 sizes[m] | uint32 vertices[sum sizes]
                 | float64 filtration[m] | uint8 marked[m]
    cascades:    uint64 k | uint64 owner[k] | int64 killer[k] (-1 if alive)
                 | uint32 sizes[k] | uint64 members[sum sizes]
    32-byte SHA-256 of everything above

Interval file layout::

    b"SPHI" | uint16 version | uint64 record_count
    records: uint8 dim | float64 birth | float64 death
"""
from __future__ import annotations

import hashlib
import io
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cliques import CliqueRegistry
from .edges import EdgeFile
from .persistence import PersistenceState
from .types import Interval, StreamPHError

CHECKPOINT_MAGIC = b"SPHC"
CHECKPOINT_VERSION = 1
INTERVAL_MAGIC = b"SPHI"
INTERVAL_VERSION = 1
INTERVAL_HEADER = struct.Struct("<4sHQ")
INTERVAL_RECORD = struct.Struct("<Bdd")
_INTERVAL_DTYPE = np.dtype([("dim", "u1"), ("birth", "<f8"), ("death", "<f8")])

_HEAD = struct.Struct("<4sHH32sQQQdII")
_DIGEST = 32


class CheckpointError(StreamPHError):
    """Base class for checkpoint read failures."""


class CheckpointVersionError(CheckpointError):
    pass


class FingerprintMismatchError(CheckpointError):
    pass


class CheckpointTruncatedError(CheckpointError):
    pass


class CheckpointCorruptError(CheckpointError):
    pass


class IntervalFileError(StreamPHError):
    pass


@dataclass
class Bundle:
    """Everything needed to continue a run."""

    fingerprint: bytes
    offset: int
    edges_processed: int
    epsilon: float
    registry: CliqueRegistry
    state: PersistenceState

    @property
    def closed_count(self) -> int:
        return self.state.closed_count


def _arr(values, dtype) -> bytes:
    return np.asarray(values, dtype=dtype).tobytes()


def encode_checkpoint(b: Bundle) -> bytes:
    reg, st = b.registry, b.state
    buf = io.BytesIO()
    flags = 1 if st.representatives else 0
    buf.write(_HEAD.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, flags, b.fingerprint, b.offset,
                         b.edges_processed, st.closed_count, b.epsilon, reg.n, reg.max_dim))

    cliques = reg.sorted_cliques()
    buf.write(struct.pack("<Q", len(cliques)))
    buf.write(_arr([len(c) for c in cliques], "<u4"))
    buf.write(_arr([v for c in cliques for v in c], "<u4"))

    buf.write(struct.pack("<Q", len(st.vertices)))
    buf.write(_arr([len(v) for v in st.vertices], "u1"))
    buf.write(_arr([x for v in st.vertices for x in v], "<u4"))
    buf.write(_arr(st.filtration, "<f8"))
    buf.write(bytes(st.marked))

    owners = sorted(st.cascades)
    chains = [sorted(st.cascades[i]) for i in owners]
    buf.write(struct.pack("<Q", len(owners)))
    buf.write(_arr(owners, "<u8"))
    buf.write(_arr([st.pairings.get(i, -1) for i in owners], "<i8"))
    buf.write(_arr([len(c) for c in chains], "<u4"))
    buf.write(_arr([x for c in chains for x in c], "<u8"))

    body = buf.getvalue()
    return body + hashlib.sha256(body).digest()


class _Reader:
    def __init__(self, data: bytes):
        self.data, self.pos = data, 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CheckpointTruncatedError("checkpoint ends before its declared contents")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def count(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def array(self, dtype, n: int) -> np.ndarray:
        dt = np.dtype(dtype)
        return np.frombuffer(self.take(dt.itemsize * n), dtype=dt)


def decode_checkpoint(data: bytes) -> Bundle:
    if len(data) < 6:
        raise CheckpointTruncatedError("checkpoint too short for a header")
    if data[:4] != CHECKPOINT_MAGIC:
        raise CheckpointCorruptError("not a checkpoint file (bad magic)")
    version = struct.unpack("<H", data[4:6])[0]
    if version != CHECKPOINT_VERSION:
        raise CheckpointVersionError(f"checkpoint version {version}, expected {CHECKPOINT_VERSION}")
    if len(data) < _HEAD.size + _DIGEST:
        raise CheckpointTruncatedError("checkpoint too short for a header")
    body, digest = data[:-_DIGEST], data[-_DIGEST:]
    r = _Reader(body)
    _, _, flags, fp, offset, processed, closed, eps, n, max_dim = _HEAD.unpack(r.take(_HEAD.size))
    try:
        sizes = r.array("<u4", r.count())
        flat = r.array("<u4", int(sizes.sum()))
        ends = np.cumsum(sizes)
        cliques = [tuple(flat[e - k:e].tolist()) for k, e in zip(sizes.tolist(), ends.tolist())]

        m = r.count()
        vsizes = r.array("u1", m)
        vflat = r.array("<u4", int(vsizes.sum(dtype=np.int64)))
        filt = r.array("<f8", m)
        marked = r.array("u1", m)

        k = r.count()
        owners = r.array("<u8", k)
        killers = r.array("<i8", k)
        csizes = r.array("<u4", k)
        cflat = r.array("<u8", int(csizes.sum(dtype=np.int64)))
    except CheckpointTruncatedError:
        if hashlib.sha256(body).digest() != digest:
            raise
        raise CheckpointCorruptError("checkpoint sections are inconsistent") from None
    if r.pos != len(body) or hashlib.sha256(body).digest() != digest:
        raise CheckpointCorruptError("checkpoint digest mismatch")

    reg = CliqueRegistry.from_cliques(n, max_dim, cliques)
    st = PersistenceState(max_dim=max_dim, representatives=bool(flags & 1))
    pos = 0
    for size in vsizes.tolist():
        v = tuple(vflat[pos:pos + size].tolist())
        pos += size
        st.index_of[v] = len(st.vertices)
        st.vertices.append(v)
    st.filtration.extend(filt.tolist())
    st.marked = bytearray(marked.tobytes())
    pos = 0
    for owner, killer, size in zip(owners.tolist(), killers.tolist(), csizes.tolist()):
        st.cascades[owner] = frozenset(cflat[pos:pos + size].tolist())
        pos += size
        if killer >= 0:
            st.pairings[owner] = killer
    st.closed_count = closed
    return Bundle(fp, offset, processed, eps, reg, st)


def checkpoint_write(bundle: Bundle, path) -> dict:
    """Atomically write ``bundle`` to ``path`` (temp file, fsync, rename)."""
    path = Path(path)
    data = encode_checkpoint(bundle)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as f:
        f.write(data)
        f.flush()
        os.fsync(f.fileno())
    os.replace(tmp, path)
    return {"path": str(path), "bytes": len(data), "offset": bundle.offset,
            "closed_count": bundle.closed_count}


def checkpoint_read(path, edge_file: EdgeFile | None = None) -> Bundle:
    """Load a checkpoint; when ``edge_file`` is given its fingerprint must match."""
    with open(path, "rb") as f:
        data = f.read()
    bundle = decode_checkpoint(data)
    if edge_file is not None and edge_file.fingerprint() != bundle.fingerprint:
        raise FingerprintMismatchError(f"{edge_file.path} is not the edge file this checkpoint was taken on")
    return bundle


# -- interval spill ----------------------------------------------------------------

class IntervalWriter:
    """Append-only writer; the header count is backfilled on ``finalize``/``flush``."""

    def __init__(self, path, resume_count: int | None = None):
        self.path = Path(path)
        if resume_count is None:
            self._f = open(self.path, "wb")
            self._f.write(INTERVAL_HEADER.pack(INTERVAL_MAGIC, INTERVAL_VERSION, 0))
            self.count = 0
        else:
            # drop anything written after the checkpoint (e.g. finalized open intervals)
            check_interval_header(self.path)
            self._f = open(self.path, "r+b")
            self._f.truncate(INTERVAL_HEADER.size + resume_count * INTERVAL_RECORD.size)
            self._f.seek(0, os.SEEK_END)
            if self._f.tell() != INTERVAL_HEADER.size + resume_count * INTERVAL_RECORD.size:
                raise IntervalFileError(f"{self.path} holds fewer than {resume_count} intervals")
            self.count = resume_count

    def spill(self, iv: Interval) -> None:
        self._f.write(INTERVAL_RECORD.pack(iv.dim, iv.birth, iv.death))
        self.count += 1

    def flush(self) -> None:
        here = self._f.tell()
        self._f.seek(0)
        self._f.write(INTERVAL_HEADER.pack(INTERVAL_MAGIC, INTERVAL_VERSION, self.count))
        self._f.seek(here)
        self._f.flush()

    def finalize(self, open_intervals=()) -> int:
        for iv in open_intervals:
            self.spill(iv)
        self.flush()
        self._f.close()
        return self.count

    def close(self) -> None:
        if not self._f.closed:
            self.flush()
            self._f.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def spill_interval(writer: IntervalWriter, iv: Interval) -> None:
    writer.spill(iv)


def check_interval_header(path) -> int:
    with open(path, "rb") as f:
        raw = f.read(INTERVAL_HEADER.size)
    if len(raw) < INTERVAL_HEADER.size:
        raise IntervalFileError(f"{path}: truncated interval header")
    magic, version, count = INTERVAL_HEADER.unpack(raw)
    if magic != INTERVAL_MAGIC:
        raise IntervalFileError(f"{path}: not an interval file")
    if version != INTERVAL_VERSION:
        raise IntervalFileError(f"{path}: unsupported interval file version {version}")
    return count


def read_intervals(path) -> list[Interval]:
    count = check_interval_header(path)
    size = os.path.getsize(path) - INTERVAL_HEADER.size
    if size != count * INTERVAL_RECORD.size:
        raise IntervalFileError(f"{path}: header declares {count} intervals, body holds {size} bytes")
    arr = np.fromfile(path, dtype=_INTERVAL_DTYPE, offset=INTERVAL_HEADER.size, count=count)
    return [Interval(int(d), float(b), float(e)) for d, b, e in arr.tolist()]
