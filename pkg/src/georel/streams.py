"""Reproducible random streams keyed by (seed, role, design point, replication).

Each replication gets its own Philox generator.  The key comes from hashing
the master seed, a stream role and the sampling design point with
:class:`numpy.random.SeedSequence`; the replication index goes into the
counter.  Replication ``i`` therefore draws the same numbers whether it runs
alone, in a serial loop, or on any worker thread.
"""

from __future__ import annotations

import os
import struct
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .geomdist import GeoParams, sample

# Stable integer codes for stream roles; never renumber.
ROLES = {"sample": 1, "stress": 2, "strength": 3, "zero-cov": 4, "hist": 5}

CHUNK = 500


def _float_words(x: float) -> list[int]:
    bits = struct.unpack("<Q", struct.pack("<d", float(x)))[0]
    return [bits & 0xFFFFFFFF, bits >> 32]


def stream_key(seed: int, role: str, params: GeoParams, n: int) -> np.ndarray:
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, ROLES[role], params.r, *_float_words(params.theta), n]
    return np.random.SeedSequence(entropy).generate_state(2, np.uint64)


def replication_stream(key: np.ndarray, rep: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, 0, rep]))


def worker_count() -> int:
    """Worker threads from ``GEOREL_THREADS`` (0 or unset means one per CPU)."""
    raw = os.environ.get("GEOREL_THREADS", "0").strip() or "0"
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"GEOREL_THREADS must be an integer, got {raw!r}") from None
    if value < 0:
        raise ValueError("GEOREL_THREADS must be >= 0")
    return value or (os.cpu_count() or 1)


def draw_samples(params: GeoParams, n: int, reps: int, seed: int, role: str = "sample") -> np.ndarray:
    """``reps x n`` matrix of lifetimes; row ``i`` comes from replication ``i``'s stream."""
    key = stream_key(seed, role, params, n)
    out = np.empty((reps, n), dtype=np.int64)

    def fill(lo: int, hi: int) -> None:
        for rep in range(lo, hi):
            out[rep] = sample(params, n, replication_stream(key, rep))

    chunks = [(lo, min(lo + CHUNK, reps)) for lo in range(0, reps, CHUNK)]
    workers = min(worker_count(), len(chunks))
    if workers <= 1:
        for lo, hi in chunks:
            fill(lo, hi)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda c: fill(*c), chunks))
    return out
