"""Deterministic random streams and block-parallel replica execution.

Every random quantity is drawn from a stream keyed by ``(seed, key...)``.
Replicas are processed in fixed-size blocks; block ``j`` always receives the
stream keyed by ``(seed, purpose, j)``, so results do not depend on how many
worker threads execute the blocks.
"""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

BLOCK_SIZE = 1000


def _key_int(part):
    if isinstance(part, (int, np.integer)):
        return int(part)
    return zlib.crc32(str(part).encode())


def stream(seed, *key) -> np.random.Generator:
    """Generator for the stream ``(seed, *key)``; string keys are hashed."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_key_int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng_or_seed) -> np.random.Generator:
    if isinstance(rng_or_seed, np.random.Generator):
        return rng_or_seed
    return stream(0 if rng_or_seed is None else rng_or_seed)


def child_seed(rng: np.random.Generator) -> int:
    """Draw a 63-bit seed from ``rng`` (used to derive keyed sub-streams)."""
    return int(rng.integers(0, 2 ** 63 - 1))


def worker_count() -> int:
    env = os.environ.get("CONEKIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def blocks(total, size=BLOCK_SIZE):
    """``[(start, stop), ...]`` covering ``range(total)``."""
    return [(s, min(s + size, total)) for s in range(0, total, size)]


def run_blocks(fn, total, seed, purpose, size=BLOCK_SIZE, workers=None):
    """Evaluate ``fn(count, rng)`` for each replica block and concatenate.

    ``fn`` returns an array (or a tuple of arrays) whose first axis has
    ``count`` rows.  Output is identical for any ``workers`` value.
    """
    spans = blocks(total, size)
    jobs = [(stop - start, stream(seed, purpose, j)) for j, (start, stop) in enumerate(spans)]
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: fn(*job), jobs))
    else:
        parts = [fn(*job) for job in jobs]
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate(col, axis=0) for col in zip(*parts))
    return np.concatenate(parts, axis=0)
