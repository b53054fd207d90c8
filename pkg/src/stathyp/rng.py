"""Deterministic, worker-independent random streams.

Every sampler in the package derives its randomness from a fixed-size chunk
scheme: sample index ``j`` is served by the generator for chunk ``j // CHUNK``,
and that generator is seeded from ``(seed, chunk index)`` alone.  The value
drawn for a given sample therefore depends only on ``(seed, j)``, never on how
the work is split across workers or on how many samples are requested after it.
"""

from __future__ import annotations

import math
from typing import Iterator

import numpy as np

CHUNK = 1 << 16


def substream(seed: int, *key: int) -> np.random.Generator:
    """Generator for a named substream of ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def chunked(seed: int, n: int, *key: int) -> Iterator[tuple[int, int, np.random.Generator]]:
    """Yield ``(start, stop, generator)`` for each fixed-size chunk of ``n`` samples.

    ``key`` selects an independent substream family, so one estimator can
    consume several streams (e.g. one per sampled batch) from a single seed.
    """
    if n < 0:
        raise ValueError("sample count must be nonnegative")
    for i, start in enumerate(range(0, n, CHUNK)):
        yield start, min(start + CHUNK, n), substream(seed, *key, i)


def deterministic_sum(chunk_totals: list[float]) -> float:
    """Sum per-chunk totals in chunk order, exactly rounded."""
    return math.fsum(chunk_totals)
