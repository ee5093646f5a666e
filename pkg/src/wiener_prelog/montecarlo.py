"""Replicate bookkeeping shared by the rate estimators.

Every replicate owns a private PCG64 stream derived from (seed, replicate
index), so results do not depend on how many workers run them.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RateEstimate:
    """Monte Carlo estimate in nats per symbol."""

    mean_nats: float
    stderr_nats: float
    replicates: int
    symbols_per_replicate: int

    @classmethod
    def from_replicates(cls, replicate_means, symbols_per_replicate, fallback_stderr=math.nan):
        m = np.asarray(replicate_means, dtype=float)
        if len(m) > 1:
            stderr = float(np.std(m, ddof=1) / math.sqrt(len(m)))
        else:
            stderr = float(fallback_stderr)
        return cls(float(np.mean(m)), stderr, len(m), int(symbols_per_replicate))


def as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, np.random.Generator):
        raise TypeError("pass an integer seed or SeedSequence, not a Generator")
    return np.random.SeedSequence(int(seed))


def child_sequence(seed, *key: int) -> np.random.SeedSequence:
    """Deterministic child of ``seed`` addressed by ``key``.

    Unlike ``SeedSequence.spawn`` this does not depend on how many children
    were spawned before.
    """
    ss = as_seed_sequence(seed)
    return np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + tuple(int(k) for k in key))


def replicate_rng(seed, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(child_sequence(seed, index)))


def map_replicates(fn, replicates: int, workers: int = 1):
    """Run ``fn(i)`` for i in range(replicates), results in index order."""
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    if workers <= 1 or replicates == 1:
        return [fn(i) for i in range(replicates)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(replicates)))
