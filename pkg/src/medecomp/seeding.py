"""Deterministic random-number stream derivation.

Every stochastic component in this package draws from a PCG64 generator
seeded through a hierarchical ``SeedSequence``: the user-supplied master
seed plus a tuple of purpose keys (strings are hashed with CRC32, which is
stable across platforms and Python versions). Re-running with the same
master seed therefore reproduces every artifact bit for bit, and parallel
subtasks (bootstrap replicates, Monte Carlo batches) can each own an
independent stream without coordination.
"""

from __future__ import annotations

import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _key_words(keys) -> tuple[int, ...]:
    words = []
    for key in keys:
        if isinstance(key, str):
            words.append(zlib.crc32(key.encode("utf-8")))
        else:
            words.append(int(key) & 0xFFFFFFFF)
    return tuple(words)


def child_seed_sequence(seed: int, *keys) -> np.random.SeedSequence:
    """SeedSequence for the sub-stream identified by ``keys``."""
    return np.random.SeedSequence(entropy=int(seed) & _MASK64, spawn_key=_key_words(keys))


def derive_rng(seed: int, *keys) -> np.random.Generator:
    """Independent PCG64 generator for the sub-stream identified by ``keys``."""
    return np.random.default_rng(child_seed_sequence(seed, *keys))


def derive_seed(seed: int, *keys) -> int:
    """A 64-bit integer seed derived from ``seed`` and ``keys``.

    Used when a sub-component takes an integer seed rather than a generator.
    """
    state = child_seed_sequence(seed, *keys).generate_state(2)
    return int(state[0]) | (int(state[1]) << 32)
