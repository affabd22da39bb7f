"""Deterministic, splittable random streams.

All randomness in the package flows through counter-based Philox
generators keyed by explicit 64-bit seeds.  Streams are split by integer
labels so that, e.g., the weights of column ``i`` of an environment are a
function of ``(seed, i)`` only, which makes generation reproducible and
parallelizable.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream", "substream", "derive_seed"]

_MASK64 = (1 << 64) - 1


def _check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= _MASK64:
        raise ValueError(f"seed must fit in uint64, got {seed}")
    return seed


def stream(seed) -> np.random.Generator:
    """Top-level generator for the given seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(_check_seed(seed))))


def substream(seed, *labels: int) -> np.random.Generator:
    """Generator for the sub-stream identified by ``labels`` under ``seed``.

    Distinct label tuples yield statistically independent streams.
    """
    ss = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(x) for x in labels))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed, *labels: int) -> int:
    """Derive a fresh uint64 seed from ``seed`` and integer labels."""
    ss = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(x) for x in labels))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
