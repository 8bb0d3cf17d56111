"""Reproducible per-replicate random streams.

Every replicate owns a PCG64 stream spawned from ``(root_seed, index)``, so a
replicate's outcome depends only on the root seed and its position, never on
how replicates are scheduled across workers.
"""

from __future__ import annotations

import numpy as np


def replicate_seed_sequence(root_seed: int, index: int) -> np.random.SeedSequence:
    if root_seed < 0 or index < 0:
        raise ValueError("root_seed and index must be non-negative")
    return np.random.SeedSequence(entropy=root_seed, spawn_key=(index,))


def replicate_rng(root_seed: int, index: int) -> np.random.Generator:
    """Generator for replicate ``index`` under ``root_seed``."""
    return np.random.Generator(np.random.PCG64(replicate_seed_sequence(root_seed, index)))


def as_generator(rng: np.random.Generator | int | None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
