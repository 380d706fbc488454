"""Seed derivation: one master seed, named independent streams."""

from __future__ import annotations

from zlib import crc32

import numpy as np


def derive_seed(master_seed: int, label: str, index: int = 0) -> np.random.SeedSequence:
    """Deterministic sub-stream for (label, index) under a master seed.

    Streams for distinct (label, index) pairs are statistically independent,
    so parallelizing over index never changes results.
    """
    return np.random.SeedSequence(
        [int(master_seed) & 0xFFFFFFFFFFFFFFFF, crc32(label.encode()), int(index)]
    )


def derive_rng(master_seed: int, label: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, label, index))
