"""Deterministic random streams.

All randomness in the package flows through Philox4x64 counter-based bit
generators (numpy's ``Philox``). A stream is fully determined by a
(seed, stream) pair, so any sample is reproducible from the run seed plus
a documented stream index, independent of draw order in other streams.
"""
from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator over Philox4x64 keyed by (seed, stream)."""
    key = np.array([seed & _MASK, stream & _MASK], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def clip_rng(seed: int, clip_index: int) -> np.random.Generator:
    """Per-clip stream: synthetic clip content depends only on (seed, index)."""
    return make_rng(seed, 1_000_000_007 + clip_index)
