"""Time/frequency block masking on mel features."""
from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from .mel import MelFeature


def spec_augment(mel: MelFeature, n_time_masks: int, n_freq_masks: int,
                 mask_t: int, mask_f: int, rng: np.random.Generator) -> MelFeature:
    """Mask ``n_time_masks`` blocks of ``mask_t`` frames and
    ``n_freq_masks`` blocks of ``mask_f`` bins, filled with the feature mean.

    Mask widths are fixed; only positions are random. Draw order is all
    time-mask positions first, then all frequency-mask positions, so a
    seeded generator reproduces placements exactly.
    """
    t, m = mel.frames.shape
    if n_time_masks and mask_t > t:
        raise ConfigError(f"time mask width {mask_t} exceeds {t} frames")
    if n_freq_masks and mask_f > m:
        raise ConfigError(f"frequency mask width {mask_f} exceeds {m} bins")
    out = mel.frames.copy()
    fill = mel.frames.mean()
    for _ in range(n_time_masks):
        if mask_t == 0:
            continue
        t0 = int(rng.integers(0, t - mask_t + 1))
        out[t0:t0 + mask_t, :] = fill
    for _ in range(n_freq_masks):
        if mask_f == 0:
            continue
        f0 = int(rng.integers(0, m - mask_f + 1))
        out[:, f0:f0 + mask_f] = fill
    return mel.with_frames(out)
