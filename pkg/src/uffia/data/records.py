"""Clip records and the fixed class order."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dsp import Waveform

CLASS_NAMES = ("None", "Weak", "Medium", "Strong")
CLASS_INDEX = {name: i for i, name in enumerate(CLASS_NAMES)}
SPLITS = ("train", "val", "test")


@dataclass
class ClipRecord:
    """One 2-second labeled audio-visual sample.

    Media may be loaded eagerly (synthetic clips) or lazily via the
    ``audio_path`` / ``video_path`` fields (manifest datasets).
    """

    clip_id: str
    label: int
    split: str = "train"
    waveform: Waveform | None = None
    frames: np.ndarray | None = None          # (F, 3, H, W) in [0, 1]
    audio_path: str | None = None
    video_path: str | None = None
    source: str = "synthetic"
    meta: dict = field(default_factory=dict)

    @property
    def label_name(self) -> str:
        return CLASS_NAMES[self.label]
