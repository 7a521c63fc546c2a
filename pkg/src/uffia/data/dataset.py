"""Dataset views: deterministic synthetic sets and manifest-backed sets."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ConfigError, InputError
from ..numerics import clip_rng
from .media import load_clip_media
from .records import ClipRecord
from .synth import SynthParams, generate_clip


@dataclass
class SyntheticSpec:
    """Desk-scale default: 800/100/100 clips, balanced four ways."""

    n_train: int = 800
    n_val: int = 100
    n_test: int = 100
    params: SynthParams = field(default_factory=SynthParams)

    def __post_init__(self):
        for name, n in (("n_train", self.n_train), ("n_val", self.n_val),
                        ("n_test", self.n_test)):
            if n < 0 or n % 4:
                raise ConfigError(f"{name} must be a nonnegative multiple of 4, got {n}")

    @property
    def total(self) -> int:
        return self.n_train + self.n_val + self.n_test


class SyntheticDataset:
    """Lazy, index-addressed synthetic clips.

    Clip ``i`` has class ``i % 4`` (balanced within every split block) and
    is regenerated on demand from (seed, i); no media is retained here.
    """

    def __init__(self, spec: SyntheticSpec):
        self.spec = spec

    def __len__(self) -> int:
        return self.spec.total

    def split_of(self, index: int) -> str:
        if index < self.spec.n_train:
            return "train"
        if index < self.spec.n_train + self.spec.n_val:
            return "val"
        return "test"

    def label_of(self, index: int) -> int:
        return index % 4

    def indices(self, split: str) -> list[int]:
        return [i for i in range(len(self)) if self.split_of(i) == split]

    def load(self, index: int) -> ClipRecord:
        if not 0 <= index < len(self):
            raise InputError(f"clip index {index} outside [0, {len(self)})")
        p = self.spec.params
        return generate_clip(self.label_of(index), p, clip_rng(p.seed, index),
                             clip_id=f"synth-{index:06d}", split=self.split_of(index))


class ManifestDataset:
    """Manifest records with lazy media loading."""

    def __init__(self, records: list[ClipRecord]):
        if not records:
            raise InputError("manifest dataset has no records")
        self.records = records

    def __len__(self) -> int:
        return len(self.records)

    def split_of(self, index: int) -> str:
        return self.records[index].split

    def label_of(self, index: int) -> int:
        return self.records[index].label

    def indices(self, split: str) -> list[int]:
        return [i for i, r in enumerate(self.records) if r.split == split]

    def load(self, index: int) -> ClipRecord:
        r = self.records[index]
        if r.waveform is None or r.frames is None:
            r = load_clip_media(r)
        return r
