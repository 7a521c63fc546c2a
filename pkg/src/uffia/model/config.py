"""Model architecture configuration and the two built-in profiles."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from ..errors import ConfigError


@dataclass
class ModelConfig:
    """Hyperparameters shared by the unified model and the fusion baselines.

    The "desk" profile is sized for single-core CPU training on the
    synthetic set; "paper" matches the published architecture (embedding
    768, 8 heads, 6 shared layers, FFN 1024) and exists for full-scale
    runs and for FLOPs/parameter accounting at canonical shapes.
    """

    dim: int = 128
    n_heads: int = 4
    n_layers: int = 2
    ffn_dim: int = 256
    patch_size: int = 16
    image_size: int = 64
    n_frames: int = 4                 # sampled frames per clip
    native_frames: int = 16           # frames stored per clip
    mel_bins: int = 128
    mel_frames: int = 128             # before compression
    simpf_k: float = 0.5
    audio_channels: tuple = (8, 16, 32, 64)
    audio_time_pools: tuple = (2, 2, 2, 1)
    audio_freq_pools: tuple = (2, 2, 2, 2)
    t_audio: int = 8
    audio_mlp_hidden: int = 128
    head_hidden: int = 128
    n_classes: int = 4
    bottleneck_tokens: int = 2

    def __post_init__(self):
        if self.dim % self.n_heads:
            raise ConfigError(f"dim {self.dim} not divisible by {self.n_heads} heads")
        if self.image_size % self.patch_size:
            raise ConfigError(
                f"image size {self.image_size} not divisible by patch {self.patch_size}")
        if len(self.audio_channels) != len(self.audio_time_pools) or \
                len(self.audio_channels) != len(self.audio_freq_pools):
            raise ConfigError("audio conv block lists must have equal lengths")
        if self.n_classes != 4:
            raise ConfigError("the intensity scale has exactly 4 classes")

    @property
    def n_patches(self) -> int:
        return (self.image_size // self.patch_size) ** 2

    @property
    def patch_dim(self) -> int:
        return 3 * self.patch_size ** 2

    @property
    def compressed_frames(self) -> int:
        return int(math.floor(self.simpf_k * self.mel_frames))

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("audio_channels", "audio_time_pools", "audio_freq_pools"):
            d[key] = list(d[key])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        for key in ("audio_channels", "audio_time_pools", "audio_freq_pools"):
            if key in d:
                d[key] = tuple(d[key])
        known = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown model config fields: {sorted(unknown)}")
        return cls(**d)


def desk_profile(**overrides) -> ModelConfig:
    return ModelConfig(**overrides)


def paper_profile(**overrides) -> ModelConfig:
    base = dict(dim=768, n_heads=8, n_layers=6, ffn_dim=1024, image_size=224,
                n_frames=4, native_frames=50, audio_channels=(16, 32, 64, 128),
                audio_mlp_hidden=768, head_hidden=768)
    base.update(overrides)
    return ModelConfig(**base)


PROFILES = {"desk": desk_profile, "paper": paper_profile}
