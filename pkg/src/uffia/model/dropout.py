"""Modality dropout: per-step branch selection over {AV, A, V}.

During training one branch is drawn per step with probabilities
(p_av, p_a, p_v); the dropped modality's feature block is replaced by a
zero block of its exact shape. At evaluation no dropout happens; the mode
follows from which inputs are present.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, ContractError

MODES = ("AV", "A", "V")


@dataclass
class DropoutConfig:
    """Branch probabilities: both modalities, audio only, video only."""

    p_av: float
    p_a: float
    p_v: float

    def __post_init__(self):
        probs = (self.p_av, self.p_a, self.p_v)
        if any(p < 0 or p > 1 for p in probs):
            raise ConfigError(f"probabilities must lie in [0,1], got {probs}")
        if abs(sum(probs) - 1.0) > 1e-9:
            raise ConfigError(f"probabilities must sum to 1, got {sum(probs)}")


@dataclass
class FusedInput:
    """Concatenation structure of Eq-style fused features plus the branch tag.

    ``audio`` and ``video`` keep their exact shapes; the masked side is an
    all-zero block. ``mode`` names the selected branch.
    """

    audio: np.ndarray
    video: np.ndarray
    mode: str

    def concat_tokens(self) -> np.ndarray:
        """Flatten video to tokens and concatenate along the token axis."""
        video_tokens = self.video.reshape(-1, self.video.shape[-1])
        audio_tokens = self.audio.reshape(-1, self.audio.shape[-1])
        return np.concatenate([audio_tokens, video_tokens], axis=0)


def draw_mode(cfg: DropoutConfig, rng: np.random.Generator) -> str:
    """One branch per training step; consumes exactly one uniform draw."""
    u = rng.random()
    if u < cfg.p_av:
        return "AV"
    if u < cfg.p_av + cfg.p_a:
        return "A"
    return "V"


def apply_modality_dropout(h_a: np.ndarray, h_v: np.ndarray, cfg: DropoutConfig,
                           rng: np.random.Generator, training: bool = True) -> FusedInput:
    """Mask one modality per the drawn branch; evaluation passes through.

    At evaluation the mode is dictated by which inputs are not None; pass
    both for AV.
    """
    if not training:
        if h_a is None and h_v is None:
            raise ContractError("evaluation needs at least one modality present")
        if h_a is None:
            return FusedInput(audio=np.zeros((0,)), video=np.asarray(h_v), mode="V")
        if h_v is None:
            return FusedInput(audio=np.asarray(h_a), video=np.zeros((0,)), mode="A")
        return FusedInput(audio=np.asarray(h_a), video=np.asarray(h_v), mode="AV")

    if h_a is None or h_v is None:
        raise ContractError("training-time dropout requires both modality features")
    h_a = np.asarray(h_a)
    h_v = np.asarray(h_v)
    mode = draw_mode(cfg, rng)
    if mode == "A":
        return FusedInput(audio=h_a, video=np.zeros_like(h_v), mode="A")
    if mode == "V":
        return FusedInput(audio=np.zeros_like(h_a), video=h_v, mode="V")
    return FusedInput(audio=h_a, video=h_v, mode="AV")
