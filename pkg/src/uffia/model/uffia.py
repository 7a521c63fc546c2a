"""The unified mixed-modality classifier.

One parameter set serves three inference modes:

* A  - audio tokens behind the audio class token through the shared
       encoder; the final class-token state feeds the audio head.
* V  - each sampled frame is patch-embedded behind the video class token,
       runs through the shared encoder, and the per-frame class tokens
       are mean-pooled into the video head.
* AV - frames are embedded behind the audio-visual class token, each
       frame passes the audio-to-video fusion block (self-attention plus
       cross-attention over the audio tokens), then the shared encoder;
       per-frame class tokens are mean-pooled into the audio-visual head.

Video input arrives pre-patchified as (B, N_f, N, 3P^2); audio input is a
(B, T, M) log-mel batch (already SimPF-compressed).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, NumericError, ShapeError
from ..fusion import (AvFusionParams, EncoderParams, av_fusion_block,
                      encoder_forward, init_av_fusion, init_encoder)
from ..numerics import Tensor, make_rng, ops
from ..params import named_tensors
from ..video import embed_patches
from .audio_encoder import AudioEncoderParams, encode_audio, init_audio_encoder
from .config import ModelConfig

MODEL_INIT_STREAM = 11


@dataclass
class HeadParams:
    w1: Tensor
    b1: Tensor
    w2: Tensor
    b2: Tensor


def init_head(dim: int, hidden: int, n_classes: int, rng) -> HeadParams:
    return HeadParams(
        w1=Tensor(rng.standard_normal((dim, hidden)) / np.sqrt(dim), requires_grad=True),
        b1=Tensor(np.zeros(hidden), requires_grad=True),
        w2=Tensor(rng.standard_normal((hidden, n_classes)) / np.sqrt(hidden),
                  requires_grad=True),
        b2=Tensor(np.zeros(n_classes), requires_grad=True))


def apply_head(x: Tensor, p: HeadParams) -> Tensor:
    return ops.add(ops.matmul(ops.relu(ops.add(ops.matmul(x, p.w1), p.b1)), p.w2), p.b2)


@dataclass
class UffiaParams:
    audio_encoder: AudioEncoderParams
    patch_projection: Tensor
    patch_bias: Tensor
    pos_emb: Tensor
    cls_audio: Tensor
    cls_video: Tensor
    cls_av: Tensor
    av_fusion: AvFusionParams
    encoder: EncoderParams
    head_audio: HeadParams
    head_video: HeadParams
    head_av: HeadParams


@dataclass
class UffiaOutput:
    """Per-clip logits ordered (None, Weak, Medium, Strong), plus the
    pooled embedding the head consumed."""

    logits: Tensor
    mode: str
    pooled: Tensor


class UffiaModel:
    """Unified model over a :class:`ModelConfig`; seeded construction."""

    kind = "uffia"

    def __init__(self, cfg: ModelConfig, seed: int = 0):
        self.cfg = cfg
        self.seed = seed
        rng = make_rng(seed, MODEL_INIT_STREAM)
        d = cfg.dim
        self.p = UffiaParams(
            audio_encoder=init_audio_encoder(cfg, rng),
            patch_projection=Tensor(rng.standard_normal((cfg.patch_dim, d))
                                    / np.sqrt(cfg.patch_dim), requires_grad=True),
            patch_bias=Tensor(np.zeros(d), requires_grad=True),
            pos_emb=Tensor(rng.standard_normal((cfg.n_patches + 1, d)) * 0.02,
                           requires_grad=True),
            cls_audio=Tensor(rng.standard_normal((1, d)) * 0.02, requires_grad=True),
            cls_video=Tensor(rng.standard_normal((1, d)) * 0.02, requires_grad=True),
            cls_av=Tensor(rng.standard_normal((1, d)) * 0.02, requires_grad=True),
            av_fusion=init_av_fusion(d, cfg.n_heads, rng),
            encoder=init_encoder(d, cfg.n_heads, cfg.ffn_dim, cfg.n_layers, rng),
            head_audio=init_head(d, cfg.head_hidden, cfg.n_classes, rng),
            head_video=init_head(d, cfg.head_hidden, cfg.n_classes, rng),
            head_av=init_head(d, cfg.head_hidden, cfg.n_classes, rng))

    def params(self) -> dict[str, Tensor]:
        return named_tensors(self.p)

    # -- encoders ---------------------------------------------------------

    def encode_audio(self, mel_batch) -> Tensor:
        mel = mel_batch if isinstance(mel_batch, Tensor) else Tensor(mel_batch)
        return encode_audio(mel, self.p.audio_encoder)

    def encode_video(self, patch_batch, mode: str = "V") -> Tensor:
        """(B, N_f, N, 3P^2) -> (B*N_f, N+1, dim) with the mode's class token."""
        patches = patch_batch if isinstance(patch_batch, Tensor) else Tensor(patch_batch)
        if patches.ndim != 4:
            raise ShapeError(f"expected (B, N_f, N, 3P^2), got {patches.shape}")
        b, n_f, n, pdim = patches.shape
        if n_f < 1:
            raise ContractError("video input must contain at least one frame")
        cls = {"A": self.p.cls_audio, "V": self.p.cls_video, "AV": self.p.cls_av}[mode]
        flat = ops.reshape(patches, (b * n_f, n, pdim))
        projected = ops.add(ops.matmul(flat, self.p.patch_projection), self.p.patch_bias)
        cls_rows = ops.repeat0(ops.reshape(cls, (1, 1, self.cfg.dim)), b * n_f)
        tokens = ops.concat([cls_rows, projected], axis=1)
        return ops.add(tokens, self.p.pos_emb)

    # -- forward ----------------------------------------------------------

    def forward(self, audio_mel=None, video_patches=None, mode: str = "AV") -> UffiaOutput:
        if mode not in ("A", "V", "AV"):
            raise ContractError(f"unknown mode {mode!r}")
        if mode in ("A", "AV") and audio_mel is None:
            raise ContractError(f"mode {mode} requires audio input")
        if mode in ("V", "AV") and video_patches is None:
            raise ContractError(f"mode {mode} requires video input")

        if mode == "A":
            tokens = self.encode_audio(audio_mel)                     # (B, T_a, d)
            b = tokens.shape[0]
            cls = ops.repeat0(ops.reshape(self.p.cls_audio, (1, 1, self.cfg.dim)), b)
            seq = ops.concat([cls, tokens], axis=1)
            out = encoder_forward(seq, self.p.encoder)
            pooled = out[:, 0, :]
            return UffiaOutput(apply_head(pooled, self.p.head_audio), "A", pooled)

        patches = video_patches if isinstance(video_patches, Tensor) else Tensor(video_patches)
        b, n_f = patches.shape[0], patches.shape[1]

        if mode == "V":
            frames = self.encode_video(patches, mode="V")             # (B*N_f, N+1, d)
            out = encoder_forward(frames, self.p.encoder)
            cls_states = ops.reshape(out[:, 0, :], (b, n_f, self.cfg.dim))
            pooled = ops.mean(cls_states, axis=1)
            return UffiaOutput(apply_head(pooled, self.p.head_video), "V", pooled)

        audio_tokens = self.encode_audio(audio_mel)                   # (B, T_a, d)
        frames = self.encode_video(patches, mode="AV")                # (B*N_f, N+1, d)
        audio_per_frame = ops.repeat0(audio_tokens, n_f)              # (B*N_f, T_a, d)
        fused = av_fusion_block(frames, audio_per_frame, self.p.av_fusion)
        out = encoder_forward(fused, self.p.encoder)
        cls_states = ops.reshape(out[:, 0, :], (b, n_f, self.cfg.dim))
        pooled = ops.mean(cls_states, axis=1)
        return UffiaOutput(apply_head(pooled, self.p.head_av), "AV", pooled)


def predict(output: UffiaOutput) -> np.ndarray:
    """Argmax labels with lowest-index tie-break; rejects NaN logits."""
    logits = output.logits.data
    if np.isnan(logits).any():
        raise NumericError("cannot predict from NaN logits")
    return np.argmax(logits, axis=-1)
