"""Benchmark models: single-modality baselines and the three fusion schemes.

The fusion baselines follow the ViT treatment of both streams: video
frames are patch tokens, the mel spectrogram is cut into single-channel
patches of the same size. They differ only in how the two token sets
interact: one joint self-attention sequence, repeated video-to-audio
cross-attention, or exchange through a small set of bottleneck tokens.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, ShapeError
from ..fusion import (AttentionParams, EncoderLayerParams, EncoderParams,
                      FeedForwardParams, LayerNormParams, apply_ffn,
                      apply_norm, encoder_forward, fuse_half, init_attention,
                      init_encoder, init_encoder_layer, init_ffn,
                      init_layer_norm, mha)
from ..numerics import Tensor, make_rng, ops
from ..params import named_tensors
from .audio_encoder import AudioEncoderParams, encode_audio, init_audio_encoder
from .config import ModelConfig
from .uffia import HeadParams, UffiaOutput, apply_head, init_head

BASELINE_INIT_STREAM = 13


def mel_patchify(mel: np.ndarray, patch: int) -> np.ndarray:
    """(B, T, M) -> (B, (T/P)*(M/P), P^2) single-channel patches."""
    b, t, m = mel.shape
    if t % patch or m % patch:
        raise ShapeError(f"mel extents {(t, m)} not divisible by patch {patch}")
    gt, gm = t // patch, m // patch
    tiles = mel.reshape(b, gt, patch, gm, patch)
    return tiles.transpose(0, 1, 3, 2, 4).reshape(b, gt * gm, patch * patch)


def _embed(flat: Tensor, projection: Tensor, bias: Tensor) -> Tensor:
    return ops.add(ops.matmul(flat, projection), bias)


class AudioOnlyModel:
    """Conv audio encoder + class token + encoder + head."""

    kind = "audio-baseline"

    def __init__(self, cfg: ModelConfig, seed: int = 0):
        self.cfg = cfg
        rng = make_rng(seed, BASELINE_INIT_STREAM)
        d = cfg.dim
        self.audio_encoder = init_audio_encoder(cfg, rng)
        self.cls = Tensor(rng.standard_normal((1, d)) * 0.02, requires_grad=True)
        self.encoder = init_encoder(d, cfg.n_heads, cfg.ffn_dim, cfg.n_layers, rng)
        self.head = init_head(d, cfg.head_hidden, cfg.n_classes, rng)

    def params(self):
        return named_tensors({"audio_encoder": self.audio_encoder, "cls": self.cls,
                              "encoder": self.encoder, "head": self.head})

    def forward(self, audio_mel=None, video_patches=None, mode: str = "A") -> UffiaOutput:
        if mode != "A":
            raise ContractError(f"audio baseline only runs in A mode, got {mode!r}")
        if audio_mel is None:
            raise ContractError("audio baseline requires audio input")
        tokens = encode_audio(Tensor(audio_mel) if not isinstance(audio_mel, Tensor)
                              else audio_mel, self.audio_encoder)
        b = tokens.shape[0]
        cls = ops.repeat0(ops.reshape(self.cls, (1, 1, self.cfg.dim)), b)
        out = encoder_forward(ops.concat([cls, tokens], axis=1), self.encoder)
        pooled = out[:, 0, :]
        return UffiaOutput(apply_head(pooled, self.head), "A", pooled)


class VideoOnlyModel:
    """Linear patch projection + class token + encoder + head."""

    kind = "video-baseline"

    def __init__(self, cfg: ModelConfig, seed: int = 0):
        self.cfg = cfg
        rng = make_rng(seed, BASELINE_INIT_STREAM + 1)
        d = cfg.dim
        self.projection = Tensor(rng.standard_normal((cfg.patch_dim, d))
                                 / np.sqrt(cfg.patch_dim), requires_grad=True)
        self.bias = Tensor(np.zeros(d), requires_grad=True)
        self.pos_emb = Tensor(rng.standard_normal((cfg.n_patches + 1, d)) * 0.02,
                              requires_grad=True)
        self.cls = Tensor(rng.standard_normal((1, d)) * 0.02, requires_grad=True)
        self.encoder = init_encoder(d, cfg.n_heads, cfg.ffn_dim, cfg.n_layers, rng)
        self.head = init_head(d, cfg.head_hidden, cfg.n_classes, rng)

    def params(self):
        return named_tensors({"projection": self.projection, "bias": self.bias,
                              "pos_emb": self.pos_emb, "cls": self.cls,
                              "encoder": self.encoder, "head": self.head})

    def forward(self, audio_mel=None, video_patches=None, mode: str = "V") -> UffiaOutput:
        if mode != "V":
            raise ContractError(f"video baseline only runs in V mode, got {mode!r}")
        if video_patches is None:
            raise ContractError("video baseline requires video input")
        patches = video_patches if isinstance(video_patches, Tensor) else Tensor(video_patches)
        b, n_f, n, pdim = patches.shape
        flat = ops.reshape(patches, (b * n_f, n, pdim))
        tokens = _embed(flat, self.projection, self.bias)
        cls = ops.repeat0(ops.reshape(self.cls, (1, 1, self.cfg.dim)), b * n_f)
        seq = ops.add(ops.concat([cls, tokens], axis=1), self.pos_emb)
        out = encoder_forward(seq, self.encoder)
        pooled = ops.mean(ops.reshape(out[:, 0, :], (b, n_f, self.cfg.dim)), axis=1)
        return UffiaOutput(apply_head(pooled, self.head), "V", pooled)


class _FusionBase:
    """Shared ViT-style embedding of both streams for the fusion models."""

    def __init__(self, cfg: ModelConfig, seed: int, stream: int):
        self.cfg = cfg
        rng = make_rng(seed, stream)
        d = cfg.dim
        p = cfg.patch_size
        self.video_projection = Tensor(rng.standard_normal((cfg.patch_dim, d))
                                       / np.sqrt(cfg.patch_dim), requires_grad=True)
        self.video_bias = Tensor(np.zeros(d), requires_grad=True)
        self.video_pos = Tensor(rng.standard_normal((cfg.n_patches, d)) * 0.02,
                                requires_grad=True)
        self.audio_projection = Tensor(rng.standard_normal((p * p, d)) / p,
                                       requires_grad=True)
        self.audio_bias = Tensor(np.zeros(d), requires_grad=True)
        n_audio = (cfg.compressed_frames // p) * (cfg.mel_bins // p)
        self.audio_pos = Tensor(rng.standard_normal((n_audio, d)) * 0.02,
                                requires_grad=True)
        self.head = init_head(d, cfg.head_hidden, cfg.n_classes, rng)
        self._rng = rng

    def _prepare(self, audio_mel, video_patches, mode):
        if mode != "AV":
            raise ContractError(f"{self.kind} only runs in AV mode, got {mode!r}")
        if audio_mel is None or video_patches is None:
            raise ContractError(f"{self.kind} requires both modalities")
        mel = audio_mel.data if isinstance(audio_mel, Tensor) else np.asarray(audio_mel)
        audio_flat = Tensor(mel_patchify(mel, self.cfg.patch_size))
        audio_tokens = ops.add(_embed(audio_flat, self.audio_projection, self.audio_bias),
                               self.audio_pos)
        patches = video_patches if isinstance(video_patches, Tensor) else Tensor(video_patches)
        b, n_f, n, pdim = patches.shape
        flat = ops.reshape(patches, (b, n_f * n, pdim))
        video_tokens = _embed(flat, self.video_projection, self.video_bias)
        pos = ops.reshape(ops.repeat0(self.video_pos, n_f), (n_f * n, self.cfg.dim))
        video_tokens = ops.add(video_tokens, pos)
        return audio_tokens, video_tokens, b


class SelfAttentionFusion(_FusionBase):
    """All audio and video tokens in one self-attention sequence."""

    kind = "fusion-self"

    def __init__(self, cfg: ModelConfig, seed: int = 0):
        super().__init__(cfg, seed, BASELINE_INIT_STREAM + 2)
        d = cfg.dim
        self.cls = Tensor(self._rng.standard_normal((1, d)) * 0.02, requires_grad=True)
        self.encoder = init_encoder(d, cfg.n_heads, cfg.ffn_dim, cfg.n_layers, self._rng)

    def params(self):
        return named_tensors({k: v for k, v in self.__dict__.items()
                              if not k.startswith("_") and k != "cfg"})

    def forward(self, audio_mel=None, video_patches=None, mode: str = "AV") -> UffiaOutput:
        audio_tokens, video_tokens, b = self._prepare(audio_mel, video_patches, mode)
        cls = ops.repeat0(ops.reshape(self.cls, (1, 1, self.cfg.dim)), b)
        seq = ops.concat([cls, audio_tokens, video_tokens], axis=1)
        out = encoder_forward(seq, self.encoder)
        pooled = out[:, 0, :]
        return UffiaOutput(apply_head(pooled, self.head), "AV", pooled)


@dataclass
class CrossLayerParams:
    attn: AttentionParams
    norm_query: LayerNormParams
    norm_audio: LayerNormParams
    ffn: FeedForwardParams
    norm_ffn: LayerNormParams


class CrossAttentionFusion(_FusionBase):
    """Video tokens repeatedly query the fixed audio token sequence."""

    kind = "fusion-cross"

    def __init__(self, cfg: ModelConfig, seed: int = 0):
        super().__init__(cfg, seed, BASELINE_INIT_STREAM + 3)
        d = cfg.dim
        rng = self._rng
        self.cls = Tensor(rng.standard_normal((1, d)) * 0.02, requires_grad=True)
        self.layers = [CrossLayerParams(attn=init_attention(d, cfg.n_heads, rng),
                                        norm_query=init_layer_norm(d),
                                        norm_audio=init_layer_norm(d),
                                        ffn=init_ffn(d, cfg.ffn_dim, rng),
                                        norm_ffn=init_layer_norm(d))
                       for _ in range(cfg.n_layers)]
        self.final_norm = init_layer_norm(d)

    def params(self):
        return named_tensors({k: v for k, v in self.__dict__.items()
                              if not k.startswith("_") and k != "cfg"})

    def forward(self, audio_mel=None, video_patches=None, mode: str = "AV") -> UffiaOutput:
        audio_tokens, video_tokens, b = self._prepare(audio_mel, video_patches, mode)
        cls = ops.repeat0(ops.reshape(self.cls, (1, 1, self.cfg.dim)), b)
        x = ops.concat([cls, video_tokens], axis=1)
        for layer in self.layers:
            q = apply_norm(x, layer.norm_query)
            kv = apply_norm(audio_tokens, layer.norm_audio)
            x = ops.add(x, mha(q, kv, kv, layer.attn))
            x = ops.add(x, apply_ffn(apply_norm(x, layer.norm_ffn), layer.ffn))
        out = apply_norm(x, self.final_norm)
        pooled = out[:, 0, :]
        return UffiaOutput(apply_head(pooled, self.head), "AV", pooled)


class BottleneckFusion(_FusionBase):
    """Cross-modal exchange restricted to a few shared bottleneck tokens."""

    kind = "fusion-bottleneck"

    def __init__(self, cfg: ModelConfig, seed: int = 0):
        super().__init__(cfg, seed, BASELINE_INIT_STREAM + 4)
        d = cfg.dim
        rng = self._rng
        self.cls_audio = Tensor(rng.standard_normal((1, d)) * 0.02, requires_grad=True)
        self.cls_video = Tensor(rng.standard_normal((1, d)) * 0.02, requires_grad=True)
        self.bottleneck = Tensor(rng.standard_normal((cfg.bottleneck_tokens, d)) * 0.02,
                                 requires_grad=True)
        self.video_layers = [init_encoder_layer(d, cfg.n_heads, cfg.ffn_dim, rng)
                             for _ in range(cfg.n_layers)]
        self.audio_layers = [init_encoder_layer(d, cfg.n_heads, cfg.ffn_dim, rng)
                             for _ in range(cfg.n_layers)]
        self.final_norm = init_layer_norm(d)

    def params(self):
        return named_tensors({k: v for k, v in self.__dict__.items()
                              if not k.startswith("_") and k != "cfg"})

    def forward(self, audio_mel=None, video_patches=None, mode: str = "AV") -> UffiaOutput:
        audio_tokens, video_tokens, b = self._prepare(audio_mel, video_patches, mode)
        d = self.cfg.dim
        z_v = ops.concat([ops.repeat0(ops.reshape(self.cls_video, (1, 1, d)), b),
                          video_tokens], axis=1)
        z_a = ops.concat([ops.repeat0(ops.reshape(self.cls_audio, (1, 1, d)), b),
                          audio_tokens], axis=1)
        z_f = ops.repeat0(ops.reshape(self.bottleneck, (1,) + self.bottleneck.shape), b)
        for pv, pa in zip(self.video_layers, self.audio_layers):
            z_v, z_f_mid = fuse_half(z_v, z_f, pv)
            z_a, z_f = fuse_half(z_a, z_f_mid, pa)
        z_v = apply_norm(z_v, self.final_norm)
        z_a = apply_norm(z_a, self.final_norm)
        pooled = ops.mul(ops.add(z_v[:, 0, :], z_a[:, 0, :]), 0.5)
        return UffiaOutput(apply_head(pooled, self.head), "AV", pooled)


MODEL_KINDS = {
    "uffia": None,  # built in uffia.py
    "audio-baseline": AudioOnlyModel,
    "video-baseline": VideoOnlyModel,
    "fusion-self": SelfAttentionFusion,
    "fusion-cross": CrossAttentionFusion,
    "fusion-bottleneck": BottleneckFusion,
}


def build_model(kind: str, cfg: ModelConfig, seed: int = 0):
    from .uffia import UffiaModel
    if kind == "uffia":
        return UffiaModel(cfg, seed)
    if kind not in MODEL_KINDS:
        raise ContractError(f"unknown model kind {kind!r}; choose from {sorted(MODEL_KINDS)}")
    return MODEL_KINDS[kind](cfg, seed)
