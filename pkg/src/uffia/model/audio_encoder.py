"""Conv-stack audio encoder producing a short token sequence.

A small 2-D convolutional stack (ReLU, max pooling) runs over the log-mel
matrix, features are average-pooled over the frequency axis, the time
axis is cut into ``t_audio`` windows, and per-window max and mean are
summed before an MLP (two linear layers, ReLU hidden) projects each
window into the shared embedding width.

Convolutions use edge-replicate padding so a time-constant input yields
identical tokens.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from ..numerics import Tensor, ops
from .config import ModelConfig


@dataclass
class ConvBlockParams:
    weight: Tensor
    bias: Tensor
    time_pool: int
    freq_pool: int


@dataclass
class AudioEncoderParams:
    blocks: list
    mlp_w1: Tensor
    mlp_b1: Tensor
    mlp_w2: Tensor
    mlp_b2: Tensor
    t_audio: int


def init_audio_encoder(cfg: ModelConfig, rng: np.random.Generator) -> AudioEncoderParams:
    blocks = []
    c_in = 1
    for c_out, tp, fp in zip(cfg.audio_channels, cfg.audio_time_pools, cfg.audio_freq_pools):
        std = 1.0 / np.sqrt(c_in * 9)
        blocks.append(ConvBlockParams(
            weight=Tensor(rng.standard_normal((c_out, c_in, 3, 3)) * std, requires_grad=True),
            bias=Tensor(np.zeros(c_out), requires_grad=True),
            time_pool=tp, freq_pool=fp))
        c_in = c_out
    c_final = cfg.audio_channels[-1]
    hidden = cfg.audio_mlp_hidden
    return AudioEncoderParams(
        blocks=blocks,
        mlp_w1=Tensor(rng.standard_normal((c_final, hidden)) / np.sqrt(c_final),
                      requires_grad=True),
        mlp_b1=Tensor(np.zeros(hidden), requires_grad=True),
        mlp_w2=Tensor(rng.standard_normal((hidden, cfg.dim)) / np.sqrt(hidden),
                      requires_grad=True),
        mlp_b2=Tensor(np.zeros(cfg.dim), requires_grad=True),
        t_audio=cfg.t_audio)


def pool_time_windows(x: Tensor, t_audio: int) -> Tensor:
    """(B, C, T) -> (B, C, t_audio): per-window max plus mean along time."""
    b, c, t = x.shape
    if t < t_audio:
        raise ContractError(
            f"{t} time positions cannot fill {t_audio} windows; reduce pooling or t_audio")
    width = t // t_audio
    x = x[:, :, :t_audio * width]
    windows = ops.reshape(x, (b, c, t_audio, width))
    return ops.add(ops.amax(windows, axis=3), ops.mean(windows, axis=3))


def encode_audio(mel_batch: Tensor, params: AudioEncoderParams) -> Tensor:
    """(B, T, M) log-mel batch -> (B, t_audio, dim) token sequences."""
    b, t, m = mel_batch.shape
    x = ops.reshape(mel_batch, (b, 1, t, m))
    for block in params.blocks:
        x = ops.relu(ops.conv2d(x, block.weight, block.bias, pad_mode="edge"))
        x = ops.max_pool2d(x, (block.time_pool, block.freq_pool))
    x = ops.mean(x, axis=3)                                   # over frequency
    x = pool_time_windows(x, params.t_audio)                  # (B, C, T_a)
    x = ops.transpose(x, (0, 2, 1))                           # (B, T_a, C)
    hidden = ops.relu(ops.add(ops.matmul(x, params.mlp_w1), params.mlp_b1))
    return ops.add(ops.matmul(hidden, params.mlp_w2), params.mlp_b2)
