"""Pre-norm transformer encoder: L blocks of attention + GELU FFN."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..numerics import Tensor, ops
from .attention import AttentionParams, init_attention


@dataclass
class LayerNormParams:
    gain: Tensor
    bias: Tensor


def init_layer_norm(dim: int) -> LayerNormParams:
    return LayerNormParams(gain=Tensor(np.ones(dim), requires_grad=True),
                           bias=Tensor(np.zeros(dim), requires_grad=True))


def apply_norm(x: Tensor, p: LayerNormParams) -> Tensor:
    return ops.layer_norm(x, p.gain, p.bias)


@dataclass
class FeedForwardParams:
    w1: Tensor
    b1: Tensor
    w2: Tensor
    b2: Tensor


def init_ffn(dim: int, hidden: int, rng) -> FeedForwardParams:
    s1, s2 = 1.0 / np.sqrt(dim), 1.0 / np.sqrt(hidden)
    return FeedForwardParams(
        w1=Tensor(rng.standard_normal((dim, hidden)) * s1, requires_grad=True),
        b1=Tensor(np.zeros(hidden), requires_grad=True),
        w2=Tensor(rng.standard_normal((hidden, dim)) * s2, requires_grad=True),
        b2=Tensor(np.zeros(dim), requires_grad=True))


def apply_ffn(x: Tensor, p: FeedForwardParams) -> Tensor:
    return ops.add(ops.matmul(ops.gelu(ops.add(ops.matmul(x, p.w1), p.b1)), p.w2), p.b2)


@dataclass
class EncoderLayerParams:
    attn: AttentionParams
    norm_attn: LayerNormParams
    ffn: FeedForwardParams
    norm_ffn: LayerNormParams


def init_encoder_layer(dim: int, n_heads: int, ffn_dim: int, rng) -> EncoderLayerParams:
    return EncoderLayerParams(attn=init_attention(dim, n_heads, rng),
                              norm_attn=init_layer_norm(dim),
                              ffn=init_ffn(dim, ffn_dim, rng),
                              norm_ffn=init_layer_norm(dim))


def encoder_layer(x: Tensor, p: EncoderLayerParams) -> Tensor:
    from .attention import mha
    normed = apply_norm(x, p.norm_attn)
    x = ops.add(x, mha(normed, normed, normed, p.attn))
    return ops.add(x, apply_ffn(apply_norm(x, p.norm_ffn), p.ffn))


@dataclass
class EncoderParams:
    layers: list = field(default_factory=list)
    final_norm: LayerNormParams = None


def init_encoder(dim: int, n_heads: int, ffn_dim: int, n_layers: int, rng) -> EncoderParams:
    return EncoderParams(
        layers=[init_encoder_layer(dim, n_heads, ffn_dim, rng) for _ in range(n_layers)],
        final_norm=init_layer_norm(dim))


def encoder_forward(tokens: Tensor, params: EncoderParams) -> Tensor:
    """Run all layers then the final norm; zero layers reduce to the norm."""
    x = tokens
    for layer in params.layers:
        x = encoder_layer(x, layer)
    return apply_norm(x, params.final_norm)
