"""Audio-to-video fusion block.

Per frame: a self-attention sublayer over the frame's tokens with a
residual, then a cross-attention sublayer pulling in audio tokens with a
residual. Both sublayers are pre-norm; no feed-forward inside the block.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..numerics import Tensor, ops
from .attention import AttentionParams, cross_attention_layer, init_attention, mha
from .encoder import LayerNormParams, apply_norm, init_layer_norm


@dataclass
class AvFusionParams:
    self_attn: AttentionParams
    cross_attn: AttentionParams
    norm_self: LayerNormParams
    norm_query: LayerNormParams
    norm_audio: LayerNormParams


def init_av_fusion(dim: int, n_heads: int, rng) -> AvFusionParams:
    return AvFusionParams(self_attn=init_attention(dim, n_heads, rng),
                          cross_attn=init_attention(dim, n_heads, rng),
                          norm_self=init_layer_norm(dim),
                          norm_query=init_layer_norm(dim),
                          norm_audio=init_layer_norm(dim))


def av_fusion_block(video_tokens: Tensor, audio_tokens: Tensor,
                    params: AvFusionParams) -> Tensor:
    """S = V + SelfAttn(V); O = S + CrossAttn(S -> audio)."""
    normed = apply_norm(video_tokens, params.norm_self)
    s = ops.add(video_tokens, mha(normed, normed, normed, params.self_attn))
    q = apply_norm(s, params.norm_query)
    kv = apply_norm(audio_tokens, params.norm_audio)
    return ops.add(s, cross_attention_layer(q, kv, params.cross_attn))
