"""Multi-head scaled dot-product attention.

Scores are scaled by 1/sqrt(d / n_heads), i.e. per-head width; heads are
concatenated and passed through an output projection. Token sequences are
(T, d) or batched (B, T, d).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InputError, ShapeError
from ..numerics import Tensor, ops


@dataclass
class AttentionParams:
    """Query/key/value/output projections, each d x d with bias."""

    wq: Tensor
    bq: Tensor
    wk: Tensor
    bk: Tensor
    wv: Tensor
    bv: Tensor
    wo: Tensor
    bo: Tensor
    n_heads: int = 8

    @property
    def dim(self) -> int:
        return self.wq.shape[0]


def init_attention(dim: int, n_heads: int, rng: np.random.Generator) -> AttentionParams:
    if dim % n_heads:
        raise ShapeError(f"model dim {dim} not divisible by {n_heads} heads")
    std = 1.0 / math.sqrt(dim)

    def w():
        return Tensor(rng.standard_normal((dim, dim)) * std, requires_grad=True)

    def b():
        return Tensor(np.zeros(dim), requires_grad=True)

    return AttentionParams(wq=w(), bq=b(), wk=w(), bk=b(), wv=w(), bv=b(),
                           wo=w(), bo=b(), n_heads=n_heads)


def _split_heads(x: Tensor, n_heads: int) -> Tensor:
    b, t, d = x.shape
    return ops.transpose(ops.reshape(x, (b, t, n_heads, d // n_heads)), (0, 2, 1, 3))


def _merge_heads(x: Tensor) -> Tensor:
    b, h, t, hd = x.shape
    return ops.reshape(ops.transpose(x, (0, 2, 1, 3)), (b, t, h * hd))


def mha(q_tokens: Tensor, k_tokens: Tensor, v_tokens: Tensor,
        params: AttentionParams, return_weights: bool = False):
    """Attend queries over keys/values; output count equals query count."""
    batched = q_tokens.ndim == 3
    if not batched:
        q_tokens = ops.reshape(q_tokens, (1,) + q_tokens.shape)
        k_tokens = ops.reshape(k_tokens, (1,) + k_tokens.shape)
        v_tokens = ops.reshape(v_tokens, (1,) + v_tokens.shape)
    d = params.dim
    for name, t in (("query", q_tokens), ("key", k_tokens), ("value", v_tokens)):
        if t.ndim != 3 or t.shape[-1] != d:
            raise ShapeError(f"{name} tokens must be (B, T, {d}), got {t.shape}")
    if k_tokens.shape[1] != v_tokens.shape[1]:
        raise ShapeError("key and value token counts differ")
    if k_tokens.shape[1] == 0:
        raise InputError("attention requires at least one key/value token")

    h = params.n_heads
    q = _split_heads(ops.add(ops.matmul(q_tokens, params.wq), params.bq), h)
    k = _split_heads(ops.add(ops.matmul(k_tokens, params.wk), params.bk), h)
    v = _split_heads(ops.add(ops.matmul(v_tokens, params.wv), params.bv), h)
    scale = 1.0 / math.sqrt(d // h)
    scores = ops.mul(ops.matmul(q, ops.transpose(k, (0, 1, 3, 2))), scale)
    weights = ops.softmax(scores, axis=-1)
    mixed = _merge_heads(ops.matmul(weights, v))
    out = ops.add(ops.matmul(mixed, params.wo), params.bo)
    if not batched:
        out = ops.reshape(out, out.shape[1:])
    if return_weights:
        return out, weights.data
    return out


def cross_attention_layer(video_tokens: Tensor, audio_tokens: Tensor,
                          params: AttentionParams) -> Tensor:
    """Queries from video tokens, keys and values from audio tokens."""
    t_axis = 1 if audio_tokens.ndim == 3 else 0
    if audio_tokens.shape[t_axis] == 0:
        raise InputError("cross-attention needs a non-empty audio sequence")
    return mha(video_tokens, audio_tokens, audio_tokens, params)
