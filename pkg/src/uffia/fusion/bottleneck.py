"""Bottleneck-token fusion: cross-modal flow only through shared tokens.

One fusion layer runs two transformer layers. The first processes the
video tokens concatenated with the bottleneck tokens (parameters theta_v)
and yields updated video tokens plus an intermediate bottleneck. The
second processes the audio tokens concatenated with that intermediate
bottleneck (parameters theta_a) and yields updated audio tokens and the
final bottleneck. Audio and video never attend to each other directly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..numerics import Tensor, ops
from .encoder import EncoderLayerParams, encoder_layer, init_encoder_layer


@dataclass
class BottleneckTokens:
    """B learnable fused tokens of the model width."""

    tokens: Tensor

    @property
    def count(self) -> int:
        return self.tokens.shape[0]


def init_bottleneck(n_tokens: int, dim: int, rng) -> BottleneckTokens:
    if n_tokens < 1:
        raise ConfigError(f"bottleneck needs at least one token, got {n_tokens}")
    return BottleneckTokens(
        tokens=Tensor(rng.standard_normal((n_tokens, dim)) * 0.02, requires_grad=True))


def fuse_half(tokens: Tensor, bottleneck: Tensor,
              layer: EncoderLayerParams) -> tuple[Tensor, Tensor]:
    """Transformer layer over [tokens || bottleneck]; split the result back."""
    n = tokens.shape[-2]
    joint = ops.concat([tokens, bottleneck], axis=tokens.ndim - 2)
    out = encoder_layer(joint, layer)
    if tokens.ndim == 3:
        return out[:, :n, :], out[:, n:, :]
    return out[:n, :], out[n:, :]


def bottleneck_fusion_layer(z_v: Tensor, z_a: Tensor, z_f: Tensor,
                            params_v: EncoderLayerParams,
                            params_a: EncoderLayerParams):
    """Returns (z_v', z_a', z_f'): video half first, audio half second."""
    if z_f.shape[-2] == 0:
        raise ConfigError("bottleneck fusion needs a non-empty bottleneck")
    z_v_next, z_f_mid = fuse_half(z_v, z_f, params_v)
    z_a_next, z_f_next = fuse_half(z_a, z_f_mid, params_a)
    return z_v_next, z_a_next, z_f_next
