"""Parameter and FLOPs accounting.

Convention, declared in every report: one multiply-accumulate counts as 2
FLOPs; attention is counted as its Q/K/V projections, the QK^T scores,
the weighted value sum, and the output projection; softmax and
normalization cost 5 FLOPs per element; activations, pooling, residual
adds and scales cost 1 FLOP per element. Absolute totals are only
comparable under this same convention; orderings and ratios are the
meaningful outputs.
"""
from __future__ import annotations

import math

from ..errors import FlopsError
from ..model import ModelConfig

FLOPS_CONVENTION = ("MAC=2; attention=QKV+scores+apply+output projection; "
                    "softmax/norm=5 per element; activations/pool/residual=1 per element")


def count_params(model) -> int:
    """Total extents of trainable tensors (frozen teachers count zero)."""
    return sum(t.size for t in model.params().values() if t.requires_grad)


# -- closed-form component formulas -------------------------------------------

def _linear(rows: int, d_in: int, d_out: int) -> int:
    return rows * d_in * d_out * 2 + rows * d_out


def _norm(rows: int, d: int) -> int:
    return 5 * rows * d


def _attention(t_q: int, t_kv: int, d: int, heads: int) -> int:
    total = _linear(t_q, d, d) + 2 * _linear(t_kv, d, d) + _linear(t_q, d, d)
    total += t_q * t_kv * d * 2          # QK^T scores across heads
    total += heads * t_q * t_kv          # scale
    total += 5 * heads * t_q * t_kv      # softmax
    total += t_q * t_kv * d * 2          # weighted value sum
    return total


def _ffn(rows: int, d: int, hidden: int) -> int:
    return _linear(rows, d, hidden) + rows * hidden + _linear(rows, hidden, d)


def _encoder_layer(tokens: int, d: int, heads: int, ffn_dim: int) -> int:
    total = _norm(tokens, d) + _attention(tokens, tokens, d, heads) + tokens * d
    total += _norm(tokens, d) + _ffn(tokens, d, ffn_dim) + tokens * d
    return total


def _head(d: int, hidden: int, n_classes: int) -> int:
    return _linear(1, d, hidden) + hidden + _linear(1, hidden, n_classes)


def _audio_conv(cfg: ModelConfig, mel_frames: int) -> int:
    """Conv stack over (mel_frames x mel_bins); scales linearly in frames."""
    total = 0
    c_in, t, f = 1, mel_frames, cfg.mel_bins
    for c_out, tp, fp in zip(cfg.audio_channels, cfg.audio_time_pools,
                             cfg.audio_freq_pools):
        elems = t * f * c_out
        total += elems * c_in * 9 * 2    # 3x3 convolution
        total += elems                   # bias
        total += elems                   # relu
        total += elems                   # pooling visitations
        t, f, c_in = t // tp, f // fp, c_out
    total += t * f * c_in                # frequency average
    total += 2 * t * c_in                # window max+mean over time
    return total


def _audio_mlp(cfg: ModelConfig) -> int:
    rows = cfg.t_audio
    total = _linear(rows, cfg.audio_channels[-1], cfg.audio_mlp_hidden)
    total += rows * cfg.audio_mlp_hidden
    total += _linear(rows, cfg.audio_mlp_hidden, cfg.dim)
    return total


def default_shapes(cfg: ModelConfig) -> dict:
    return {"mel_frames": cfg.compressed_frames, "mel_bins": cfg.mel_bins,
            "sampled_frames": cfg.n_frames, "native_frames": cfg.native_frames,
            "image_size": cfg.image_size}


def flops_breakdown(model, input_shapes: dict | None = None,
                    mode: str = "AV") -> dict[str, int]:
    """Per-component FLOPs for one clip; keys depend on the model kind."""
    cfg: ModelConfig = model.cfg
    kind = model.kind
    shapes = default_shapes(cfg)
    if input_shapes:
        unknown = set(input_shapes) - set(shapes)
        if unknown:
            raise FlopsError(f"unknown input shape keys: {sorted(unknown)}")
        shapes.update(input_shapes)

    d, heads, ffn = cfg.dim, cfg.n_heads, cfg.ffn_dim
    grid = shapes["image_size"] // cfg.patch_size
    n_patches = grid * grid
    patch_dim = 3 * cfg.patch_size ** 2
    mel_patches = (shapes["mel_frames"] // cfg.patch_size) * \
        (shapes["mel_bins"] // cfg.patch_size)

    if kind == "uffia":
        if mode not in ("A", "V", "AV"):
            raise FlopsError(f"unknown mode {mode!r} for uffia FLOPs")
        out = {}
        if mode in ("A", "AV"):
            out["audio_conv"] = _audio_conv(cfg, shapes["mel_frames"])
            out["audio_mlp"] = _audio_mlp(cfg)
        if mode == "A":
            tokens = cfg.t_audio + 1
            out["shared_encoder"] = (cfg.n_layers * _encoder_layer(tokens, d, heads, ffn)
                                     + _norm(tokens, d))
            out["head"] = _head(d, cfg.head_hidden, cfg.n_classes)
            return out
        n_f = shapes["sampled_frames"]
        tokens = n_patches + 1
        out["video_embed"] = n_f * (_linear(n_patches, patch_dim, d) + tokens * d)
        if mode == "AV":
            per_frame = (_norm(tokens, d) + _attention(tokens, tokens, d, heads)
                         + tokens * d
                         + _norm(tokens, d) + _norm(cfg.t_audio, d)
                         + _attention(tokens, cfg.t_audio, d, heads) + tokens * d)
            out["av_fusion"] = n_f * per_frame
        out["shared_encoder"] = n_f * (cfg.n_layers * _encoder_layer(tokens, d, heads, ffn)
                                       + _norm(tokens, d))
        out["temporal_pool"] = n_f * d
        out["head"] = _head(d, cfg.head_hidden, cfg.n_classes)
        return out

    if kind == "audio-baseline":
        tokens = cfg.t_audio + 1
        return {"audio_conv": _audio_conv(cfg, shapes["mel_frames"]),
                "audio_mlp": _audio_mlp(cfg),
                "encoder": (cfg.n_layers * _encoder_layer(tokens, d, heads, ffn)
                            + _norm(tokens, d)),
                "head": _head(d, cfg.head_hidden, cfg.n_classes)}

    if kind == "video-baseline":
        n_f = shapes["sampled_frames"]
        tokens = n_patches + 1
        return {"video_embed": n_f * (_linear(n_patches, patch_dim, d) + tokens * d),
                "encoder": n_f * (cfg.n_layers * _encoder_layer(tokens, d, heads, ffn)
                                  + _norm(tokens, d)),
                "temporal_pool": n_f * d,
                "head": _head(d, cfg.head_hidden, cfg.n_classes)}

    if kind in ("fusion-self", "fusion-cross", "fusion-bottleneck"):
        n_f = shapes["native_frames"]      # fusion baselines consume all frames
        n_video = n_f * n_patches
        embed = {"video_embed": _linear(n_video, patch_dim, d) + n_video * d,
                 "audio_embed": _linear(mel_patches, cfg.patch_size ** 2, d)
                 + mel_patches * d}
        head = _head(d, cfg.head_hidden, cfg.n_classes)
        if kind == "fusion-self":
            tokens = 1 + mel_patches + n_video
            return {**embed,
                    "encoder": (cfg.n_layers * _encoder_layer(tokens, d, heads, ffn)
                                + _norm(tokens, d)),
                    "head": head}
        if kind == "fusion-cross":
            t_q = 1 + n_video
            per_layer = (_norm(t_q, d) + _norm(mel_patches, d)
                         + _attention(t_q, mel_patches, d, heads) + t_q * d
                         + _norm(t_q, d) + _ffn(t_q, d, ffn) + t_q * d)
            return {**embed,
                    "cross_layers": cfg.n_layers * per_layer + _norm(t_q, d),
                    "head": head}
        t_v = 1 + n_video + cfg.bottleneck_tokens
        t_a = 1 + mel_patches + cfg.bottleneck_tokens
        per_layer = _encoder_layer(t_v, d, heads, ffn) + _encoder_layer(t_a, d, heads, ffn)
        return {**embed,
                "bottleneck_layers": cfg.n_layers * per_layer
                + _norm(t_v, d) + _norm(t_a, d),
                "head": head}

    raise FlopsError(f"no FLOPs formulas for model kind {kind!r}")


def count_flops(model, input_shapes: dict | None = None, mode: str = "AV") -> int:
    """Total FLOPs for one clip under the declared convention."""
    return sum(flops_breakdown(model, input_shapes, mode).values())
