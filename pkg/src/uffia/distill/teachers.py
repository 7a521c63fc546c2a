"""Reference teacher models over full-resolution inputs.

These are small, freshly trained stand-ins for the published pretrained
encoders: a plain conv stack over the uncompressed mel spectrogram for
audio, and a separable 3-D network (spatial 1x3x3 then temporal 3x1x1
convolutions per block) over all native frames for video. Teachers are
frozen once trained and always emit 4 logits.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from ..numerics import Tensor, load_container, make_rng, ops, save_container
from ..params import load_into, named_tensors

TEACHER_KINDS = ("audio-conv", "video-sep3d")
TEACHER_INIT_STREAM = 17


@dataclass
class TeacherConfig:
    kind: str
    n_classes: int = 4
    mel_frames: int = 128            # audio teacher input contract
    mel_bins: int = 128
    audio_channels: tuple = (8, 16, 32, 64)
    native_frames: int = 16          # video teacher input contract
    image_size: int = 64
    video_channels: tuple = (4, 8, 16)
    hidden: int = 64

    def to_dict(self):
        d = dict(self.__dict__)
        d["audio_channels"] = list(self.audio_channels)
        d["video_channels"] = list(self.video_channels)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["audio_channels"] = tuple(d.get("audio_channels", (8, 16, 32, 64)))
        d["video_channels"] = tuple(d.get("video_channels", (4, 8, 16)))
        return cls(**d)


def _conv_param(rng, c_out, c_in, kh, kw):
    std = 1.0 / np.sqrt(c_in * kh * kw)
    return (Tensor(rng.standard_normal((c_out, c_in, kh, kw)) * std, requires_grad=True),
            Tensor(np.zeros(c_out), requires_grad=True))


class AudioConvTeacher:
    """Conv stack over the full 128x128 mel, global pooling, MLP head."""

    kind = "audio-conv"

    def __init__(self, cfg: TeacherConfig, seed: int = 0):
        if cfg.kind != self.kind:
            raise ContractError(f"config kind {cfg.kind!r} does not match {self.kind}")
        self.cfg = cfg
        rng = make_rng(seed, TEACHER_INIT_STREAM)
        self.blocks = []
        c_in = 1
        for c_out in cfg.audio_channels:
            self.blocks.append(_conv_param(rng, c_out, c_in, 3, 3))
            c_in = c_out
        self.w1 = Tensor(rng.standard_normal((c_in, cfg.hidden)) / np.sqrt(c_in),
                         requires_grad=True)
        self.b1 = Tensor(np.zeros(cfg.hidden), requires_grad=True)
        self.w2 = Tensor(rng.standard_normal((cfg.hidden, cfg.n_classes))
                         / np.sqrt(cfg.hidden), requires_grad=True)
        self.b2 = Tensor(np.zeros(cfg.n_classes), requires_grad=True)

    def params(self):
        return named_tensors({"blocks": self.blocks, "w1": self.w1, "b1": self.b1,
                              "w2": self.w2, "b2": self.b2})

    def forward(self, mel_batch) -> Tensor:
        mel = mel_batch if isinstance(mel_batch, Tensor) else Tensor(mel_batch)
        b, t, m = mel.shape
        if t != self.cfg.mel_frames:
            raise ContractError(
                f"teacher expects the uncompressed {self.cfg.mel_frames}-frame mel, got {t}")
        x = ops.reshape(mel, (b, 1, t, m))
        for w, bias in self.blocks:
            x = ops.relu(ops.conv2d(x, w, bias, pad_mode="edge"))
            x = ops.max_pool2d(x, (2, 2))
        x = ops.mean(x, axis=3)                                  # over frequency
        pooled = ops.add(ops.amax(x, axis=2), ops.mean(x, axis=2))
        hidden = ops.relu(ops.add(ops.matmul(
            ops.reshape(pooled, (b, 1, pooled.shape[1])), self.w1), self.b1))
        logits = ops.add(ops.matmul(hidden, self.w2), self.b2)
        return ops.reshape(logits, (b, self.cfg.n_classes))


class VideoSep3dTeacher:
    """Separable 3-D conv net over all native frames."""

    kind = "video-sep3d"

    def __init__(self, cfg: TeacherConfig, seed: int = 0):
        if cfg.kind != self.kind:
            raise ContractError(f"config kind {cfg.kind!r} does not match {self.kind}")
        self.cfg = cfg
        rng = make_rng(seed, TEACHER_INIT_STREAM + 1)
        self.blocks = []
        c_in = 3
        for c_out in cfg.video_channels:
            spatial = _conv_param(rng, c_out, c_in, 3, 3)
            temporal = _conv_param(rng, c_out, c_out, 3, 1)
            self.blocks.append((spatial, temporal))
            c_in = c_out
        self.w = Tensor(rng.standard_normal((c_in, cfg.n_classes)) / np.sqrt(c_in),
                        requires_grad=True)
        self.b = Tensor(np.zeros(cfg.n_classes), requires_grad=True)

    def params(self):
        return named_tensors({"blocks": self.blocks, "w": self.w, "b": self.b})

    def forward(self, frames_batch) -> Tensor:
        frames = frames_batch if isinstance(frames_batch, Tensor) else Tensor(frames_batch)
        b, n_f, c, h, w = frames.shape
        if n_f != self.cfg.native_frames:
            raise ContractError(
                f"teacher expects all {self.cfg.native_frames} native frames, got {n_f}")
        x = frames
        for (sw, sb), (tw, tb) in self.blocks:
            ch = x.shape[2]
            hh, ww = x.shape[3], x.shape[4]
            # spatial 1x3x3: fold time into the batch axis
            flat = ops.reshape(x, (b * n_f, ch, hh, ww))
            flat = ops.relu(ops.conv2d(flat, sw, sb, pad_mode="edge"))
            c_out = flat.shape[1]
            # temporal 3x1x1: treat time as the conv height, pixels as width
            x = ops.reshape(flat, (b, n_f, c_out, hh, ww))
            x = ops.transpose(x, (0, 2, 1, 3, 4))
            x = ops.reshape(x, (b, c_out, n_f, hh * ww))
            x = ops.relu(ops.conv2d(x, tw, tb, pad_mode="edge"))
            x = ops.reshape(x, (b, c_out, n_f, hh, ww))
            x = ops.transpose(x, (0, 2, 1, 3, 4))
            # spatial pooling
            flat = ops.reshape(x, (b * n_f, c_out, hh, ww))
            flat = ops.max_pool2d(flat, (2, 2))
            x = ops.reshape(flat, (b, n_f, c_out, hh // 2, ww // 2))
        # global average over time and space
        pooled = ops.mean(ops.mean(ops.mean(x, axis=4), axis=3), axis=1)   # (B, C)
        logits = ops.add(ops.matmul(
            ops.reshape(pooled, (b, 1, pooled.shape[1])), self.w), self.b)
        return ops.reshape(logits, (b, self.cfg.n_classes))


def build_teacher(cfg: TeacherConfig, seed: int = 0):
    if cfg.kind == "audio-conv":
        return AudioConvTeacher(cfg, seed)
    if cfg.kind == "video-sep3d":
        return VideoSep3dTeacher(cfg, seed)
    raise ContractError(f"unknown teacher kind {cfg.kind!r}; choose from {TEACHER_KINDS}")


def freeze(teacher) -> None:
    """Mark every teacher parameter non-trainable; grads no longer flow."""
    for t in teacher.params().values():
        t.requires_grad = False
        t.grad = None


def save_teacher(path, teacher) -> None:
    save_container(path, {k: v.data for k, v in teacher.params().items()},
                   kind="teacher", meta={"teacher": teacher.cfg.to_dict()})


def load_teacher(path):
    arrays, header = load_container(path, expect_kind="teacher")
    cfg = TeacherConfig.from_dict(header["meta"]["teacher"])
    teacher = build_teacher(cfg)
    params = teacher.params()
    for name, tensor in params.items():
        tensor.data = arrays[name].astype(tensor.data.dtype)
    freeze(teacher)
    return teacher
