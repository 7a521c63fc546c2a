"""One distillation step: teacher soft targets into a single-mode student."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..numerics import AdamState, adam_step, backward, no_grad
from .kd import KdConfig, kd_loss

_MODE_FOR_TEACHER = {"audio-conv": "A", "video-sep3d": "V"}


@dataclass
class DistillBatch:
    """Student inputs are reduced (compressed mel / sampled frames);
    teacher inputs are full resolution (uncompressed mel / all frames)."""

    labels: np.ndarray
    student_audio: np.ndarray | None = None
    student_video: np.ndarray | None = None
    teacher_audio: np.ndarray | None = None
    teacher_video: np.ndarray | None = None


def distill_step(student, teacher, batch: DistillBatch, cfg: KdConfig,
                 state: AdamState, mode: str) -> float:
    """Forward both, apply the KD loss, update the student only."""
    if mode not in ("A", "V"):
        raise ConfigError(f"distillation trains single-mode students, got mode {mode!r}")
    if _MODE_FOR_TEACHER.get(teacher.kind) != mode:
        raise ConfigError(
            f"teacher kind {teacher.kind!r} does not match student mode {mode!r}")
    with no_grad():
        if mode == "A":
            teacher_logits = teacher.forward(batch.teacher_audio)
        else:
            teacher_logits = teacher.forward(batch.teacher_video)
    out = student.forward(audio_mel=batch.student_audio,
                          video_patches=batch.student_video, mode=mode)
    loss = kd_loss(out.logits, teacher_logits, batch.labels, cfg)
    backward(loss)
    adam_step(student.params(), state)
    return loss.item()
