"""Knowledge distillation loss.

loss = lambda * CE(softmax(Z_s), y)
     + (1 - lambda) * KL(softmax(Z_s) || softmax(Z_t / tau))

The temperature divides the teacher logits only. The KL argument order
follows the loss definition literally, KL(student || teacher); the
conventional direction KL(teacher || student) is available behind the
``direction`` switch. No tau^2 gradient rescaling is applied.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..numerics import Tensor, ops

DIRECTIONS = ("student-to-teacher", "teacher-to-student")


@dataclass
class KdConfig:
    """Balance, temperature, and the frozen teacher to distill from."""

    lam: float = 0.5
    tau: float = 2.5
    teacher_checkpoint: str | None = None
    direction: str = "student-to-teacher"

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigError(f"lambda must be in [0, 1], got {self.lam}")
        if self.tau <= 0.0:
            raise ConfigError(f"temperature must be positive, got {self.tau}")
        if self.direction not in DIRECTIONS:
            raise ConfigError(f"direction must be one of {DIRECTIONS}, got {self.direction!r}")


def kd_loss(student_logits: Tensor, teacher_logits, labels, cfg: KdConfig) -> Tensor:
    """Scalar distillation loss over a batch of logits."""
    teacher = teacher_logits.data if isinstance(teacher_logits, Tensor) \
        else np.asarray(teacher_logits)
    if student_logits.shape != teacher.shape:
        raise ConfigError(
            f"student {student_logits.shape} and teacher {teacher.shape} logits differ")
    ce = ops.cross_entropy(student_logits, labels)
    if cfg.lam == 1.0:
        return ce

    log_p = ops.log_softmax(student_logits, axis=-1)
    soft_teacher = Tensor(teacher / cfg.tau)              # constant: teacher is frozen
    log_q = ops.log_softmax(soft_teacher, axis=-1)
    if cfg.direction == "student-to-teacher":
        p = ops.softmax(student_logits, axis=-1)
        kl_rows = ops.mul(p, log_p - log_q).sum(axis=1)
    else:
        q = ops.softmax(soft_teacher, axis=-1)
        kl_rows = ops.mul(q, log_q - log_p).sum(axis=1)
    kl = kl_rows.mean()
    return ops.mul(ce, cfg.lam) + ops.mul(kl, 1.0 - cfg.lam)
