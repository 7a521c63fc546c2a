"""Knowledge distillation: KD loss, reference teachers, distill steps."""
from .kd import DIRECTIONS, KdConfig, kd_loss
from .teachers import (AudioConvTeacher, TEACHER_KINDS, TeacherConfig,
                       VideoSep3dTeacher, build_teacher, freeze, load_teacher,
                       save_teacher)
from .trainer import DistillBatch, distill_step

__all__ = [
    "AudioConvTeacher", "DIRECTIONS", "DistillBatch", "KdConfig",
    "TEACHER_KINDS", "TeacherConfig", "VideoSep3dTeacher", "build_teacher",
    "distill_step", "freeze", "kd_loss", "load_teacher", "save_teacher",
]
