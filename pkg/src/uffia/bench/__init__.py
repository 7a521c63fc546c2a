"""Training, evaluation, sweeps, and complexity accounting."""
from .config import (AugmentSettings, DataSettings, EvalCorruption,
                     EvalSettings, MODEL_KIND_NAMES, RunConfig, TrainSettings,
                     apply_override, build_dataset, load_config, parse_override)
from .counting import (FLOPS_CONVENTION, count_flops, count_params,
                       default_shapes, flops_breakdown)
from .evaluate import SWEEP_SNRS, evaluate, noise_sweep
from .features import (FeatureCache, assemble_audio, assemble_teacher_video,
                       assemble_video)
from .reports import (environment_fingerprint, write_metrics_csv,
                      write_run_json, write_sweep_csv)
from .train import (MetricsLog, TrainResult, load_model_checkpoint,
                    save_model_checkpoint, train, train_teacher)

__all__ = [
    "AugmentSettings", "DataSettings", "EvalCorruption", "EvalSettings",
    "FLOPS_CONVENTION", "FeatureCache", "MODEL_KIND_NAMES", "MetricsLog",
    "RunConfig", "SWEEP_SNRS", "TrainResult", "TrainSettings",
    "apply_override", "assemble_audio", "assemble_teacher_video",
    "assemble_video", "build_dataset", "count_flops", "count_params",
    "default_shapes", "environment_fingerprint", "evaluate",
    "flops_breakdown", "load_config", "load_model_checkpoint", "noise_sweep",
    "parse_override", "save_model_checkpoint", "train", "train_teacher",
    "write_metrics_csv", "write_run_json", "write_sweep_csv",
]
