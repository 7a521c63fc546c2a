"""Seeded end-to-end training with best-validation checkpointing.

One training step consumes the run's Philox stream in a fixed order
(shuffle, branch draw, feature noise, SpecAugment, frame sampling), so a
(config, seed) pair fully determines the run in single-thread mode.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..distill import kd_loss, load_teacher
from ..errors import ConfigError, TrainingDiverged
from ..model import ModelConfig, build_model, draw_mode
from ..numerics import (AdamState, adam_step, backward, make_rng, no_grad, ops,
                        save_container, set_default_dtype, load_container)
from ..params import load_into
from .config import RunConfig, build_dataset
from .counting import count_flops, count_params
from .evaluate import evaluate
from .features import (FeatureCache, assemble_audio, assemble_teacher_video,
                       assemble_video)
from .reports import write_metrics_csv, write_run_json

TRAIN_STREAM = 101


@dataclass
class MetricsLog:
    epoch_rows: list = field(default_factory=list)
    best_epoch: int = 0
    best_val_accuracy: float = 0.0
    final_test_accuracy: float | None = None
    wall_clock_s: float = 0.0
    parameter_count: int = 0
    flops_estimate: int = 0


@dataclass
class TrainResult:
    model: object
    metrics: MetricsLog
    checkpoint_path: str | None
    out_dir: str | None


def _eval_mode_for(config: RunConfig) -> str:
    if config.model_kind == "audio-baseline":
        return "A"
    if config.model_kind == "video-baseline":
        return "V"
    if config.model_kind == "uffia" and config.train.mode in ("A", "V", "AV"):
        return config.train.mode
    return config.eval.mode


def save_model_checkpoint(path, model, config: RunConfig | None = None) -> None:
    meta = {"model_kind": model.kind, "model_config": model.cfg.to_dict()}
    if config is not None:
        meta["run_config"] = config.to_dict()
    save_container(path, {k: v.data for k, v in model.params().items()},
                   kind="checkpoint", meta=meta)


def load_model_checkpoint(path, seed: int = 0):
    arrays, header = load_container(path, expect_kind="checkpoint")
    meta = header["meta"]
    cfg = ModelConfig.from_dict(meta["model_config"])
    model = build_model(meta["model_kind"], cfg, seed)
    params = model.params()
    for name, tensor in params.items():
        tensor.data = arrays[name].astype(tensor.data.dtype)
    return model


def train(config: RunConfig, out_dir: str | None = None,
          cache: FeatureCache | None = None) -> TrainResult:
    """Run the configured experiment; returns the best-validation model.

    Aborts with :class:`TrainingDiverged` if the loss goes non-finite.
    Writes metrics.csv, run.json and checkpoint.bin under ``out_dir``
    when given.
    """
    t_start = time.time()
    set_default_dtype(config.train.precision)
    dataset = build_dataset(config.data, config.model)
    if cache is None:
        cache = FeatureCache(dataset, config.model)
    model = build_model(config.model_kind, config.model, config.seed)
    state = AdamState(learning_rate=config.train.lr)
    rng = make_rng(config.seed, TRAIN_STREAM)

    teacher = None
    if config.kd is not None:
        if not config.kd.teacher_checkpoint:
            raise ConfigError("kd.teacher_checkpoint is required for distillation runs")
        teacher = load_teacher(config.kd.teacher_checkpoint)
        expected = {"A": "audio-conv", "V": "video-sep3d"}[config.train.mode]
        if teacher.kind != expected:
            raise ConfigError(f"teacher kind {teacher.kind!r} does not match "
                              f"student mode {config.train.mode!r}")

    train_idx = dataset.indices("train")
    val_idx = dataset.indices("val")
    test_idx = dataset.indices("test")
    eval_mode = _eval_mode_for(config)

    metrics = MetricsLog(parameter_count=count_params(model),
                         flops_estimate=count_flops(model, mode=eval_mode))
    best_params: dict[str, np.ndarray] | None = None

    for epoch in range(1, config.train.epochs + 1):
        order = rng.permutation(len(train_idx))
        losses = []
        for start in range(0, len(order), config.train.batch_size):
            chunk = [train_idx[i] for i in order[start:start + config.train.batch_size]]
            labels = np.array([cache.label(i) for i in chunk])
            if config.model_kind == "uffia" and config.train.mode == "mixed":
                mode = draw_mode(config.dropout, rng)
            else:
                mode = _eval_mode_for(config)

            audio = video = None
            if mode in ("A", "AV"):
                audio = assemble_audio(cache, chunk, augment=config.augment, rng=rng)
            if mode in ("V", "AV"):
                video = assemble_video(cache, chunk, config.model.n_frames, rng=rng,
                                       patch=config.model.patch_size)

            out = model.forward(audio_mel=audio, video_patches=video, mode=mode)
            if teacher is not None:
                with no_grad():
                    if config.train.mode == "A":
                        t_logits = teacher.forward(
                            np.stack([cache.mel_full(i) for i in chunk]))
                    else:
                        t_logits = teacher.forward(assemble_teacher_video(cache, chunk))
                loss = kd_loss(out.logits, t_logits, labels, config.kd)
            else:
                loss = ops.cross_entropy(out.logits, labels)
            value = loss.item()
            if not math.isfinite(value):
                raise TrainingDiverged(
                    f"loss became {value} at epoch {epoch}; aborting the run")
            losses.append(value)
            backward(loss)
            adam_step(model.params(), state)

        val_acc = evaluate(model, cache, val_idx, eval_mode,
                           batch_size=config.train.batch_size,
                           eval_seed=config.seed)
        metrics.epoch_rows.append({"epoch": epoch,
                                   "train_loss": float(np.mean(losses)),
                                   "val_accuracy": val_acc})
        if val_acc > metrics.best_val_accuracy or best_params is None:
            metrics.best_val_accuracy = val_acc
            metrics.best_epoch = epoch
            best_params = {k: v.data.copy() for k, v in model.params().items()}
        target = config.train.stop_at_val_accuracy
        if target is not None and val_acc >= target:
            break

    if best_params is not None:
        for name, tensor in model.params().items():
            tensor.data = best_params[name]
    metrics.final_test_accuracy = evaluate(model, cache, test_idx, eval_mode,
                                           batch_size=config.train.batch_size,
                                           eval_seed=config.seed)
    metrics.wall_clock_s = time.time() - t_start

    checkpoint_path = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        checkpoint_path = str(out / "checkpoint.bin")
        save_model_checkpoint(checkpoint_path, model, config)
        write_metrics_csv(out / "metrics.csv", metrics.epoch_rows,
                          metrics.final_test_accuracy)
        write_run_json(out / "run.json", config.to_dict(),
                       extra={"result": {
                           "best_epoch": metrics.best_epoch,
                           "best_val_accuracy": metrics.best_val_accuracy,
                           "final_test_accuracy": metrics.final_test_accuracy,
                           "wall_clock_s": metrics.wall_clock_s,
                           "parameter_count": metrics.parameter_count,
                           "flops_estimate": metrics.flops_estimate}})
    return TrainResult(model=model, metrics=metrics,
                       checkpoint_path=checkpoint_path,
                       out_dir=str(out_dir) if out_dir else None)


def train_teacher(kind: str, config: RunConfig, out_path,
                  cache: FeatureCache | None = None, epochs: int | None = None,
                  stop_at_val_accuracy: float | None = 0.99):
    """Supervised training of a reference teacher on full-resolution inputs."""
    from ..distill import TeacherConfig, build_teacher, freeze, save_teacher

    set_default_dtype(config.train.precision)
    dataset = build_dataset(config.data, config.model)
    if cache is None:
        cache = FeatureCache(dataset, config.model)
    tc = TeacherConfig(kind=kind, mel_frames=config.model.mel_frames,
                       mel_bins=config.model.mel_bins,
                       native_frames=config.model.native_frames,
                       image_size=config.model.image_size)
    teacher = build_teacher(tc, seed=config.seed)
    state = AdamState(learning_rate=config.train.lr)
    rng = make_rng(config.seed, TRAIN_STREAM + 7)
    train_idx = dataset.indices("train")
    val_idx = dataset.indices("val")

    def batch_logits(chunk, training):
        if kind == "audio-conv":
            return teacher.forward(np.stack([cache.mel_full(i) for i in chunk]))
        return teacher.forward(assemble_teacher_video(cache, chunk))

    best_acc, best_params = -1.0, None
    for epoch in range(1, (epochs or config.train.epochs) + 1):
        order = rng.permutation(len(train_idx))
        for start in range(0, len(order), config.train.batch_size):
            chunk = [train_idx[i] for i in order[start:start + config.train.batch_size]]
            labels = np.array([cache.label(i) for i in chunk])
            loss = ops.cross_entropy(batch_logits(chunk, True), labels)
            if not math.isfinite(loss.item()):
                raise TrainingDiverged(f"teacher loss diverged at epoch {epoch}")
            backward(loss)
            adam_step(teacher.params(), state)
        correct = 0
        for start in range(0, len(val_idx), config.train.batch_size):
            chunk = val_idx[start:start + config.train.batch_size]
            labels = np.array([cache.label(i) for i in chunk])
            with no_grad():
                logits = batch_logits(chunk, False)
            correct += int((np.argmax(logits.data, axis=1) == labels).sum())
        acc = correct / len(val_idx)
        if acc > best_acc:
            best_acc = acc
            best_params = {k: v.data.copy() for k, v in teacher.params().items()}
        if stop_at_val_accuracy is not None and acc >= stop_at_val_accuracy:
            break
    for name, tensor in teacher.params().items():
        tensor.data = best_params[name]
    freeze(teacher)
    save_teacher(out_path, teacher)
    return teacher, best_acc
