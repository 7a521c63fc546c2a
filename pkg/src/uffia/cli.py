"""Command-line entry point.

Verbs: synth, manifest, preprocess, train, distill, eval, sweep, flops.
Exit status: 0 success, 1 domain error, 2 usage error. ``--threads 1``
pins the BLAS thread pools before numpy loads (single-thread verification
mode); UFFIA_DATA_ROOT supplies the default dataset root.

Heavy imports happen inside main() so thread pinning can precede them.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS")


def _pin_threads(argv) -> None:
    if "--threads" in argv:
        i = argv.index("--threads")
        if i + 1 < len(argv):
            for var in _THREAD_VARS:
                os.environ[var] = argv[i + 1]


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="JSON run config (or an echoed run.json)")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="dotted-path config override, repeatable")
    parser.add_argument("--out", default="runs/latest", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--threads", type=int, default=None,
                        help="thread budget; 1 selects verification mode")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uffia",
                                     description="Mixed-modality feeding intensity benchmark")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset on disk")
    _common_flags(p)
    p.add_argument("--png", action="store_true", help="write PNG frame directories "
                   "instead of packed containers")

    p = sub.add_parser("manifest", help="scan class-named folders into a manifest")
    _common_flags(p)
    p.add_argument("--root", default=None, help="dataset root (default UFFIA_DATA_ROOT)")
    p.add_argument("--split", default=None, metavar="TRAIN,VAL,TEST",
                   help="re-tag splits stratified by class, e.g. 0.7,0.1,0.2")

    p = sub.add_parser("preprocess", help="cache mel features for a manifest dataset")
    _common_flags(p)

    p = sub.add_parser("train", help="train a model end to end")
    _common_flags(p)

    p = sub.add_parser("distill", help="distill a single-mode student from a teacher")
    _common_flags(p)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    _common_flags(p)
    p.add_argument("--checkpoint", required=True)

    p = sub.add_parser("sweep", help="noise-robustness SNR sweep of a checkpoint")
    _common_flags(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--snrs", default="-10,-5,0,10,20")
    p.add_argument("--noise-kind", default="bubble", choices=["bubble", "pump", "white"])

    p = sub.add_parser("flops", help="parameter and FLOPs accounting")
    _common_flags(p)
    return parser


def _resolve_config(args):
    from .bench import load_config
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    return load_config(args.config, overrides)


def _data_root() -> Path:
    return Path(os.environ.get("UFFIA_DATA_ROOT", "."))


def cmd_synth(args) -> int:
    from .bench import build_dataset, write_run_json
    from .data import CLASS_NAMES, export_clip, write_manifest

    config = _resolve_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dataset = build_dataset(config.data, config.model)
    records = []
    for i in range(len(dataset)):
        clip = dataset.load(i)
        audio, video = export_clip(clip, out / CLASS_NAMES[clip.label],
                                   packed=not args.png)
        clip.audio_path, clip.video_path = audio, video
        records.append(clip)
    write_manifest(records, out / "manifest.csv")
    write_run_json(out / "run.json", config.to_dict(),
                   extra={"result": {"clips": len(records)}}, threads=args.threads)
    print(f"wrote {len(records)} clips and manifest.csv under {out}")
    return 0


def cmd_manifest(args) -> int:
    from .data import make_splits, scan_class_directories, write_manifest

    root = Path(args.root) if args.root else _data_root()
    records = scan_class_directories(root)
    if args.split:
        fractions = tuple(float(x) for x in args.split.split(","))
        seed = args.seed if args.seed is not None else 0
        records = make_splits(records, fractions, seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(records, out / "manifest.csv")
    print(f"wrote manifest with {len(records)} records to {out / 'manifest.csv'}")
    return 0


def cmd_preprocess(args) -> int:
    from .bench import FeatureCache, build_dataset, write_run_json
    from .numerics import save_container

    config = _resolve_config(args)
    dataset = build_dataset(config.data, config.model)
    cache = FeatureCache(dataset, config.model)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(len(dataset)):
        mel = cache.mel(i)
        save_container(out / f"mel_{i:06d}.bin", {"mel": mel}, kind="mel-cache",
                       meta={"index": i, "label": cache.label(i),
                             "compression": config.model.simpf_k})
    write_run_json(out / "run.json", config.to_dict(),
                   extra={"result": {"clips": len(dataset)}}, threads=args.threads)
    print(f"cached {len(dataset)} mel features under {out}")
    return 0


def cmd_train(args) -> int:
    from .bench import train

    config = _resolve_config(args)
    result = train(config, out_dir=args.out)
    m = result.metrics
    print(f"best val {m.best_val_accuracy:.3f} (epoch {m.best_epoch}); "
          f"test {m.final_test_accuracy:.3f}; checkpoint {result.checkpoint_path}")
    return 0


def cmd_distill(args) -> int:
    from .bench import train, train_teacher
    from .errors import ConfigError

    config = _resolve_config(args)
    if config.kd is None:
        raise ConfigError("distill requires a kd section (kd.lam, kd.tau, "
                          "kd.teacher_checkpoint)")
    teacher_kind = {"A": "audio-conv", "V": "video-sep3d"}[config.train.mode]
    teacher_path = config.kd.teacher_checkpoint or str(Path(args.out) / "teacher.bin")
    if not Path(teacher_path).exists():
        print(f"teacher checkpoint {teacher_path} missing; training a "
              f"{teacher_kind} teacher first")
        Path(teacher_path).parent.mkdir(parents=True, exist_ok=True)
        _, acc = train_teacher(teacher_kind, config, teacher_path)
        print(f"teacher ready (val accuracy {acc:.3f})")
    config.kd.teacher_checkpoint = teacher_path
    result = train(config, out_dir=args.out)
    m = result.metrics
    print(f"distilled student: best val {m.best_val_accuracy:.3f}; "
          f"test {m.final_test_accuracy:.3f}")
    return 0


def cmd_eval(args) -> int:
    from .bench import (FeatureCache, build_dataset, evaluate,
                        load_model_checkpoint, write_run_json)

    config = _resolve_config(args)
    model = load_model_checkpoint(args.checkpoint)
    dataset = build_dataset(config.data, model.cfg)
    cache = FeatureCache(dataset, model.cfg)
    acc = evaluate(model, cache, dataset.indices("test"), config.eval.mode,
                   corruption=config.eval.corruption,
                   batch_size=config.train.batch_size, eval_seed=config.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_run_json(out / "run.json", config.to_dict(),
                   extra={"result": {"accuracy": acc,
                                     "checkpoint": args.checkpoint}},
                   threads=args.threads)
    print(f"accuracy {acc:.4f} ({config.eval.mode} mode)")
    return 0


def cmd_sweep(args) -> int:
    from .bench import (FeatureCache, build_dataset, load_model_checkpoint,
                        noise_sweep, write_run_json, write_sweep_csv)

    config = _resolve_config(args)
    snrs = [float(x) for x in args.snrs.split(",")]
    model = load_model_checkpoint(args.checkpoint)
    dataset = build_dataset(config.data, model.cfg)
    cache = FeatureCache(dataset, model.cfg)
    rows = noise_sweep(model, cache, dataset.indices("test"), config.eval.mode,
                       snrs=snrs, noise_kind=args.noise_kind,
                       base_corruption=config.eval.corruption,
                       batch_size=config.train.batch_size, eval_seed=config.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(out / "sweep.csv", rows)
    write_run_json(out / "run.json", config.to_dict(),
                   extra={"result": {"sweep": [{"snr_db": s, "accuracy": a}
                                               for s, a in rows],
                                     "noise_kind": args.noise_kind,
                                     "checkpoint": args.checkpoint}},
                   threads=args.threads)
    for snr, acc in rows:
        print(f"SNR {snr:+.0f} dB: accuracy {acc:.4f}")
    return 0


def cmd_flops(args) -> int:
    from .bench import FLOPS_CONVENTION, count_flops, count_params, write_run_json
    from .model import build_model

    config = _resolve_config(args)
    model = build_model(config.model_kind, config.model, config.seed)
    report = {"convention": FLOPS_CONVENTION,
              "model_kind": config.model_kind,
              "parameters": count_params(model)}
    if config.model_kind == "uffia":
        for mode in ("A", "V", "AV"):
            report[f"flops_{mode}"] = count_flops(model, mode=mode)
    else:
        report["flops"] = count_flops(model)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_run_json(out / "run.json", config.to_dict(), extra={"result": report},
                   threads=args.threads)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


_COMMANDS = {"synth": cmd_synth, "manifest": cmd_manifest,
             "preprocess": cmd_preprocess, "train": cmd_train,
             "distill": cmd_distill, "eval": cmd_eval, "sweep": cmd_sweep,
             "flops": cmd_flops}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    _pin_threads(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    from .errors import UffiaError
    try:
        return _COMMANDS[args.verb](args)
    except UffiaError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
