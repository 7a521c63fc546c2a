"""Experiment configuration: JSON documents with dotted-path overrides.

Precedence is CLI overrides > config file > profile defaults. Every run
echoes its fully resolved configuration into run.json, which is itself a
valid config, so any run can be reproduced from its own output directory.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..distill import KdConfig
from ..errors import ConfigError
from ..model import DropoutConfig, ModelConfig, PROFILES
from .. import data as data_mod

MODEL_KIND_NAMES = ("uffia", "fusion-self", "fusion-cross", "fusion-bottleneck",
                    "audio-baseline", "video-baseline")
TRAIN_MODES = ("mixed", "A", "V", "AV")


@dataclass
class TrainSettings:
    lr: float = 1e-3
    batch_size: int = 20
    epochs: int = 50
    mode: str = "mixed"
    precision: str = "float32"
    stop_at_val_accuracy: float | None = None

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigError(f"train.batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ConfigError(f"train.epochs must be >= 1, got {self.epochs}")
        if self.mode not in TRAIN_MODES:
            raise ConfigError(f"train.mode must be one of {TRAIN_MODES}, got {self.mode!r}")
        if self.precision not in ("float32", "float64"):
            raise ConfigError(f"train.precision must be float32/float64, got {self.precision!r}")


@dataclass
class AugmentSettings:
    """Training-time augmentation: SpecAugment plus optional SNR noise."""

    time_masks: int = 2
    freq_masks: int = 2
    mask_t: int = 8
    mask_f: int = 12
    noise_prob: float = 0.0
    noise_kinds: tuple = ("bubble", "pump", "white")
    snr_range: tuple = (-10.0, 20.0)

    def __post_init__(self):
        if not 0.0 <= self.noise_prob <= 1.0:
            raise ConfigError(f"augment.noise_prob must be in [0,1], got {self.noise_prob}")


@dataclass
class DataSettings:
    kind: str = "synthetic"
    n_train: int = 800
    n_val: int = 100
    n_test: int = 100
    synth_seed: int = 0
    manifest: str | None = None

    def __post_init__(self):
        if self.kind not in ("synthetic", "manifest"):
            raise ConfigError(f"data.kind must be synthetic/manifest, got {self.kind!r}")
        if self.kind == "manifest" and not self.manifest:
            raise ConfigError("data.manifest path required when data.kind is 'manifest'")


@dataclass
class EvalCorruption:
    noise_kind: str | None = None
    snr_db: float = float("inf")
    darkness: float = 1.0
    gaussian_variance: float = 0.0


@dataclass
class EvalSettings:
    mode: str = "AV"
    corruption: EvalCorruption = field(default_factory=EvalCorruption)

    def __post_init__(self):
        if self.mode not in ("A", "V", "AV"):
            raise ConfigError(f"eval.mode must be A/V/AV, got {self.mode!r}")


@dataclass
class RunConfig:
    model_kind: str = "uffia"
    profile: str = "desk"
    seed: int = 0
    model: ModelConfig = None
    train: TrainSettings = field(default_factory=TrainSettings)
    augment: AugmentSettings = field(default_factory=AugmentSettings)
    data: DataSettings = field(default_factory=DataSettings)
    eval: EvalSettings = field(default_factory=EvalSettings)
    dropout: DropoutConfig = field(default_factory=lambda: DropoutConfig(0.5, 0.25, 0.25))
    kd: KdConfig | None = None

    def __post_init__(self):
        if self.model_kind not in MODEL_KIND_NAMES:
            raise ConfigError(
                f"model_kind must be one of {MODEL_KIND_NAMES}, got {self.model_kind!r}")
        if self.profile not in PROFILES:
            raise ConfigError(f"profile must be one of {sorted(PROFILES)}, got {self.profile!r}")
        if self.model is None:
            self.model = PROFILES[self.profile]()
        if self.model_kind != "uffia" and self.train.mode == "mixed":
            self.train.mode = {"audio-baseline": "A", "video-baseline": "V"}.get(
                self.model_kind, "AV")
        if self.kd is not None and self.train.mode not in ("A", "V"):
            raise ConfigError("kd requires train.mode 'A' or 'V' (single-mode student)")

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        out = {
            "model_kind": self.model_kind,
            "profile": self.profile,
            "seed": self.seed,
            "model": self.model.to_dict(),
            "train": asdict(self.train),
            "augment": {**asdict(self.augment),
                        "noise_kinds": list(self.augment.noise_kinds),
                        "snr_range": list(self.augment.snr_range)},
            "data": asdict(self.data),
            "eval": asdict(self.eval),
            "dropout": asdict(self.dropout),
            "kd": asdict(self.kd) if self.kd else None,
        }
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        doc = dict(doc)
        if "config" in doc and isinstance(doc["config"], dict):
            doc = dict(doc["config"])     # accept an echoed run.json directly
        known = {"model_kind", "profile", "seed", "model", "train", "augment",
                 "data", "eval", "dropout", "kd"}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")

        profile = doc.get("profile", "desk")
        if profile not in PROFILES:
            raise ConfigError(f"profile must be one of {sorted(PROFILES)}, got {profile!r}")
        model_doc = doc.get("model") or {}
        base = PROFILES[profile]().to_dict()
        base.update(model_doc)

        def build(section, ctor, **kwargs):
            payload = doc.get(section) or {}
            if not isinstance(payload, dict):
                raise ConfigError(f"config section {section!r} must be an object")
            try:
                return ctor(**{**kwargs, **payload})
            except TypeError as e:
                raise ConfigError(f"config section {section!r}: {e}") from None

        eval_doc = dict(doc.get("eval") or {})
        corruption = eval_doc.pop("corruption", None) or {}
        # JSON has no infinity literal; accept null / "inf" for the sentinel.
        if corruption.get("snr_db") in (None, "inf", "Infinity"):
            corruption["snr_db"] = float("inf")
        try:
            eval_settings = EvalSettings(corruption=EvalCorruption(**corruption), **eval_doc)
        except TypeError as e:
            raise ConfigError(f"config section 'eval': {e}") from None

        augment_doc = dict(doc.get("augment") or {})
        for key in ("noise_kinds", "snr_range"):
            if key in augment_doc:
                augment_doc[key] = tuple(augment_doc[key])
        try:
            augment = AugmentSettings(**augment_doc)
        except TypeError as e:
            raise ConfigError(f"config section 'augment': {e}") from None

        kd_doc = doc.get("kd")
        return cls(
            model_kind=doc.get("model_kind", "uffia"),
            profile=profile,
            seed=int(doc.get("seed", 0)),
            model=ModelConfig.from_dict(base),
            train=build("train", TrainSettings),
            augment=augment,
            data=build("data", DataSettings),
            eval=eval_settings,
            dropout=DropoutConfig(**(doc.get("dropout")
                                     or {"p_av": 0.5, "p_a": 0.25, "p_v": 0.25})),
            kd=KdConfig(**kd_doc) if kd_doc else None,
        )


def parse_override(expr: str) -> tuple[str, object]:
    """'a.b.c=value' -> (path, parsed value); values parse as JSON else string."""
    if "=" not in expr:
        raise ConfigError(f"override {expr!r} must look like key.path=value")
    path, raw = expr.split("=", 1)
    path = path.strip()
    if not path:
        raise ConfigError(f"override {expr!r} has an empty key path")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return path, value


def apply_override(doc: dict, path: str, value) -> None:
    parts = path.split(".")
    node = doc
    for part in parts[:-1]:
        nxt = node.get(part)
        if nxt is None:
            nxt = {}
            node[part] = nxt
        if not isinstance(nxt, dict):
            raise ConfigError(f"override path {path!r}: {part!r} is not an object")
        node = nxt
    node[parts[-1]] = value


def load_config(path: str | None, overrides: list[str] = ()) -> RunConfig:
    doc: dict = {}
    if path:
        text = Path(path).read_text(encoding="utf-8")
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON ({e})") from None
        if "config" in doc and isinstance(doc.get("config"), dict):
            doc = doc["config"]
    for expr in overrides:
        key, value = parse_override(expr)
        apply_override(doc, key, value)
    return RunConfig.from_dict(doc)


def build_dataset(settings: DataSettings, model_cfg: ModelConfig):
    if settings.kind == "synthetic":
        params = data_mod.SynthParams(seed=settings.synth_seed,
                                      image_size=model_cfg.image_size,
                                      native_frames=model_cfg.native_frames)
        spec = data_mod.SyntheticSpec(n_train=settings.n_train, n_val=settings.n_val,
                                      n_test=settings.n_test, params=params)
        return data_mod.SyntheticDataset(spec)
    records = data_mod.load_manifest(settings.manifest)
    return data_mod.ManifestDataset(records)
