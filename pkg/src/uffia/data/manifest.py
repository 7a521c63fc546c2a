"""CSV manifest parsing, directory scanning, and split management.

The manifest is the single source of truth for on-disk datasets. Columns:
clip_id, audio_path, video_path, label, split. Paths are relative to the
manifest's directory. Video paths may point at a packed frame container
or a directory of PNG frames.
"""
from __future__ import annotations

import csv
import os
from pathlib import Path

import numpy as np

from ..errors import ConfigError, ManifestError
from ..numerics import make_rng
from .records import CLASS_INDEX, CLASS_NAMES, SPLITS, ClipRecord

REQUIRED_COLUMNS = ("clip_id", "audio_path", "video_path", "label", "split")


def load_manifest(path) -> list[ClipRecord]:
    """Parse a manifest into lazy records; media stays on disk."""
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"manifest not found: {path}")
    records = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ManifestError(f"{path}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise ManifestError(f"{path}: header missing columns {missing}")
        idx = {c: header.index(c) for c in REQUIRED_COLUMNS}
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < len(header):
                raise ManifestError(f"{path}:{line_no}: expected {len(header)} fields, "
                                    f"got {len(row)}")
            label = row[idx["label"]].strip()
            if label not in CLASS_INDEX:
                raise ManifestError(f"{path}:{line_no}: unknown label {label!r}, "
                                    f"expected one of {CLASS_NAMES}")
            split = row[idx["split"]].strip()
            if split not in SPLITS:
                raise ManifestError(f"{path}:{line_no}: unknown split {split!r}, "
                                    f"expected one of {SPLITS}")
            audio_rel = row[idx["audio_path"]].strip()
            video_rel = row[idx["video_path"]].strip()
            for rel in (audio_rel, video_rel):
                if not (path.parent / rel).exists():
                    raise ManifestError(f"{path}:{line_no}: dangling path {rel!r}")
            records.append(ClipRecord(clip_id=row[idx["clip_id"]].strip(),
                                      label=CLASS_INDEX[label], split=split,
                                      audio_path=str(path.parent / audio_rel),
                                      video_path=str(path.parent / video_rel),
                                      source="manifest"))
    return records


def write_manifest(records, path) -> None:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(REQUIRED_COLUMNS)
        for r in records:
            audio = os.path.relpath(r.audio_path, path.parent) \
                if Path(r.audio_path).is_absolute() else r.audio_path
            video = os.path.relpath(r.video_path, path.parent) \
                if Path(r.video_path).is_absolute() else r.video_path
            writer.writerow([r.clip_id, str(audio), str(video),
                             CLASS_NAMES[r.label], r.split])


def scan_class_directories(root) -> list[ClipRecord]:
    """Convert a class-named folder layout into manifest records.

    Expected layout: root/<ClassName>/<clip_id>.wav next to either
    <clip_id>.frames (packed container) or a <clip_id>/ directory of PNGs.
    """
    root = Path(root)
    records = []
    for name in CLASS_NAMES:
        class_dir = root / name
        if not class_dir.is_dir():
            continue
        for wav in sorted(class_dir.glob("*.wav")):
            stem = wav.stem
            packed = class_dir / f"{stem}.frames"
            png_dir = class_dir / stem
            if packed.exists():
                video = packed
            elif png_dir.is_dir():
                video = png_dir
            else:
                raise ManifestError(f"{wav}: no frames found "
                                    f"(expected {packed.name} or {stem}/ of PNGs)")
            records.append(ClipRecord(clip_id=f"{name}-{stem}", label=CLASS_INDEX[name],
                                      audio_path=str(wav), video_path=str(video),
                                      source="manifest"))
    return records


def make_splits(records, fractions=(0.7, 0.1, 0.2), seed: int = 0) -> list[ClipRecord]:
    """Stratified, seeded split assignment; returns records re-tagged in place.

    Within each class the records are shuffled and partitioned by the
    (train, val, test) fractions with largest-remainder rounding, keeping
    per-class proportions within one clip of exact.
    """
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ConfigError(f"split fractions must sum to 1, got {sum(fractions)}")
    rng = make_rng(seed, 23)
    by_class: dict[int, list[int]] = {}
    for i, r in enumerate(records):
        by_class.setdefault(r.label, []).append(i)
    for label in sorted(by_class):
        indices = np.array(by_class[label])
        indices = indices[rng.permutation(len(indices))]
        n = len(indices)
        ideal = [f * n for f in fractions]
        counts = [int(np.floor(x)) for x in ideal]
        remainder = n - sum(counts)
        by_frac = sorted(range(3), key=lambda j: ideal[j] - counts[j], reverse=True)
        for j in by_frac[:remainder]:
            counts[j] += 1
        start = 0
        for split, count in zip(SPLITS, counts):
            for i in indices[start:start + count]:
                records[i].split = split
            start += count
    return records
