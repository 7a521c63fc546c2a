"""Clip media on disk: WAV audio, packed frame containers, PNG directories."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from ..dsp import load_waveform, write_wav
from ..errors import InputError
from ..numerics import load_container, save_container
from .records import ClipRecord

FRAMES_KIND = "frames"


def save_frames_packed(path, frames: np.ndarray) -> None:
    """Store (F, 3, H, W) frames in [0,1] as a uint8 container."""
    u8 = np.round(np.clip(frames, 0.0, 1.0) * 255.0).astype(np.uint8)
    save_container(path, {"frames": u8}, kind=FRAMES_KIND)


def load_frames_packed(path) -> np.ndarray:
    arrays, _ = load_container(path, expect_kind=FRAMES_KIND)
    return arrays["frames"].astype(np.float32) / 255.0


def save_frames_png(directory, frames: np.ndarray) -> None:
    from PIL import Image
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    u8 = np.round(np.clip(frames, 0.0, 1.0) * 255.0).astype(np.uint8)
    for i, frame in enumerate(u8):
        Image.fromarray(frame.transpose(1, 2, 0)).save(directory / f"frame_{i:04d}.png")


def load_frames_png(directory) -> np.ndarray:
    from PIL import Image
    directory = Path(directory)
    paths = sorted(directory.glob("*.png"))
    if not paths:
        raise InputError(f"{directory}: no PNG frames found")
    frames = []
    for p in paths:
        arr = np.asarray(Image.open(p).convert("RGB"), dtype=np.float32) / 255.0
        frames.append(arr.transpose(2, 0, 1))
    return np.stack(frames)


def load_frames(path) -> np.ndarray:
    path = Path(path)
    if path.is_dir():
        return load_frames_png(path)
    return load_frames_packed(path)


def load_clip_media(record: ClipRecord) -> ClipRecord:
    """Fill waveform and frames from the record's paths (lazy loading)."""
    if record.waveform is None:
        if record.audio_path is None:
            raise InputError(f"{record.clip_id}: no audio available")
        record.waveform = load_waveform(record.audio_path)
    if record.frames is None:
        if record.video_path is None:
            raise InputError(f"{record.clip_id}: no video available")
        record.frames = load_frames(record.video_path)
    return record


def export_clip(record: ClipRecord, class_dir, packed: bool = True) -> tuple[str, str]:
    """Write one synthetic clip's media under class_dir; returns the paths."""
    class_dir = Path(class_dir)
    class_dir.mkdir(parents=True, exist_ok=True)
    wav_path = class_dir / f"{record.clip_id}.wav"
    write_wav(wav_path, record.waveform)
    if packed:
        video_path = class_dir / f"{record.clip_id}.frames"
        save_frames_packed(video_path, record.frames)
    else:
        video_path = class_dir / record.clip_id
        save_frames_png(video_path, record.frames)
    return str(wav_path), str(video_path)
