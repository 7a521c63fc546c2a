"""Mono WAV reading/writing via the stdlib wave module."""
from __future__ import annotations

import wave

import numpy as np

from ..errors import InputError
from .mel import SAMPLE_RATE, Waveform

_WIDTH_DTYPE = {2: np.int16, 4: np.int32}


def resample_linear(w: Waveform, target_rate: int) -> Waveform:
    """Linear-interpolation resampling; identity when rates already match."""
    if w.sample_rate == target_rate:
        return w
    n_out = int(round(len(w.samples) * target_rate / w.sample_rate))
    t_out = np.arange(n_out) / target_rate
    t_in = np.arange(len(w.samples)) / w.sample_rate
    return Waveform(np.interp(t_out, t_in, w.samples), target_rate)


def load_waveform(path, target_rate: int | None = SAMPLE_RATE) -> Waveform:
    """Read a mono PCM 16/32-bit WAV, normalized to [-1, 1].

    Resampled to ``target_rate`` unless it is None.
    """
    with wave.open(str(path), "rb") as f:
        if f.getnchannels() != 1:
            raise InputError(f"{path}: expected mono audio, got {f.getnchannels()} channels")
        width = f.getsampwidth()
        if width not in _WIDTH_DTYPE:
            raise InputError(f"{path}: unsupported sample width {width * 8} bits")
        rate = f.getframerate()
        raw = f.readframes(f.getnframes())
    samples = np.frombuffer(raw, dtype=_WIDTH_DTYPE[width]).astype(np.float64)
    samples /= float(2 ** (8 * width - 1) - 1)
    w = Waveform(samples, rate)
    if target_rate is not None:
        w = resample_linear(w, target_rate)
    return w


def write_wav(path, w: Waveform) -> None:
    """Write 16-bit PCM; samples are clipped to [-1, 1] first."""
    clipped = np.clip(w.samples, -1.0, 1.0)
    pcm = np.round(clipped * 32767.0).astype(np.int16)
    with wave.open(str(path), "wb") as f:
        f.setnchannels(1)
        f.setsampwidth(2)
        f.setframerate(w.sample_rate)
        f.writeframes(pcm.tobytes())
