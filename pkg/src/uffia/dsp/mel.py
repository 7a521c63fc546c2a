"""Waveform to log-mel features.

Canonical settings: 64 kHz input, Hann window of 2048 samples, hop 1024,
128 mel bins. The hop arithmetic for a 2-second clip lands at 125 frames;
the signal tail is zero-padded so the canonical clip yields exactly 128
frames, i.e. a 128 x 128 feature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import ConfigError, InputError

SAMPLE_RATE = 64_000
N_FFT = 2048
HOP = 1024
N_MELS = 128
MIN_FRAMES = 128
LOG_FLOOR = 1e-10


@dataclass
class Waveform:
    """Mono audio samples at a known rate."""

    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.sample_rate <= 0:
            raise InputError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.samples.ndim != 1:
            raise InputError(f"waveform must be mono 1-d, got shape {self.samples.shape}")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass
class MelFeature:
    """Time x frequency log-mel matrix with its extraction metadata."""

    frames: np.ndarray            # (T, M)
    sample_rate: int = SAMPLE_RATE
    n_fft: int = N_FFT
    hop: int = HOP
    compression: float = 1.0      # SimPF coefficient already applied
    meta: dict = field(default_factory=dict)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_mels(self) -> int:
        return self.frames.shape[1]

    def with_frames(self, frames: np.ndarray, **changes) -> "MelFeature":
        return replace(self, frames=frames, **changes)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int = N_MELS, n_fft: int = N_FFT,
                   sample_rate: int = SAMPLE_RATE) -> np.ndarray:
    """Triangular filters, (n_mels, n_fft//2 + 1).

    Center frequencies are equally spaced on the mel scale between 0 and
    sample_rate/2; each triangle rises from its left neighbour's center
    and falls to its right neighbour's, peak height 1.
    """
    if n_mels > n_fft // 2:
        raise ConfigError(f"n_mels={n_mels} exceeds usable bins of n_fft={n_fft}")
    n_bins = n_fft // 2 + 1
    points_hz = mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2), n_mels + 2))
    bin_hz = np.arange(n_bins) * (sample_rate / n_fft)
    bank = np.zeros((n_mels, n_bins))
    for i in range(n_mels):
        lo, center, hi = points_hz[i], points_hz[i + 1], points_hz[i + 2]
        rising = (bin_hz - lo) / (center - lo)
        falling = (hi - bin_hz) / (hi - center)
        bank[i] = np.clip(np.minimum(rising, falling), 0.0, None)
    return bank


def filterbank_centers_hz(n_mels: int = N_MELS,
                          sample_rate: int = SAMPLE_RATE) -> np.ndarray:
    """Peak frequency of each triangular filter in Hz."""
    points = mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2), n_mels + 2))
    return points[1:-1]


def stft_log_mel(w: Waveform, n_mels: int = N_MELS, n_fft: int = N_FFT,
                 hop: int = HOP, min_frames: int = MIN_FRAMES,
                 filterbank: np.ndarray | None = None) -> MelFeature:
    """Hann-windowed magnitude STFT, mel projection, natural log with floor.

    Frames start at multiples of ``hop`` from sample 0; the tail is
    zero-padded so at least ``min_frames`` frames come out (the canonical
    2-s / 64 kHz clip maps to exactly 128 x 128).
    """
    if len(w.samples) == 0:
        raise InputError("cannot extract features from an empty signal")
    if w.sample_rate != SAMPLE_RATE:
        raise InputError(
            f"expected {SAMPLE_RATE} Hz input (resample first), got {w.sample_rate}")
    n_frames = max(min_frames, math.ceil(len(w.samples) / hop))
    needed = (n_frames - 1) * hop + n_fft
    x = np.zeros(needed)
    x[:len(w.samples)] = w.samples
    strides = (x.strides[0] * hop, x.strides[0])
    frames = np.lib.stride_tricks.as_strided(
        x, shape=(n_frames, n_fft), strides=strides, writeable=False)
    window = np.hanning(n_fft)
    spectrum = np.abs(np.fft.rfft(frames * window, axis=1))   # (T, n_fft//2+1)
    if filterbank is None:
        filterbank = mel_filterbank(n_mels, n_fft, w.sample_rate)
    mel = spectrum @ filterbank.T                              # (T, n_mels)
    return MelFeature(frames=np.log(np.maximum(mel, LOG_FLOOR)),
                      sample_rate=w.sample_rate, n_fft=n_fft, hop=hop)
