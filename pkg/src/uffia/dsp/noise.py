"""Noise synthesis and SNR-calibrated mixing.

Recorded aquaculture noise is not bundled; the three kinds here are
synthetic stand-ins: band-limited white noise for bubble-like noise
(500-4000 Hz), a 50 Hz fundamental with decaying harmonics for pump-like
hum, and plain white noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, InputError
from .mel import Waveform

NOISE_KINDS = ("bubble", "pump", "white")

BUBBLE_BAND_HZ = (500.0, 4000.0)
PUMP_FUNDAMENTAL_HZ = 50.0
PUMP_HARMONICS = 8


@dataclass
class NoiseSpec:
    """One corruption setting: what to inject and how loud."""

    noise_kind: str
    snr_db: float

    def __post_init__(self):
        if self.noise_kind not in NOISE_KINDS:
            raise ConfigError(
                f"unknown noise kind {self.noise_kind!r}; choose from {NOISE_KINDS}")


def _band_noise(n: int, sample_rate: int, band, rng) -> np.ndarray:
    white = rng.standard_normal(n)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n, d=1.0 / sample_rate)
    spectrum[(freqs < band[0]) | (freqs > band[1])] = 0.0
    return np.fft.irfft(spectrum, n=n)


def _pump_noise(n: int, sample_rate: int, rng) -> np.ndarray:
    t = np.arange(n) / sample_rate
    out = np.zeros(n)
    for h in range(1, PUMP_HARMONICS + 1):
        phase = rng.uniform(0.0, 2.0 * math.pi)
        out += np.sin(2.0 * math.pi * PUMP_FUNDAMENTAL_HZ * h * t + phase) / h
    return out


def synth_noise(kind: str, n: int, sample_rate: int, rng: np.random.Generator) -> np.ndarray:
    if kind == "bubble":
        return _band_noise(n, sample_rate, BUBBLE_BAND_HZ, rng)
    if kind == "pump":
        return _pump_noise(n, sample_rate, rng)
    if kind == "white":
        return rng.standard_normal(n)
    raise ConfigError(f"unknown noise kind {kind!r}")


def mix_at_snr(signal: Waveform, spec: NoiseSpec, rng: np.random.Generator) -> Waveform:
    """Add noise scaled so 10*log10(P_signal / P_noise) equals spec.snr_db.

    ``snr_db = inf`` is the documented no-noise sentinel and returns the
    signal unchanged. A silent signal has no defined SNR and is rejected.
    """
    if math.isinf(spec.snr_db) and spec.snr_db > 0:
        return Waveform(signal.samples.copy(), signal.sample_rate)
    p_signal = float(np.mean(signal.samples ** 2))
    if p_signal <= 0.0:
        raise InputError("SNR is undefined for a silent signal")
    noise = synth_noise(spec.noise_kind, len(signal.samples), signal.sample_rate, rng)
    p_noise = float(np.mean(noise ** 2))
    if p_noise <= 0.0:
        raise InputError("generated noise has zero power")
    target = p_signal / (10.0 ** (spec.snr_db / 10.0))
    noise *= math.sqrt(target / p_noise)
    return Waveform(signal.samples + noise, signal.sample_rate)
