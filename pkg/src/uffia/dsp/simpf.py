"""Spectral pooling of mel features along the time axis.

Per frequency row: DFT over time, keep the floor(k*T) lowest-|frequency|
coefficients, inverse DFT, rescale by the length ratio so the row's time
mean (the DC coefficient) is preserved. When the retained width is even,
its Nyquist slot receives the sum of the +/- edge coefficients, which
keeps the cropped spectrum Hermitian and the output real.
"""
from __future__ import annotations

import numpy as np

from ..errors import ConfigError, NumericError
from .mel import MelFeature

_IMAG_TOL = 1e-9


def crop_width(n_frames: int, k: float) -> int:
    return int(np.floor(k * n_frames))


def _crop_spectrum(spectrum: np.ndarray, t_out: int) -> np.ndarray:
    """Keep the t_out lowest-|frequency| DFT coefficients of axis 0."""
    t_in = spectrum.shape[0]
    out = np.zeros((t_out,) + spectrum.shape[1:], dtype=spectrum.dtype)
    half = (t_out - 1) // 2
    out[0] = spectrum[0]
    if half:
        out[1:half + 1] = spectrum[1:half + 1]
        out[t_out - half:] = spectrum[t_in - half:]
    if t_out % 2 == 0:
        edge = t_out // 2
        if edge == t_in - edge:          # full-width crop: single Nyquist slot
            out[edge] = spectrum[edge]
        else:
            out[edge] = spectrum[edge] + spectrum[t_in - edge]
    return out


def simpf_pool(mel: MelFeature, k: float) -> MelFeature:
    """Compress a (T, M) mel feature to (floor(k*T), M) frames."""
    if not 0.0 < k <= 1.0:
        raise ConfigError(f"compression coefficient must be in (0, 1], got {k}")
    t_in = mel.n_frames
    t_out = crop_width(t_in, k)
    if t_out < 1:
        raise ConfigError(f"k={k} leaves no frames of the original {t_in}")
    spectrum = np.fft.fft(mel.frames, axis=0)
    pooled = np.fft.ifft(_crop_spectrum(spectrum, t_out), axis=0) * (t_out / t_in)
    residue = np.abs(pooled.imag).max()
    if residue > _IMAG_TOL * max(1.0, np.abs(pooled.real).max()):
        raise NumericError(f"spectral crop produced imaginary residue {residue:.3e}")
    return mel.with_frames(np.ascontiguousarray(pooled.real),
                           compression=mel.compression * k)
