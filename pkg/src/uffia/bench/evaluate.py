"""Deterministic evaluation and noise-robustness sweeps."""
from __future__ import annotations

import numpy as np

from ..errors import InputError
from ..model import predict
from ..numerics import no_grad
from .config import EvalCorruption
from .features import FeatureCache, assemble_audio, assemble_video

SWEEP_SNRS = (-10.0, -5.0, 0.0, 10.0, 20.0)


def evaluate(model, cache: FeatureCache, indices, mode: str,
             corruption: EvalCorruption | None = None, batch_size: int = 20,
             eval_seed: int = 0) -> float:
    """Fraction correct over ``indices``; corruption applies before the frontend.

    Frame sampling and corruption noise use per-clip streams derived from
    ``eval_seed``, so repeated evaluations are bit-identical.
    """
    if len(indices) == 0:
        raise InputError("cannot evaluate an empty record set")
    correct = 0
    cfg = model.cfg
    for start in range(0, len(indices), batch_size):
        chunk = list(indices[start:start + batch_size])
        labels = np.array([cache.label(i) for i in chunk])
        audio = None
        video = None
        if mode in ("A", "AV"):
            audio = assemble_audio(cache, chunk, corruption=corruption,
                                   eval_seed=eval_seed)
        if mode in ("V", "AV"):
            video = assemble_video(cache, chunk, cfg.n_frames,
                                   corruption=corruption, eval_seed=eval_seed,
                                   patch=cfg.patch_size)
        with no_grad():
            out = model.forward(audio_mel=audio, video_patches=video, mode=mode)
        correct += int((predict(out) == labels).sum())
    return correct / len(indices)


def noise_sweep(model, cache: FeatureCache, indices, mode: str,
                snrs=SWEEP_SNRS, noise_kind: str = "bubble",
                base_corruption: EvalCorruption | None = None,
                batch_size: int = 20, eval_seed: int = 0) -> list[tuple[float, float]]:
    """One evaluation per SNR level with seeded noise; returns (snr, accuracy) rows."""
    base = base_corruption or EvalCorruption()
    rows = []
    for snr in snrs:
        corruption = EvalCorruption(noise_kind=noise_kind, snr_db=float(snr),
                                    darkness=base.darkness,
                                    gaussian_variance=base.gaussian_variance)
        acc = evaluate(model, cache, indices, mode, corruption=corruption,
                       batch_size=batch_size, eval_seed=eval_seed)
        rows.append((float(snr), acc))
    return rows
