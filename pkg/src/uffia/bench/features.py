"""In-memory per-clip feature cache and batch assembly.

Caches the clean compressed mel (float32), optionally the uncompressed
mel for teachers, and the native frames as uint8 (lossless thanks to the
generator's 8-bit quantization). Noisy-audio features are recomputed from
the waveform on demand; synthetic waveforms are regenerated rather than
cached (a clip's audio is a pure function of (seed, index)).
"""
from __future__ import annotations

import numpy as np

from ..data import SyntheticDataset
from ..data.synth import _synth_audio
from ..dsp import (MelFeature, NoiseSpec, Waveform, mel_filterbank, mix_at_snr,
                   simpf_pool, spec_augment, stft_log_mel)
from ..model import ModelConfig
from ..numerics import clip_rng
from ..video import corrupt_frames, patchify_stack, sample_frames


class FeatureCache:
    def __init__(self, dataset, model_cfg: ModelConfig):
        self.dataset = dataset
        self.cfg = model_cfg
        self.filterbank = mel_filterbank(model_cfg.mel_bins, 2048, 64_000)
        self._mel: dict[int, np.ndarray] = {}
        self._mel_full: dict[int, np.ndarray] = {}
        self._frames: dict[int, np.ndarray] = {}
        self._labels: dict[int, int] = {}

    def _ensure(self, idx: int) -> None:
        if idx in self._mel:
            return
        clip = self.dataset.load(idx)
        full = self._mel_from_waveform(clip.waveform)
        self._mel_full[idx] = full
        self._mel[idx] = self._compress(full)
        self._frames[idx] = np.round(clip.frames * 255.0).astype(np.uint8)
        self._labels[idx] = clip.label

    def _mel_from_waveform(self, waveform: Waveform) -> np.ndarray:
        feat = stft_log_mel(waveform, n_mels=self.cfg.mel_bins,
                            filterbank=self.filterbank)
        return feat.frames.astype(np.float32)

    def _compress(self, full: np.ndarray) -> np.ndarray:
        if self.cfg.simpf_k >= 1.0:
            return full
        pooled = simpf_pool(MelFeature(frames=full.astype(np.float64)),
                            self.cfg.simpf_k)
        return pooled.frames.astype(np.float32)

    def label(self, idx: int) -> int:
        self._ensure(idx)
        return self._labels[idx]

    def mel(self, idx: int) -> np.ndarray:
        self._ensure(idx)
        return self._mel[idx]

    def mel_full(self, idx: int) -> np.ndarray:
        self._ensure(idx)
        return self._mel_full[idx]

    def frames(self, idx: int) -> np.ndarray:
        self._ensure(idx)
        return self._frames[idx].astype(np.float32) / 255.0

    def waveform(self, idx: int) -> Waveform:
        """Clean waveform; synthetic audio is regenerated without video cost."""
        ds = self.dataset
        if isinstance(ds, SyntheticDataset):
            p = ds.spec.params
            samples, _ = _synth_audio(ds.label_of(idx), p, clip_rng(p.seed, idx))
            return Waveform(samples, p.sample_rate)
        return ds.load(idx).waveform

    def noisy_mel(self, idx: int, spec: NoiseSpec, rng, compressed: bool = True) -> np.ndarray:
        noisy = mix_at_snr(self.waveform(idx), spec, rng)
        full = self._mel_from_waveform(noisy)
        return self._compress(full) if compressed else full


def assemble_audio(cache: FeatureCache, indices, augment=None, rng=None,
                   corruption=None, eval_seed: int | None = None) -> np.ndarray:
    """(B, T', M) compressed mel batch.

    Training (rng given): optional per-clip SNR noise injection followed
    by SpecAugment. Evaluation (eval_seed given): deterministic per-clip
    corruption streams.
    """
    rows = []
    for idx in indices:
        if corruption is not None and corruption.noise_kind and \
                np.isfinite(corruption.snr_db):
            noise_rng = clip_rng(eval_seed if eval_seed is not None else 0,
                                 2_000_000 + idx)
            mel = cache.noisy_mel(idx, NoiseSpec(corruption.noise_kind,
                                                 corruption.snr_db), noise_rng)
        elif rng is not None and augment is not None and augment.noise_prob > 0 \
                and rng.random() < augment.noise_prob:
            kind = augment.noise_kinds[int(rng.integers(0, len(augment.noise_kinds)))]
            snr = float(rng.uniform(*augment.snr_range))
            mel = cache.noisy_mel(idx, NoiseSpec(kind, snr), rng)
        else:
            mel = cache.mel(idx)
        if rng is not None and augment is not None and \
                (augment.time_masks or augment.freq_masks):
            feat = spec_augment(MelFeature(frames=mel.astype(np.float64)),
                                augment.time_masks, augment.freq_masks,
                                augment.mask_t, augment.mask_f, rng)
            mel = feat.frames.astype(np.float32)
        rows.append(mel)
    return np.stack(rows)


def assemble_video(cache: FeatureCache, indices, n_frames: int, rng=None,
                   corruption=None, eval_seed: int | None = None,
                   patch: int = 16) -> np.ndarray:
    """(B, N_f, N, 3P^2) patch batch; deterministic per clip at evaluation."""
    stacks = []
    for idx in indices:
        frames = cache.frames(idx)
        frame_rng = rng if rng is not None else clip_rng(eval_seed or 0,
                                                         3_000_000 + idx)
        stack = sample_frames(frames, n_frames, frame_rng)
        if corruption is not None and (corruption.darkness < 1.0
                                       or corruption.gaussian_variance > 0.0):
            corr_rng = rng if rng is not None else clip_rng(eval_seed or 0,
                                                            4_000_000 + idx)
            stack = corrupt_frames(stack, corruption.darkness,
                                   corruption.gaussian_variance, corr_rng)
        stacks.append(patchify_stack(stack.frames, patch))
    return np.stack(stacks)


def assemble_teacher_video(cache: FeatureCache, indices) -> np.ndarray:
    """All native frames for the video teacher, (B, F, 3, H, W)."""
    return np.stack([cache.frames(idx) for idx in indices])
