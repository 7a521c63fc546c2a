"""Audio frontend: log-mel features, spectral pooling, augmentation, noise."""
from .augment import spec_augment
from .mel import MelFeature, Waveform, mel_filterbank, stft_log_mel
from .noise import NoiseSpec, mix_at_snr
from .simpf import simpf_pool
from .wav import load_waveform, resample_linear, write_wav

__all__ = [
    "MelFeature", "NoiseSpec", "Waveform", "load_waveform", "mel_filterbank",
    "mix_at_snr", "resample_linear", "simpf_pool", "spec_augment",
    "stft_log_mel", "write_wav",
]
