"""Audio frontend: mel extraction, spectral pooling, masking, SNR mixing."""
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from uffia.dsp import (MelFeature, NoiseSpec, Waveform, load_waveform,
                       mel_filterbank, mix_at_snr, resample_linear, simpf_pool,
                       spec_augment, stft_log_mel, write_wav)
from uffia.dsp.mel import LOG_FLOOR, filterbank_centers_hz, hz_to_mel, mel_to_hz
from uffia.errors import ConfigError, InputError
from uffia.numerics import make_rng


def two_second_clip(fill=0.0):
    return Waveform(np.full(128_000, fill), 64_000)


def brute_dft(x):
    """Explicit complex-exponential DFT, independent of np.fft."""
    n = len(x)
    k = np.arange(n)
    basis = np.exp(-2j * np.pi * np.outer(k, k) / n)
    return basis @ np.asarray(x, dtype=complex)


def brute_idft(spectrum):
    n = len(spectrum)
    k = np.arange(n)
    basis = np.exp(2j * np.pi * np.outer(k, k) / n)
    return (basis @ np.asarray(spectrum, dtype=complex)) / n


def simpf_oracle_row(x, k):
    """DFT -> symmetric center crop -> IDFT -> rescale, all brute force."""
    t = len(x)
    t2 = int(math.floor(k * t))
    spec = brute_dft(x)
    cropped = np.zeros(t2, dtype=complex)
    half = (t2 - 1) // 2
    cropped[0] = spec[0]
    for m in range(1, half + 1):
        cropped[m] = spec[m]
        cropped[t2 - m] = spec[t - m]
    if t2 % 2 == 0:
        edge = t2 // 2
        cropped[edge] = spec[edge] if edge == t - edge else spec[edge] + spec[t - edge]
    return brute_idft(cropped).real * (t2 / t)


class TestStftLogMel:
    def test_all_zero_clip_constant_floor(self):
        feat = stft_log_mel(two_second_clip(0.0))
        np.testing.assert_allclose(feat.frames, math.log(LOG_FLOOR))

    def test_canonical_shape(self):
        rng = make_rng(1)
        feat = stft_log_mel(Waveform(rng.standard_normal(128_000) * 0.1, 64_000))
        assert feat.frames.shape == (128, 128)

    def test_any_2s_input_is_128x128(self):
        for seed in range(3):
            x = make_rng(seed).uniform(-1, 1, 128_000)
            assert stft_log_mel(Waveform(x, 64_000)).frames.shape == (128, 128)

    def test_empty_signal_rejected(self):
        with pytest.raises(InputError):
            stft_log_mel(Waveform(np.array([]), 64_000))

    def test_wrong_rate_rejected(self):
        with pytest.raises(InputError):
            stft_log_mel(Waveform(np.zeros(1000), 32_000))

    def test_pure_tone_peaks_in_matching_mel_bin(self):
        # Oracle: brute-force DFT of one Hann window locates the peak FFT
        # bin; the mel bin holding that FFT bin's largest filter weight
        # must be the energy argmax of the feature.
        sr, f0 = 64_000, 1000.0
        t = np.arange(128_000) / sr
        feat = stft_log_mel(Waveform(np.sin(2 * np.pi * f0 * t), sr))
        window = np.sin(2 * np.pi * f0 * np.arange(2048) / sr) * np.hanning(2048)
        mags = np.abs(brute_dft(window))[:1025]
        peak_bin = int(np.argmax(mags))
        bank = mel_filterbank()
        expected_mel_bin = int(np.argmax(bank[:, peak_bin]))
        got = int(np.argmax(feat.frames.mean(axis=0)))
        assert got == expected_mel_bin


class TestMelFilterbank:
    def test_rows_nonnegative_single_peak(self):
        bank = mel_filterbank()
        assert (bank >= 0).all()
        for row in bank:
            nz = np.flatnonzero(row)
            assert nz.size >= 1
            peak = int(np.argmax(row))
            # Unimodal: nondecreasing up to the peak, nonincreasing after.
            assert (np.diff(row[:peak + 1]) >= 0).all()
            assert (np.diff(row[peak:]) <= 0).all()

    def test_centers_strictly_increasing(self):
        centers = filterbank_centers_hz()
        assert (np.diff(centers) > 0).all()

    def test_small_bank_centers_match_mel_formula(self):
        # Hand road: m = 2595*log10(1 + f/700), 6 equally spaced points on
        # [0, mel(4000)], centers are the middle 4, mapped back to Hz.
        sr, n_fft, m = 8000, 64, 4
        mel_max = 2595.0 * math.log10(1 + (sr / 2) / 700.0)
        hand_centers = [700.0 * (10 ** ((mel_max * i / 5) / 2595.0) - 1) for i in range(1, 5)]
        bank = mel_filterbank(m, n_fft, sr)
        bin_hz = sr / n_fft
        for row, hz in zip(bank, hand_centers):
            assert abs(np.argmax(row) - hz / bin_hz) <= 0.5 + 1e-9

    def test_too_many_bins_rejected(self):
        with pytest.raises(ConfigError):
            mel_filterbank(2000, 2048, 64_000)

    def test_mel_scale_roundtrip(self):
        f = np.array([0.0, 440.0, 1000.0, 32_000.0])
        np.testing.assert_allclose(mel_to_hz(hz_to_mel(f)), f, rtol=1e-12)


def random_mel(seed, t=16, m=6):
    return MelFeature(frames=make_rng(seed).standard_normal((t, m)))


class TestSimpf:
    def test_k1_is_identity(self):
        mel = random_mel(2, t=32, m=8)
        out = simpf_pool(mel, 1.0)
        np.testing.assert_allclose(out.frames, mel.frames, atol=1e-9)

    def test_half_compression_shape(self):
        mel = MelFeature(frames=make_rng(3).standard_normal((128, 128)))
        out = simpf_pool(mel, 0.5)
        assert out.frames.shape == (64, 128)
        assert out.compression == 0.5

    def test_constant_row_preserved(self):
        frames = np.outer(np.ones(8), np.arange(1.0, 5.0))  # constant in time
        out = simpf_pool(MelFeature(frames=frames), 0.5)
        np.testing.assert_allclose(out.frames, np.outer(np.ones(4), np.arange(1.0, 5.0)),
                                   atol=1e-9)

    @pytest.mark.parametrize("t,k", [(8, 0.5), (8, 0.75), (9, 0.5), (12, 1 / 3),
                                     (7, 0.9), (128, 0.25)])
    def test_matches_brute_force_oracle(self, t, k):
        rng = make_rng(t * 100 + int(k * 100))
        frames = rng.standard_normal((t, 3))
        out = simpf_pool(MelFeature(frames=frames), k)
        for col in range(3):
            np.testing.assert_allclose(out.frames[:, col],
                                       simpf_oracle_row(frames[:, col], k), atol=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.integers(4, 40),
           st.floats(0.11, 1.0, allow_nan=False))
    def test_frame_count_and_mean_preserved(self, seed, t, k):
        assume(math.floor(k * t) >= 1)
        frames = make_rng(seed).standard_normal((t, 4))
        out = simpf_pool(MelFeature(frames=frames), k)
        assert out.frames.shape == (int(math.floor(k * t)), 4)
        np.testing.assert_allclose(out.frames.mean(axis=0), frames.mean(axis=0),
                                   rtol=1e-6, atol=1e-9)

    @pytest.mark.parametrize("k", [0.0, -0.5, 1.01])
    def test_bad_coefficient_rejected(self, k):
        with pytest.raises(ConfigError):
            simpf_pool(random_mel(4), k)


class TestSpecAugment:
    def test_zero_masks_identity(self):
        mel = random_mel(5, t=32, m=16)
        out = spec_augment(mel, 0, 0, 10, 10, make_rng(0))
        np.testing.assert_array_equal(out.frames, mel.frames)

    def test_single_time_mask_width_ten(self):
        mel = MelFeature(frames=make_rng(6).standard_normal((128, 16)))
        out = spec_augment(mel, 1, 0, 10, 0, make_rng(1))
        fill = mel.frames.mean()
        masked_rows = np.flatnonzero(np.all(out.frames == fill, axis=1))
        assert masked_rows.size == 10
        assert np.array_equal(masked_rows, np.arange(masked_rows[0], masked_rows[0] + 10))

    def test_changes_only_masked_cells(self):
        mel = random_mel(7, t=64, m=32)
        out = spec_augment(mel, 2, 2, 8, 4, make_rng(2))
        fill = mel.frames.mean()
        diff = out.frames != mel.frames
        assert np.all(out.frames[diff] == fill)

    def test_seeded_placement_reproducible(self):
        mel = random_mel(8, t=64, m=32)
        a = spec_augment(mel, 2, 2, 8, 4, make_rng(3))
        b = spec_augment(mel, 2, 2, 8, 4, make_rng(3))
        np.testing.assert_array_equal(a.frames, b.frames)

    def test_oversize_mask_rejected(self):
        with pytest.raises(ConfigError):
            spec_augment(random_mel(9, t=8, m=8), 1, 0, 9, 0, make_rng(0))


class TestMixAtSnr:
    def measured_snr_db(self, clean, noisy):
        noise = noisy.samples - clean.samples
        return 10 * math.log10(np.mean(clean.samples ** 2) / np.mean(noise ** 2))

    @pytest.mark.parametrize("kind", ["bubble", "pump", "white"])
    @pytest.mark.parametrize("snr", [-10.0, -5.0, 0.0, 10.0, 20.0])
    def test_achieved_snr_within_tenth_db(self, kind, snr):
        rng = make_rng(10)
        clean = Waveform(rng.standard_normal(32_000) * 0.3, 64_000)
        noisy = mix_at_snr(clean, NoiseSpec(kind, snr), make_rng(11))
        assert abs(self.measured_snr_db(clean, noisy) - snr) < 0.1

    def test_zero_db_equal_power(self):
        clean = Waveform(make_rng(12).standard_normal(16_000), 64_000)
        noisy = mix_at_snr(clean, NoiseSpec("white", 0.0), make_rng(13))
        assert abs(self.measured_snr_db(clean, noisy)) < 0.1

    def test_infinite_snr_identity(self):
        clean = Waveform(make_rng(14).standard_normal(8000), 64_000)
        out = mix_at_snr(clean, NoiseSpec("white", math.inf), make_rng(15))
        np.testing.assert_array_equal(out.samples, clean.samples)

    def test_unit_sine_at_10db(self):
        t = np.arange(64_000) / 64_000
        clean = Waveform(np.sin(2 * np.pi * 440 * t), 64_000)
        noisy = mix_at_snr(clean, NoiseSpec("bubble", 10.0), make_rng(16))
        noise_power = np.mean((noisy.samples - clean.samples) ** 2)
        assert abs(noise_power - 0.05) / 0.05 < 0.02

    def test_silent_signal_rejected(self):
        with pytest.raises(InputError):
            mix_at_snr(two_second_clip(0.0), NoiseSpec("white", 5.0), make_rng(17))

    def test_unknown_kind_rejected(self):
        with pytest.raises(ConfigError):
            NoiseSpec("thunder", 0.0)


class TestWavIO:
    def test_roundtrip_16bit(self, tmp_path):
        w = Waveform(make_rng(18).uniform(-0.9, 0.9, 6400), 64_000)
        path = tmp_path / "clip.wav"
        write_wav(path, w)
        back = load_waveform(path, target_rate=None)
        assert back.sample_rate == 64_000
        np.testing.assert_allclose(back.samples, w.samples, atol=1.0 / 32767)

    def test_resample_doubles_length(self):
        w = Waveform(np.sin(2 * np.pi * 100 * np.arange(32_000) / 32_000), 32_000)
        up = resample_linear(w, 64_000)
        assert up.sample_rate == 64_000
        assert len(up.samples) == 64_000

    def test_load_resamples_to_64k(self, tmp_path):
        w = Waveform(make_rng(19).uniform(-0.5, 0.5, 16_000), 16_000)
        path = tmp_path / "low.wav"
        write_wav(path, w)
        back = load_waveform(path)
        assert back.sample_rate == 64_000
        assert len(back.samples) == 64_000
