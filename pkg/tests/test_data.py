"""Synthetic generator determinism, oracle agreement, manifests, splits."""
import math
from collections import Counter

import numpy as np
import pytest

from uffia.data import (CLASS_NAMES, ClipRecord, ManifestDataset,
                        SyntheticDataset, SyntheticSpec, SynthParams,
                        export_clip, generate_clip, load_clip_media,
                        load_frames_packed, load_frames_png, load_manifest,
                        make_splits, oracle_label, save_frames_packed,
                        save_frames_png, scan_class_directories, write_manifest)
from uffia.errors import ConfigError, ManifestError, UnsupportedError
from uffia.numerics import clip_rng, make_rng


def small_params(seed=0):
    # Shrunk clips keep generator tests fast; class structure is unchanged.
    return SynthParams(seed=seed, image_size=32, native_frames=8,
                       duration=0.5, sample_rate=16_000)


class TestGenerateClip:
    def test_none_class_has_zero_bursts_and_max_dispersion(self):
        p = SynthParams(seed=1)
        clip = generate_clip(0, p, clip_rng(1, 0))
        assert clip.meta["n_bursts"] == 0
        assert p.blob_dispersion[0] == max(p.blob_dispersion)

    def test_bit_identical_across_runs(self):
        p = small_params(seed=2)
        a = generate_clip(2, p, clip_rng(2, 5))
        b = generate_clip(2, p, clip_rng(2, 5))
        np.testing.assert_array_equal(a.waveform.samples, b.waveform.samples)
        np.testing.assert_array_equal(a.frames, b.frames)

    def test_different_indices_differ(self):
        p = small_params(seed=3)
        a = generate_clip(2, p, clip_rng(3, 0))
        b = generate_clip(2, p, clip_rng(3, 1))
        assert not np.array_equal(a.waveform.samples, b.waveform.samples)

    def test_strong_burst_count_matches_poisson_mean(self):
        # Generation-truth burst counts over 1000 clips: mean ~= rate * 2s.
        p = SynthParams(seed=4)
        rate = p.burst_rates[3]
        counts = [generate_clip(3, p, clip_rng(4, i)).meta["n_bursts"]
                  for i in range(1000)]
        assert abs(np.mean(counts) - rate * p.duration) / (rate * p.duration) < 0.05

    def test_frames_quantized_and_bounded(self):
        p = small_params(seed=5)
        clip = generate_clip(1, p, clip_rng(5, 0))
        assert clip.frames.min() >= 0.0 and clip.frames.max() <= 1.0
        np.testing.assert_array_equal(clip.frames,
                                      np.round(clip.frames * 255) / 255)

    def test_invalid_class_rejected(self):
        with pytest.raises(ConfigError):
            generate_clip(4, small_params(), clip_rng(0, 0))

    def test_invalid_params_rejected(self):
        with pytest.raises(ConfigError):
            SynthParams(burst_rates=(0.0, 5.0, 5.0, 9.0))
        with pytest.raises(ConfigError):
            SynthParams(blob_dispersion=(10.0, 12.0, 8.0, 5.0))


class TestOracle:
    def test_fresh_clip_of_each_class_recovered(self):
        p = SynthParams(seed=6)
        for label in range(4):
            clip = generate_clip(label, p, clip_rng(6, 100 + label))
            assert oracle_label(clip, p) == label

    def test_agreement_over_many_clips(self):
        p = SynthParams(seed=7)
        agree = sum(oracle_label(generate_clip(i % 4, p, clip_rng(7, i)), p) == i % 4
                    for i in range(400))
        assert agree / 400 >= 0.99

    def test_real_clip_rejected(self):
        clip = ClipRecord(clip_id="x", label=0, source="manifest")
        with pytest.raises(UnsupportedError):
            oracle_label(clip)

    def test_midway_clip_breaks_toward_lower_intensity(self):
        # A coordinate exactly on a boundary classifies as the lower class.
        from uffia.data.synth import _classify
        label, conf = _classify(0.5, (0.1, 0.1, 0.1, 0.1))
        assert label == 0 and conf == 0.0
        label, _ = _classify(1.5, (0.1, 0.1, 0.1, 0.1))
        assert label == 1


class TestSyntheticDataset:
    def test_default_sizes_and_balance(self):
        ds = SyntheticDataset(SyntheticSpec())
        assert len(ds) == 1000
        for split, expected in (("train", 800), ("val", 100), ("test", 100)):
            idx = ds.indices(split)
            assert len(idx) == expected
            counts = Counter(ds.label_of(i) for i in idx)
            assert all(v == expected // 4 for v in counts.values())

    def test_load_is_deterministic(self):
        spec = SyntheticSpec(n_train=8, n_val=4, n_test=4, params=small_params(8))
        ds = SyntheticDataset(spec)
        a, b = ds.load(3), ds.load(3)
        np.testing.assert_array_equal(a.waveform.samples, b.waveform.samples)
        np.testing.assert_array_equal(a.frames, b.frames)
        assert a.label == 3 and a.split == "train"


class TestManifest:
    def write_dataset(self, tmp_path, n=8):
        p = small_params(9)
        records = []
        for i in range(n):
            clip = generate_clip(i % 4, p, clip_rng(9, i), clip_id=f"clip{i:03d}")
            class_dir = tmp_path / CLASS_NAMES[clip.label]
            audio, video = export_clip(clip, class_dir, packed=(i % 2 == 0))
            clip.audio_path, clip.video_path = audio, video
            records.append(clip)
        return records

    def test_roundtrip(self, tmp_path):
        records = self.write_dataset(tmp_path)
        manifest = tmp_path / "clips.csv"
        write_manifest(records, manifest)
        loaded = load_manifest(manifest)
        assert len(loaded) == len(records)
        assert [r.label for r in loaded] == [r.label for r in records]
        clip = load_clip_media(loaded[0])
        assert clip.waveform is not None and clip.frames is not None

    def test_header_only_manifest_is_empty(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("clip_id,audio_path,video_path,label,split\n")
        assert load_manifest(path) == []

    def test_missing_column_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("clip_id,audio_path,label,split\n")
        with pytest.raises(ManifestError, match="video_path"):
            load_manifest(path)

    def test_unknown_label_reports_line(self, tmp_path):
        records = self.write_dataset(tmp_path, n=2)
        manifest = tmp_path / "clips.csv"
        write_manifest(records, manifest)
        text = manifest.read_text().replace("Weak", "Mild")
        manifest.write_text(text)
        with pytest.raises(ManifestError, match=":3"):
            load_manifest(manifest)

    def test_dangling_path_reports_line(self, tmp_path):
        records = self.write_dataset(tmp_path, n=2)
        manifest = tmp_path / "clips.csv"
        write_manifest(records, manifest)
        (tmp_path / CLASS_NAMES[records[1].label] / "clip001.wav").unlink()
        with pytest.raises(ManifestError, match=":3"):
            load_manifest(manifest)

    def test_scan_class_directories(self, tmp_path):
        self.write_dataset(tmp_path, n=8)
        records = scan_class_directories(tmp_path)
        assert len(records) == 8
        counts = Counter(r.label for r in records)
        assert all(v == 2 for v in counts.values())

    def test_manifest_dataset_loads_media(self, tmp_path):
        records = self.write_dataset(tmp_path, n=4)
        manifest = tmp_path / "clips.csv"
        write_manifest(records, manifest)
        ds = ManifestDataset(load_manifest(manifest))
        clip = ds.load(1)
        assert clip.frames.shape[1] == 3


class TestFramesIO:
    def test_packed_roundtrip_lossless(self, tmp_path):
        p = small_params(10)
        clip = generate_clip(2, p, clip_rng(10, 0))
        path = tmp_path / "f.frames"
        save_frames_packed(path, clip.frames)
        np.testing.assert_array_equal(load_frames_packed(path),
                                      clip.frames.astype(np.float32))

    def test_png_roundtrip_lossless(self, tmp_path):
        p = small_params(11)
        clip = generate_clip(1, p, clip_rng(11, 0))
        save_frames_png(tmp_path / "pngs", clip.frames)
        np.testing.assert_allclose(load_frames_png(tmp_path / "pngs"),
                                   clip.frames, atol=1e-7)


class TestMakeSplits:
    def records(self, n=1000):
        return [ClipRecord(clip_id=f"c{i}", label=i % 4) for i in range(n)]

    def test_all_train(self):
        records = make_splits(self.records(40), (1.0, 0.0, 0.0), seed=0)
        assert all(r.split == "train" for r in records)

    def test_stratified_70_10_20(self):
        records = make_splits(self.records(1000), (0.7, 0.1, 0.2), seed=1)
        counts = Counter(r.split for r in records)
        assert counts == {"train": 700, "val": 100, "test": 200}
        for split, per_class in (("train", 175), ("val", 25), ("test", 50)):
            by_class = Counter(r.label for r in records if r.split == split)
            assert all(abs(v - per_class) <= 1 for v in by_class.values())

    def test_same_seed_identical(self):
        a = make_splits(self.records(200), (0.7, 0.1, 0.2), seed=2)
        b = make_splits(self.records(200), (0.7, 0.1, 0.2), seed=2)
        assert [r.split for r in a] == [r.split for r in b]

    def test_bad_fractions_rejected(self):
        with pytest.raises(ConfigError):
            make_splits(self.records(8), (0.5, 0.2, 0.2), seed=0)
