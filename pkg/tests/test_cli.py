"""CLI dispatch, exit codes, end-to-end smoke, reproduction closure."""
import json

import pytest

from uffia.cli import main

TINY_DOC = {
    "model_kind": "uffia",
    "seed": 5,
    "model": {"dim": 32, "n_heads": 2, "n_layers": 1, "ffn_dim": 48,
              "image_size": 32, "native_frames": 8, "n_frames": 2,
              "mel_bins": 64, "mel_frames": 128, "simpf_k": 0.5,
              "audio_channels": [4, 8], "audio_time_pools": [2, 2],
              "audio_freq_pools": [2, 2], "t_audio": 8,
              "audio_mlp_hidden": 32, "head_hidden": 32},
    "train": {"epochs": 2, "batch_size": 8, "lr": 1e-3, "mode": "mixed"},
    "data": {"n_train": 16, "n_val": 8, "n_test": 8},
}


@pytest.fixture()
def tiny_config_path(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(TINY_DOC))
    return str(path)


class TestDispatch:
    def test_help_exits_zero(self):
        with pytest.raises(SystemExit) as exc:
            main(["--help"])
        assert exc.value.code == 0

    def test_unknown_verb_exits_two(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_malformed_config_exits_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"model_kind": "made-up"}))
        code = main(["train", "--config", str(bad), "--out", str(tmp_path / "o")])
        assert code == 1
        assert "model_kind" in capsys.readouterr().err

    def test_missing_config_file_exits_one(self, tmp_path, capsys):
        code = main(["train", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "o")])
        assert code == 1


class TestTrainVerb:
    def test_one_epoch_override_run(self, tiny_config_path, tmp_path, capsys):
        out = tmp_path / "run"
        code = main(["train", "--config", tiny_config_path,
                     "--set", "train.epochs=1", "--out", str(out)])
        assert code == 0
        assert (out / "checkpoint.bin").exists()
        assert (out / "metrics.csv").exists()
        echoed = json.loads((out / "run.json").read_text())
        assert echoed["config"]["train"]["epochs"] == 1

    def test_rerun_from_echoed_config_reproduces_bitwise(self, tiny_config_path, tmp_path):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        assert main(["train", "--config", tiny_config_path, "--set",
                     "train.epochs=1", "--out", str(out_a)]) == 0
        assert main(["train", "--config", str(out_a / "run.json"),
                     "--out", str(out_b)]) == 0
        assert (out_a / "checkpoint.bin").read_bytes() == \
            (out_b / "checkpoint.bin").read_bytes()
        assert (out_a / "metrics.csv").read_bytes() == \
            (out_b / "metrics.csv").read_bytes()

    def test_inputs_not_mutated(self, tiny_config_path, tmp_path):
        before = open(tiny_config_path, "rb").read()
        main(["train", "--config", tiny_config_path, "--set", "train.epochs=1",
              "--out", str(tmp_path / "run")])
        assert open(tiny_config_path, "rb").read() == before


class TestSynthManifestFlow:
    def test_synth_then_eval_flow(self, tiny_config_path, tmp_path):
        data_dir = tmp_path / "dataset"
        code = main(["synth", "--config", tiny_config_path, "--out", str(data_dir)])
        assert code == 0
        manifest = data_dir / "manifest.csv"
        assert manifest.exists()
        assert len(list(data_dir.glob("*/*.wav"))) == 32

        run_dir = tmp_path / "run"
        assert main(["train", "--config", tiny_config_path, "--set",
                     "train.epochs=1", "--out", str(run_dir)]) == 0
        eval_dir = tmp_path / "eval"
        code = main(["eval", "--config", tiny_config_path,
                     "--checkpoint", str(run_dir / "checkpoint.bin"),
                     "--out", str(eval_dir)])
        assert code == 0
        result = json.loads((eval_dir / "run.json").read_text())["result"]
        assert 0.0 <= result["accuracy"] <= 1.0

    def test_manifest_scan_and_split(self, tiny_config_path, tmp_path):
        data_dir = tmp_path / "dataset"
        main(["synth", "--config", tiny_config_path, "--out", str(data_dir)])
        out = tmp_path / "scan"
        code = main(["manifest", "--root", str(data_dir), "--out", str(out),
                     "--split", "0.5,0.25,0.25", "--seed", "1"])
        assert code == 0
        lines = (out / "manifest.csv").read_text().strip().splitlines()
        assert len(lines) == 33  # header + 32 clips

    def test_sweep_writes_csv(self, tiny_config_path, tmp_path):
        run_dir = tmp_path / "run"
        main(["train", "--config", tiny_config_path, "--set", "train.epochs=1",
              "--out", str(run_dir)])
        sweep_dir = tmp_path / "sweep"
        code = main(["sweep", "--config", tiny_config_path,
                     "--checkpoint", str(run_dir / "checkpoint.bin"),
                     "--out", str(sweep_dir), "--snrs=-10,0,20"])
        assert code == 0
        lines = (sweep_dir / "sweep.csv").read_text().strip().splitlines()
        assert lines[0] == "snr_db,accuracy"
        assert len(lines) == 4

    def test_preprocess_writes_mel_cache(self, tiny_config_path, tmp_path):
        out = tmp_path / "cache"
        code = main(["preprocess", "--config", tiny_config_path, "--out", str(out)])
        assert code == 0
        caches = sorted(out.glob("mel_*.bin"))
        assert len(caches) == 32
        from uffia.numerics import load_container
        arrays, header = load_container(caches[0], expect_kind="mel-cache")
        assert arrays["mel"].shape == (64, 64)

    def test_flops_verb_reports_convention(self, tiny_config_path, tmp_path, capsys):
        out = tmp_path / "flops"
        code = main(["flops", "--config", tiny_config_path, "--out", str(out)])
        assert code == 0
        report = json.loads((out / "run.json").read_text())["result"]
        assert "MAC=2" in report["convention"]
        assert report["flops_AV"] > report["flops_A"]
