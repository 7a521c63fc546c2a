"""Distillation loss reductions, teacher contracts, freeze guarantees."""
import math

import numpy as np
import pytest

from uffia.distill import (DistillBatch, KdConfig, TeacherConfig, build_teacher,
                           distill_step, freeze, kd_loss, load_teacher,
                           save_teacher)
from uffia.errors import ConfigError, ContractError
from uffia.numerics import (AdamState, Tensor, backward, finite_difference_check,
                            make_rng, ops)


def softmax_rows(z):
    z = np.asarray(z, dtype=float)
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def kd_oracle(z_s, z_t, label, lam, tau):
    """Plain-python evaluation of the loss formula for one sample."""
    p = softmax_rows(z_s)[0]
    q = softmax_rows(np.asarray(z_t, dtype=float) / tau)[0]
    ce = -math.log(p[label])
    kl = float(sum(pi * math.log(pi / qi) for pi, qi in zip(p, q)))
    return lam * ce + (1 - lam) * kl


class TestKdLoss:
    def test_lambda_one_reduces_to_cross_entropy(self):
        rng = make_rng(0)
        z_s = Tensor(rng.standard_normal((5, 4)))
        z_t = rng.standard_normal((5, 4))
        labels = rng.integers(0, 4, 5)
        loss = kd_loss(z_s, z_t, labels, KdConfig(lam=1.0))
        ce = ops.cross_entropy(z_s, labels)
        assert abs(loss.item() - ce.item()) < 1e-12

    def test_matched_distributions_zero_kl(self):
        rng = make_rng(1)
        z_t = rng.standard_normal((3, 4))
        tau = 2.5
        z_s = Tensor(z_t / tau)
        labels = [0, 1, 2]
        lam = 0.5
        loss = kd_loss(z_s, z_t, labels, KdConfig(lam=lam, tau=tau))
        ce = ops.cross_entropy(z_s, labels)
        assert abs(loss.item() - lam * ce.item()) < 1e-9

    def test_two_class_hand_case(self):
        z_s, z_t, label, lam, tau = [1.0, 0.0], [2.0, 0.0], 0, 0.5, 2.5
        loss = kd_loss(Tensor([z_s]), np.array([z_t]), [label],
                       KdConfig(lam=lam, tau=tau))
        assert abs(loss.item() - kd_oracle([z_s], [z_t], label, lam, tau)) < 1e-6

    def test_nonnegative_on_random_batches(self):
        rng = make_rng(2)
        for _ in range(10):
            z_s = Tensor(rng.standard_normal((4, 4)) * 3)
            z_t = rng.standard_normal((4, 4)) * 3
            loss = kd_loss(z_s, z_t, rng.integers(0, 4, 4), KdConfig())
            assert loss.item() >= 0.0

    def test_conventional_direction_matches_its_formula(self):
        rng = make_rng(3)
        z_s = rng.standard_normal((1, 4))
        z_t = rng.standard_normal((1, 4))
        tau = 2.5
        loss = kd_loss(Tensor(z_s), z_t, [1],
                       KdConfig(lam=0.0, tau=tau, direction="teacher-to-student"))
        p = softmax_rows(z_s)[0]
        q = softmax_rows(z_t / tau)[0]
        expected = float(sum(qi * math.log(qi / pi) for qi, pi in zip(q, p)))
        assert abs(loss.item() - expected) < 1e-9

    def test_gradient_matches_finite_differences(self):
        rng = make_rng(4)
        z_s = Tensor(rng.standard_normal((3, 4)), requires_grad=True)
        z_t = rng.standard_normal((3, 4))
        labels = [0, 2, 3]
        cfg = KdConfig(lam=0.5, tau=2.5)
        err = finite_difference_check(lambda: kd_loss(z_s, z_t, labels, cfg),
                                      {"z_s": z_s}, h=1e-5)
        assert err < 1e-4

    def test_bad_temperature_rejected(self):
        with pytest.raises(ConfigError):
            KdConfig(tau=0.0)
        with pytest.raises(ConfigError):
            KdConfig(tau=-1.0)

    def test_bad_lambda_rejected(self):
        with pytest.raises(ConfigError):
            KdConfig(lam=1.5)


AUDIO_CFG = TeacherConfig(kind="audio-conv", mel_frames=32, mel_bins=32,
                          audio_channels=(4, 8), hidden=16)
VIDEO_CFG = TeacherConfig(kind="video-sep3d", native_frames=4, image_size=16,
                          video_channels=(4, 8))


class TestTeachers:
    def test_audio_teacher_deterministic(self):
        teacher = build_teacher(AUDIO_CFG, seed=5)
        mel = make_rng(6).standard_normal((2, 32, 32))
        a = teacher.forward(mel).data
        b = teacher.forward(mel).data
        np.testing.assert_array_equal(a, b)
        assert a.shape == (2, 4)

    def test_video_teacher_shapes(self):
        teacher = build_teacher(VIDEO_CFG, seed=7)
        frames = make_rng(8).random((2, 4, 3, 16, 16))
        logits = teacher.forward(frames)
        assert logits.shape == (2, 4)

    def test_compressed_mel_rejected(self):
        teacher = build_teacher(AUDIO_CFG, seed=9)
        with pytest.raises(ContractError):
            teacher.forward(np.zeros((1, 16, 32)))

    def test_subsampled_frames_rejected(self):
        teacher = build_teacher(VIDEO_CFG, seed=10)
        with pytest.raises(ContractError):
            teacher.forward(np.zeros((1, 2, 3, 16, 16)))

    def test_frozen_teacher_receives_no_gradient(self):
        teacher = build_teacher(AUDIO_CFG, seed=11)
        freeze(teacher)
        mel = make_rng(12).standard_normal((2, 32, 32))
        logits = teacher.forward(mel)
        assert not logits.requires_grad
        for t in teacher.params().values():
            assert t.grad is None and not t.requires_grad

    def test_save_load_roundtrip(self, tmp_path):
        teacher = build_teacher(AUDIO_CFG, seed=13)
        mel = make_rng(14).standard_normal((1, 32, 32))
        expected = teacher.forward(mel).data
        path = tmp_path / "teacher.bin"
        save_teacher(path, teacher)
        loaded = load_teacher(path)
        np.testing.assert_array_equal(loaded.forward(mel).data, expected)
        assert all(not t.requires_grad for t in loaded.params().values())


class TestDistillStep:
    def test_teacher_mode_mismatch_rejected(self):
        from uffia.model import ModelConfig, UffiaModel
        cfg = ModelConfig(dim=16, n_heads=2, n_layers=1, ffn_dim=24, image_size=32,
                          n_frames=2, native_frames=4, mel_bins=32, mel_frames=32,
                          simpf_k=1.0, audio_channels=(4, 8), audio_time_pools=(2, 2),
                          audio_freq_pools=(2, 2), t_audio=4, audio_mlp_hidden=16,
                          head_hidden=16)
        student = UffiaModel(cfg, seed=15)
        teacher = build_teacher(AUDIO_CFG, seed=16)
        freeze(teacher)
        batch = DistillBatch(labels=np.array([0]))
        with pytest.raises(ConfigError):
            distill_step(student, teacher, batch, KdConfig(), AdamState(), mode="V")
        with pytest.raises(ConfigError):
            distill_step(student, teacher, batch, KdConfig(), AdamState(), mode="AV")

    def test_teacher_params_bit_identical_across_steps(self):
        from uffia.model import ModelConfig, UffiaModel
        cfg = ModelConfig(dim=16, n_heads=2, n_layers=1, ffn_dim=24, image_size=32,
                          n_frames=2, native_frames=4, mel_bins=32, mel_frames=32,
                          simpf_k=1.0, audio_channels=(4, 8), audio_time_pools=(2, 2),
                          audio_freq_pools=(2, 2), t_audio=4, audio_mlp_hidden=16,
                          head_hidden=16)
        student = UffiaModel(cfg, seed=17)
        teacher = build_teacher(AUDIO_CFG, seed=18)
        freeze(teacher)
        before = {k: v.data.copy() for k, v in teacher.params().items()}
        rng = make_rng(19)
        state = AdamState(learning_rate=1e-3)
        for _ in range(3):
            batch = DistillBatch(labels=rng.integers(0, 4, 2),
                                 student_audio=rng.standard_normal((2, 32, 32)),
                                 teacher_audio=rng.standard_normal((2, 32, 32)))
            loss = distill_step(student, teacher, batch, KdConfig(), state, mode="A")
            assert math.isfinite(loss) and loss >= 0.0
        for k, v in teacher.params().items():
            np.testing.assert_array_equal(v.data, before[k])

    def test_lambda_one_step_equals_supervised_step(self):
        from uffia.model import ModelConfig, UffiaModel
        cfg = ModelConfig(dim=16, n_heads=2, n_layers=1, ffn_dim=24, image_size=32,
                          n_frames=2, native_frames=4, mel_bins=32, mel_frames=32,
                          simpf_k=1.0, audio_channels=(4, 8), audio_time_pools=(2, 2),
                          audio_freq_pools=(2, 2), t_audio=4, audio_mlp_hidden=16,
                          head_hidden=16)
        rng = make_rng(20)
        mel = rng.standard_normal((2, 32, 32))
        full = rng.standard_normal((2, 32, 32))
        labels = np.array([1, 3])

        teacher = build_teacher(AUDIO_CFG, seed=21)
        freeze(teacher)
        kd_student = UffiaModel(cfg, seed=22)
        batch = DistillBatch(labels=labels, student_audio=mel, teacher_audio=full)
        distill_step(kd_student, teacher, batch, KdConfig(lam=1.0),
                     AdamState(learning_rate=1e-3), mode="A")

        plain = UffiaModel(cfg, seed=22)
        loss = ops.cross_entropy(plain.forward(mel, None, mode="A").logits, labels)
        backward(loss)
        from uffia.numerics import adam_step
        adam_step(plain.params(), AdamState(learning_rate=1e-3))

        kd_params = kd_student.params()
        for name, t in plain.params().items():
            np.testing.assert_array_equal(t.data, kd_params[name].data)
