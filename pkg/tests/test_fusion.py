"""Attention machinery: MHA, cross-attention, bottleneck fusion, encoder."""
import math

import numpy as np
import pytest

from uffia.errors import ConfigError, InputError, ShapeError
from uffia.fusion import (apply_norm, av_fusion_block, bottleneck_fusion_layer,
                          cross_attention_layer, encoder_forward, fuse_half,
                          init_attention, init_av_fusion, init_bottleneck,
                          init_encoder, init_encoder_layer, mha)
from uffia.numerics import Tensor, make_rng
from uffia.params import named_tensors


def naive_single_head_attention(q, k, v, p):
    """Plain-numpy reference for n_heads=1 (row-wise softmax, no tricks)."""
    Q = q @ p.wq.data + p.bq.data
    K = k @ p.wk.data + p.bk.data
    V = v @ p.wv.data + p.bv.data
    scores = Q @ K.T / math.sqrt(q.shape[1])
    weights = np.zeros_like(scores)
    for i in range(scores.shape[0]):
        e = np.exp(scores[i] - scores[i].max())
        weights[i] = e / e.sum()
    return weights @ V @ p.wo.data + p.bo.data


def rand_params(dim, heads, seed):
    p = init_attention(dim, heads, make_rng(seed))
    rng = make_rng(seed + 1)
    for name, t in named_tensors(p).items():
        if name.startswith("b"):
            t.data = rng.standard_normal(t.shape) * 0.1
    return p


class TestMha:
    def test_single_token_self_attention_is_value_projection(self):
        # One key: softmax weight is exactly 1, so with identity output
        # projection the result is the token's value projection.
        dim = 8
        p = init_attention(dim, 2, make_rng(0))
        p.wo.data = np.eye(dim)
        token = Tensor(make_rng(1).standard_normal((1, dim)))
        out = mha(token, token, token, p)
        np.testing.assert_allclose(out.data, token.data @ p.wv.data + p.bv.data,
                                   atol=1e-12)

    def test_two_identical_keys_half_weight_each(self):
        dim = 8
        p = rand_params(dim, 2, 2)
        rng = make_rng(3)
        q = Tensor(rng.standard_normal((3, dim)))
        key = rng.standard_normal((1, dim))
        kv = Tensor(np.vstack([key, key]))
        _, weights = mha(q, kv, kv, p, return_weights=True)
        np.testing.assert_allclose(weights, 0.5, atol=1e-12)

    def test_matches_naive_oracle_single_head(self):
        dim = 6
        p = rand_params(dim, 1, 4)
        rng = make_rng(5)
        q = rng.standard_normal((4, dim))
        kv = rng.standard_normal((5, dim))
        out = mha(Tensor(q), Tensor(kv), Tensor(kv), p)
        np.testing.assert_allclose(out.data, naive_single_head_attention(q, kv, kv, p),
                                   atol=1e-10)

    def test_weights_row_stochastic(self):
        p = rand_params(16, 4, 6)
        rng = make_rng(7)
        for t_q, t_kv in [(3, 5), (1, 9), (7, 2)]:
            q = Tensor(rng.standard_normal((2, t_q, 16)))
            kv = Tensor(rng.standard_normal((2, t_kv, 16)))
            _, weights = mha(q, kv, kv, p, return_weights=True)
            assert weights.shape == (2, 4, t_q, t_kv)
            np.testing.assert_allclose(weights.sum(axis=-1), 1.0, atol=1e-6)
            assert (weights >= 0).all()

    def test_key_value_permutation_invariance(self):
        p = rand_params(8, 2, 8)
        rng = make_rng(9)
        q = rng.standard_normal((3, 8))
        kv = rng.standard_normal((6, 8))
        perm = make_rng(10).permutation(6)
        a = mha(Tensor(q), Tensor(kv), Tensor(kv), p)
        b = mha(Tensor(q), Tensor(kv[perm]), Tensor(kv[perm]), p)
        np.testing.assert_allclose(a.data, b.data, atol=1e-12)

    def test_query_permutation_equivariance(self):
        p = rand_params(8, 2, 11)
        rng = make_rng(12)
        q = rng.standard_normal((5, 8))
        kv = rng.standard_normal((4, 8))
        perm = make_rng(13).permutation(5)
        a = mha(Tensor(q), Tensor(kv), Tensor(kv), p)
        b = mha(Tensor(q[perm]), Tensor(kv), Tensor(kv), p)
        np.testing.assert_array_equal(a.data[perm], b.data)

    def test_shape_mismatch_rejected(self):
        p = init_attention(8, 2, make_rng(14))
        with pytest.raises(ShapeError):
            mha(Tensor(np.zeros((2, 7))), Tensor(np.zeros((2, 8))),
                Tensor(np.zeros((2, 8))), p)

    def test_attention_param_count_closed_form(self):
        d = 768
        p = init_attention(d, 8, make_rng(15))
        total = sum(t.size for t in named_tensors(p).values())
        assert total == 4 * d * d + 4 * d


class TestCrossAttention:
    def test_single_audio_token_dominates(self):
        dim = 8
        p = init_attention(dim, 2, make_rng(16))
        p.wo.data = np.eye(dim)
        video = Tensor(make_rng(17).standard_normal((5, dim)))
        audio = Tensor(make_rng(18).standard_normal((1, dim)))
        out = cross_attention_layer(video, audio, p)
        expected = np.repeat(audio.data @ p.wv.data + p.bv.data, 5, axis=0)
        np.testing.assert_allclose(out.data, expected, atol=1e-12)

    def test_output_count_equals_video_count(self):
        p = rand_params(8, 2, 19)
        rng = make_rng(20)
        for t_v, t_a in [(3, 7), (9, 1), (1, 4)]:
            out = cross_attention_layer(Tensor(rng.standard_normal((t_v, 8))),
                                        Tensor(rng.standard_normal((t_a, 8))), p)
            assert out.shape == (t_v, 8)

    def test_matches_naive_oracle(self):
        p = rand_params(6, 1, 21)
        rng = make_rng(22)
        video = rng.standard_normal((4, 6))
        audio = rng.standard_normal((3, 6))
        out = cross_attention_layer(Tensor(video), Tensor(audio), p)
        np.testing.assert_allclose(out.data,
                                   naive_single_head_attention(video, audio, audio, p),
                                   atol=1e-10)

    def test_empty_audio_rejected(self):
        p = init_attention(8, 2, make_rng(23))
        with pytest.raises(InputError):
            cross_attention_layer(Tensor(np.zeros((2, 8))), Tensor(np.zeros((0, 8))), p)


class TestBottleneck:
    def make_layer(self, dim=8, seed=24):
        rng = make_rng(seed)
        pv = init_encoder_layer(dim, 2, 16, rng)
        pa = init_encoder_layer(dim, 2, 16, rng)
        return pv, pa

    def test_frozen_bottleneck_isolates_audio_from_video(self):
        pv, pa = self.make_layer()
        rng = make_rng(25)
        z_a = Tensor(rng.standard_normal((4, 8)))
        z_f_const = Tensor(rng.standard_normal((2, 8)))
        for video_seed in (26, 27, 28):
            z_v = Tensor(make_rng(video_seed).standard_normal((5, 8)))
            fuse_half(z_v, z_f_const, pv)  # discarded: bottleneck frozen
            z_a_out, _ = fuse_half(z_a, z_f_const, pa)
            if video_seed == 26:
                reference = z_a_out.data.copy()
            else:
                np.testing.assert_array_equal(z_a_out.data, reference)

    def test_video_perturbation_reaches_audio_only_via_bottleneck(self):
        pv, pa = self.make_layer(seed=29)
        rng = make_rng(30)
        z_v = rng.standard_normal((5, 8))
        z_a = Tensor(rng.standard_normal((4, 8)))
        z_f = Tensor(rng.standard_normal((2, 8)))
        _, a_base, _ = bottleneck_fusion_layer(Tensor(z_v), z_a, z_f, pv, pa)
        z_v2 = z_v.copy()
        z_v2[0] += 1.0
        _, a_pert, _ = bottleneck_fusion_layer(Tensor(z_v2), z_a, z_f, pv, pa)
        assert not np.array_equal(a_base.data, a_pert.data)

    def test_canonical_config_accepted(self):
        tokens = init_bottleneck(2, 768, make_rng(31))
        assert tokens.tokens.shape == (2, 768)

    def test_zero_tokens_rejected(self):
        with pytest.raises(ConfigError):
            init_bottleneck(0, 768, make_rng(32))
        pv, pa = self.make_layer(seed=33)
        with pytest.raises(ConfigError):
            bottleneck_fusion_layer(Tensor(np.zeros((2, 8))), Tensor(np.zeros((2, 8))),
                                    Tensor(np.zeros((0, 8))), pv, pa)


class TestAvFusionBlock:
    def test_zero_audio_contributes_nothing(self):
        p = init_av_fusion(8, 2, make_rng(34))
        video = Tensor(make_rng(35).standard_normal((5, 8)))
        audio = Tensor(np.zeros((3, 8)))
        # Freshly initialized biases are zero; make the contract explicit.
        p.cross_attn.bv.data[:] = 0.0
        p.cross_attn.bo.data[:] = 0.0
        out = av_fusion_block(video, audio, p)
        normed = apply_norm(video, p.norm_self)
        s = video.data + mha(normed, normed, normed, p.self_attn).data
        np.testing.assert_array_equal(out.data, s)

    def test_output_shape(self):
        p = init_av_fusion(8, 2, make_rng(36))
        rng = make_rng(37)
        out = av_fusion_block(Tensor(rng.standard_normal((17, 8))),
                              Tensor(rng.standard_normal((6, 8))), p)
        assert out.shape == (17, 8)

    def test_audio_perturbation_changes_output(self):
        p = init_av_fusion(8, 2, make_rng(38))
        rng = make_rng(39)
        video = Tensor(rng.standard_normal((4, 8)))
        audio = rng.standard_normal((3, 8))
        a = av_fusion_block(video, Tensor(audio), p)
        b = av_fusion_block(video, Tensor(audio + 0.5), p)
        assert not np.array_equal(a.data, b.data)


class TestEncoder:
    def test_zero_layers_identity_up_to_final_norm(self):
        enc = init_encoder(8, 2, 16, 0, make_rng(40))
        x = Tensor(make_rng(41).standard_normal((5, 8)))
        out = encoder_forward(x, enc)
        np.testing.assert_array_equal(out.data, apply_norm(x, enc.final_norm).data)

    def test_token_permutation_equivariance(self):
        enc = init_encoder(8, 2, 16, 2, make_rng(42))
        x = make_rng(43).standard_normal((6, 8))
        perm = make_rng(44).permutation(6)
        a = encoder_forward(Tensor(x), enc)
        b = encoder_forward(Tensor(x[perm]), enc)
        np.testing.assert_allclose(a.data[perm], b.data, atol=1e-10)

    def test_parameter_count_closed_form(self):
        d, f, heads, layers = 768, 1024, 8, 6
        enc = init_encoder(d, heads, f, layers, make_rng(45))
        per_layer = (4 * d * d + 4 * d) + 2 * (2 * d) + (d * f + f + f * d + d)
        expected = layers * per_layer + 2 * d
        total = sum(t.size for t in named_tensors(enc).values())
        assert total == expected
