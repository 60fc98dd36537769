"""
Tests for exponential minimum decoding and watermarked generation
"""

import math

import numpy as np
import pytest

from wepa.core import decode, lm, wkey
from wepa.core.decode import DecodeError, GenerationTrace
from wepa.core.wkey import KeyAutomaton


# ============================================================================
# BINARY EXPANSION
# ============================================================================

class TestBinaryExpansion:
    """binary_expand / bits_to_unit on the 2^c grid"""

    def test_zero(self):
        assert decode.binary_expand(0.0, 5) == [0, 0, 0, 0, 0]

    def test_direct_evaluation(self):
        assert decode.bits_to_unit([1, 0, 1]) == pytest.approx(5 / 8)

    def test_truncates_to_grid(self):
        assert decode.bits_to_unit(decode.binary_expand(0.3, 4)) == 0.25

    def test_exact_on_grid(self):
        for n in range(16):
            assert decode.bits_to_unit(decode.binary_expand(n / 16, 4)) == n / 16

    def test_out_of_range(self):
        with pytest.raises(DecodeError):
            decode.binary_expand(1.0, 3)
        with pytest.raises(DecodeError):
            decode.binary_expand(-0.1, 3)
        with pytest.raises(DecodeError):
            decode.bits_to_unit([0, 2])


# ============================================================================
# EXPONENTIAL MINIMUM SAMPLING
# ============================================================================

class TestGamma:
    """argmin_j pi_j / log(mu_j)"""

    def test_degenerate_distribution(self):
        for mu in [(0.1, 0.9), (0.9, 0.1), (0.0, 0.5)]:
            assert decode.gamma_exp_min(mu, [1.0, 0.0]) == 0

    def test_hand_example(self):
        assert 0.5 / math.log(0.9) == pytest.approx(-4.7456, abs=1e-3)
        assert decode.gamma_exp_min([0.9, 0.1], [0.5, 0.5]) == 0

    def test_zero_noise_is_disfavored(self):
        assert decode.gamma_exp_min([0.0, 0.5], [0.5, 0.5]) == 1
        assert decode.gamma_exp_min([0.0, 0.3], [0.0, 1.0]) == 1

    def test_ties_go_to_lowest_token(self):
        assert decode.gamma_exp_min([0.5, 0.5, 0.5], [0.2, 0.4, 0.4]) == 1
        assert decode.gamma_exp_min([0.0, 0.0], [0.5, 0.5]) == 0

    def test_accepts_noise_vector(self):
        xi = wkey.NoiseVector(np.array([0.25, 0.75]), precision=2)
        assert decode.gamma_exp_min(xi, [0.5, 0.5]) == 1

    def test_invalid_inputs(self):
        with pytest.raises(DecodeError):
            decode.gamma_exp_min([0.5, 0.5], [0.0, 0.0])
        with pytest.raises(DecodeError):
            decode.gamma_exp_min([0.5], [0.5, 0.5])
        with pytest.raises(DecodeError):
            decode.gamma_exp_min([1.0, 0.5], [0.5, 0.5])

    def test_preserves_distribution(self):
        pi = np.array([0.4, 0.3, 0.2, 0.1])
        rng = np.random.default_rng(17)
        mus = rng.random((100_000, 4))
        counts = np.zeros(4)
        for mu in mus:
            counts[decode.gamma_exp_min(mu, pi)] += 1
        assert 0.5 * np.abs(counts / counts.sum() - pi).sum() < 0.01


# ============================================================================
# WATERMARKED GENERATION
# ============================================================================

class TestGenerateWatermarked:
    """Algorithm-level behaviour of generation"""

    def test_zero_length(self):
        key = wkey.gen_key(8, 1, 4, 2, 2, seed=0)
        trace = decode.generate_watermarked(lm.uniform_spec(4), key, [], 0, rng=1)
        assert len(trace) == 0 and trace.states == [] and trace.noises == []

    def test_zero_entropy_model(self):
        key = wkey.gen_key(8, 2, 3, 1, 4, seed=0)
        trace = decode.generate_watermarked(lm.categorical_spec([1.0, 0.0, 0.0]), key, [], 20, rng=5)
        assert trace.tokens == [0] * 20

    def test_deterministic_after_initial_state(self):
        key = wkey.gen_key(16, 1, 8, 3, 3, seed=2)
        a = decode.generate_watermarked(lm.uniform_spec(8), key, [1], 30, rng=1, initial_state=5)
        b = decode.generate_watermarked(lm.uniform_spec(8), key, [1], 30, rng=2, initial_state=5)
        assert a.tokens == b.tokens
        assert a.states == b.states

    def test_same_seed_identical_trace(self):
        key = wkey.gen_key(16, 2, 8, 1, 4, seed=2)
        spec = lm.categorical_spec([0.3, 0.2, 0.1, 0.1, 0.1, 0.1, 0.05, 0.05])
        a = decode.generate_watermarked(spec, key, [], 40, rng=123)
        b = decode.generate_watermarked(spec, key, [], 40, rng=123)
        assert a.tokens == b.tokens and a.states == b.states
        assert all(np.array_equal(x.mu, y.mu) for x, y in zip(a.noises, b.noises))

    def test_trace_follows_key(self):
        key = wkey.gen_key(16, 3, 8, 2, 4, seed=9)
        trace = decode.generate_watermarked(lm.uniform_spec(8), key, [], 50, rng=4)
        trace.check_path(key)
        for q, xi in zip(trace.states, trace.noises):
            assert np.array_equal(np.floor(xi.mu * 4), key.grid[q])

    def test_vocab_mismatch(self):
        key = wkey.gen_key(4, 1, 4, 1, 1, seed=0)
        with pytest.raises(DecodeError):
            decode.generate_watermarked(lm.uniform_spec(5), key, [], 3, rng=0)

    def test_bad_initial_state(self):
        key = wkey.gen_key(4, 1, 4, 1, 1, seed=0)
        with pytest.raises(DecodeError):
            decode.generate_watermarked(lm.uniform_spec(4), key, [], 3, rng=0, initial_state=4)

    def test_distortion_free_over_keys(self):
        """First-token marginal over fresh keys matches the model"""
        probs = np.array([0.25, 0.2, 0.15, 0.12, 0.1, 0.08, 0.06, 0.04])
        spec = lm.categorical_spec(probs.tolist())
        model = lm.load_model(spec)
        rng = np.random.default_rng(31)
        trials = 100_000
        counts = np.zeros(8)
        for seed in range(trials):
            key = wkey.gen_key(2, 1, 8, None, None, seed=seed)
            trace = decode.generate_watermarked(model, key, [3], 1, rng=rng)
            counts[trace.tokens[0]] += 1
        assert 0.5 * np.abs(counts / trials - probs).sum() < 0.015


class TestTraceFile:
    """Trace serialization"""

    def test_noises_stored_with_free_bits(self):
        key = wkey.gen_key(8, 2, 4, 1, 3, seed=1)
        trace = decode.generate_watermarked(lm.uniform_spec(4), key, [], 10, rng=0)
        doc = trace.to_file(key, seed=0)
        assert doc.watermarked and doc.noises is not None
        again = GenerationTrace.from_file(doc, key)
        assert again.tokens == trace.tokens
        assert all(np.array_equal(x.mu, y.mu) for x, y in zip(again.noises, trace.noises))

    def test_noises_rederived_without_free_bits(self):
        key = wkey.gen_key(8, 1, 4, 2, 2, seed=1)
        trace = decode.generate_watermarked(lm.uniform_spec(4), key, [], 10, rng=0)
        doc = trace.to_file(key)
        assert doc.noises is None
        again = GenerationTrace.from_file(doc, key)
        assert all(np.array_equal(x.mu, y.mu) for x, y in zip(again.noises, trace.noises))

    def test_length_mismatch(self):
        with pytest.raises(DecodeError):
            GenerationTrace([0, 1], [0], [])


# ============================================================================
# DIVERSITY
# ============================================================================

class TestDiversity:
    """Distinct decodings grow with the key degree"""

    @staticmethod
    def diagonal_key(degree: int) -> KeyAutomaton:
        # state q decodes token q under a uniform model
        return KeyAutomaton(4, degree, 4, 2, 2, 0, 3 * np.eye(4, dtype=np.int64))

    def test_injective_key_reaches_every_path(self):
        from wepa.core.automata import count_paths

        spec = lm.uniform_spec(4)
        for degree in (1, 2):
            outputs = decode.enumerate_outputs(spec, self.diagonal_key(degree), [], 4)
            assert len(outputs) == count_paths(4, degree, 3)

    def test_degree_two_strictly_more(self):
        spec = lm.uniform_spec(4)
        one = decode.enumerate_outputs(spec, self.diagonal_key(1), [], 4)
        two = decode.enumerate_outputs(spec, self.diagonal_key(2), [], 4)
        assert one < two

    def test_free_bits_bound_and_samples_covered(self):
        from wepa.core.automata import count_paths

        spec = lm.uniform_spec(4)
        key = wkey.gen_key(4, 2, 4, 1, 2, seed=6)
        outputs = decode.enumerate_outputs(spec, key, [], 3)
        assert len(outputs) <= count_paths(4, 2, 2) * (2 ** 4) ** 3
        rng = np.random.default_rng(0)
        for _ in range(200):
            trace = decode.generate_watermarked(spec, key, [], 3, rng=rng)
            assert tuple(trace.tokens) in outputs

    def test_zero_length(self):
        key = wkey.gen_key(4, 1, 4, 2, 2, seed=0)
        assert decode.enumerate_outputs(lm.uniform_spec(4), key, [], 0) == {()}


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
