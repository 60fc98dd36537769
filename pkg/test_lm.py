"""
Tests for the toy language models
"""

import numpy as np
import pytest
from pydantic import ValidationError

from wepa.core import lm
from wepa.core.lm import ModelError
from wepa.schemas.documents import ModelKind, ModelSpec


@pytest.fixture
def markov_spec():
    rng = np.random.default_rng(5)
    stream = rng.integers(0, 6, size=2000).tolist()
    return lm.train_markov(stream, order=2, alpha=0.1, vocab_size=6)


class TestNextDist:
    """next_dist for every model kind"""

    def test_uniform(self):
        dist = lm.next_dist(lm.uniform_spec(4), [1, 2, 3])
        assert np.allclose(dist, 0.25)

    def test_fixed_categorical(self):
        spec = lm.categorical_spec([0.4, 0.3, 0.2, 0.1])
        assert np.allclose(lm.next_dist(spec, []), [0.4, 0.3, 0.2, 0.1])
        assert np.allclose(lm.next_dist(spec, [3, 3]), [0.4, 0.3, 0.2, 0.1])

    def test_markov_counts_transitions(self):
        tokens = lm.tokenize_text("ababab")
        spec = lm.train_markov([t - ord("a") for t in tokens], order=1, alpha=0.0, vocab_size=2)
        dist = lm.next_dist(spec, [0])
        assert dist[1] == pytest.approx(1.0)
        assert dist[0] == pytest.approx(0.0)

    def test_markov_unseen_context_uses_order_zero_row(self):
        spec = lm.train_markov([0, 0, 0, 1], order=1, alpha=0.0, vocab_size=3)
        model = lm.load_model(spec)
        assert np.allclose(model.next_dist([2]), [0.75, 0.25, 0.0])
        assert np.allclose(model.next_dist([]), [0.75, 0.25, 0.0])

    def test_valid_distributions(self, markov_spec):
        rng = np.random.default_rng(0)
        models = [lm.uniform_spec(6), lm.categorical_spec([0.5, 0.1, 0.1, 0.1, 0.1, 0.1]), markov_spec]
        for spec in models:
            model = lm.load_model(spec)
            for _ in range(10_000):
                prefix = rng.integers(0, 6, size=rng.integers(0, 5)).tolist()
                dist = model.next_dist(prefix)
                assert dist.shape == (6,)
                assert np.all(dist >= 0)
                assert abs(dist.sum() - 1.0) < 1e-9

    def test_markov_smoothing_has_full_support(self, markov_spec):
        dist = lm.next_dist(markov_spec, [1, 2])
        assert np.all(dist > 0)


class TestModelSpec:
    """Validation of model documents"""

    def test_probabilities_must_sum_to_one(self):
        with pytest.raises(ValidationError):
            ModelSpec(kind=ModelKind.FIXED, vocab_size=2, probs=[0.5, 0.4])

    def test_context_order_checked(self):
        with pytest.raises(ValidationError):
            ModelSpec(kind=ModelKind.MARKOV, vocab_size=2, order=1, counts={"0,1": {0: 1}})

    def test_json_round_trip(self, markov_spec):
        again = ModelSpec.model_validate_json(markov_spec.model_dump_json())
        assert again == markov_spec
        assert np.allclose(lm.next_dist(again, [3, 4]), lm.next_dist(markov_spec, [3, 4]))


class TestGeneratePlain:
    """Autoregressive sampling"""

    def test_zero_length(self):
        assert lm.generate_plain(lm.uniform_spec(3), [], 0, seed=1) == []

    def test_degenerate_distribution(self):
        spec = lm.categorical_spec([1.0, 0.0, 0.0])
        assert lm.generate_plain(spec, [], 5, seed=3) == [0, 0, 0, 0, 0]

    def test_reproducible(self, markov_spec):
        a = lm.generate_plain(markov_spec, [1], 50, seed=9)
        b = lm.generate_plain(markov_spec, [1], 50, seed=9)
        assert a == b

    def test_uniform_frequency(self):
        tokens = np.array(lm.generate_plain(lm.uniform_spec(2), [], 100_000, seed=42))
        assert 0.49 <= np.mean(tokens == 0) <= 0.51

    def test_marginals_match_categorical(self):
        probs = np.array([0.4, 0.3, 0.2, 0.1])
        tokens = lm.generate_plain(lm.categorical_spec(probs.tolist()), [], 100_000, seed=7)
        freq = np.bincount(tokens, minlength=4) / len(tokens)
        assert 0.5 * np.abs(freq - probs).sum() < 0.01

    def test_rejects_bad_input(self):
        with pytest.raises(ModelError):
            lm.generate_plain(lm.uniform_spec(2), [], -1, seed=0)
        with pytest.raises(ModelError):
            lm.generate_plain(lm.uniform_spec(2), [5], 3, seed=0)


class TestEntropyRate:
    """Monte-Carlo entropy per token"""

    def test_uniform_binary(self):
        assert lm.entropy_rate(lm.uniform_spec(2), 10, 20, seed=0) == pytest.approx(1.0, abs=0.01)

    def test_degenerate(self):
        assert lm.entropy_rate(lm.categorical_spec([1.0, 0.0]), 5, 10, seed=0) == pytest.approx(0.0)

    def test_three_symbol(self):
        spec = lm.categorical_spec([0.5, 0.25, 0.25])
        assert lm.entropy_rate(spec, 5, 10, seed=0) == pytest.approx(1.5, abs=0.01)

    def test_invalid_counts(self):
        with pytest.raises(ModelError):
            lm.entropy_rate(lm.uniform_spec(2), 0, 10)


class TestTraining:
    """train_markov"""

    def test_byte_tokens(self):
        assert lm.tokenize_text("hi") == [104, 105]

    def test_vocab_inferred(self):
        spec = lm.train_markov([0, 3, 1], order=1)
        assert spec.vocab_size == 4

    def test_out_of_vocabulary(self):
        with pytest.raises(ModelError):
            lm.train_markov([0, 9], order=1, vocab_size=4)

    def test_bad_order(self):
        with pytest.raises(ModelError):
            lm.train_markov([0, 1], order=-1)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
