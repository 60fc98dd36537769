"""
Tests for the random edit attacks
"""

import numpy as np
import pytest

from wepa.schemas.requests import AttackKind, AttackSpec
from wepa.services import attacks
from wepa.services.attacks import AttackError

EPSILONS = [i / 10 for i in range(11)]


def sample_tokens(n: int, vocab: int = 8, seed: int = 0):
    return np.random.default_rng(seed).integers(0, vocab, size=n).tolist()


class TestCorrupt:
    """corrupt() length accounting and edit budget"""

    def test_zero_fraction_is_identity(self):
        y = sample_tokens(30)
        for kind in AttackKind:
            assert attacks.corrupt(y, AttackSpec(kind=kind, fraction=0.0, seed=1), 8) == y

    def test_full_deletion(self):
        y = sample_tokens(17)
        assert attacks.corrupt(y, AttackSpec(kind="delete", fraction=1.0, seed=1), 8) == []

    def test_delete_example(self):
        y = sample_tokens(50)
        out = attacks.corrupt(y, AttackSpec(kind="delete", fraction=0.2, seed=3), 8)
        assert len(out) == 40
        assert attacks.token_edit_distance(y, out) <= 10

    @pytest.mark.parametrize("length", [1, 10, 50])
    def test_length_accounting(self, length):
        y = sample_tokens(length, seed=length)
        for eps in EPSILONS:
            n = attacks.edit_count(length, eps)
            assert n == int(np.floor(eps * length))
            sub = attacks.corrupt(y, AttackSpec(kind="substitute", fraction=eps, seed=2), 8)
            dele = attacks.corrupt(y, AttackSpec(kind="delete", fraction=eps, seed=2), 8)
            ins = attacks.corrupt(y, AttackSpec(kind="insert", fraction=eps, seed=2), 8)
            assert len(sub) == length
            assert len(dele) == length - n
            assert len(ins) == length + n
            assert sum(a != b for a, b in zip(y, sub)) <= n
            for out in (sub, dele, ins):
                assert attacks.token_edit_distance(y, out) <= n

    def test_deletion_keeps_order(self):
        y = list(range(20))
        out = attacks.corrupt(y, AttackSpec(kind="delete", fraction=0.5, seed=4), 20)
        assert out == sorted(out)
        assert set(out) <= set(y)

    def test_insertion_keeps_original_subsequence(self):
        y = sample_tokens(25)
        out = attacks.corrupt(y, AttackSpec(kind="insert", fraction=0.4, seed=5), 8)
        it = iter(out)
        assert all(any(t == u for u in it) for t in y)

    def test_deterministic_per_seed(self):
        y = sample_tokens(40)
        for kind in AttackKind:
            spec = AttackSpec(kind=kind, fraction=0.3, seed=11)
            assert attacks.corrupt(y, spec, 8) == attacks.corrupt(y, spec, 8)

    def test_explicit_rng_overrides_seed(self):
        y = sample_tokens(40)
        spec = AttackSpec(kind="substitute", fraction=0.5, seed=11)
        a = attacks.corrupt(y, spec, 8, rng=np.random.default_rng(3))
        b = attacks.corrupt(y, spec, 8, rng=np.random.default_rng(3))
        assert a == b

    def test_rejects_out_of_vocabulary(self):
        with pytest.raises(AttackError):
            attacks.corrupt([0, 9], AttackSpec(kind="delete", fraction=0.5, seed=0), 4)

    def test_fraction_validated(self):
        with pytest.raises(ValueError):
            AttackSpec(kind="delete", fraction=1.5)


class TestEditDistance:
    """Unit-cost Levenshtein between token sequences"""

    def test_examples(self):
        assert attacks.token_edit_distance([], []) == 0
        assert attacks.token_edit_distance([1, 2, 3], []) == 3
        assert attacks.token_edit_distance([1, 2, 3], [1, 3]) == 1
        assert attacks.token_edit_distance([1, 2, 3], [3, 2, 1]) == 2
        assert attacks.token_edit_distance([0, 1, 0, 1], [1, 0, 1, 0]) == 2

    def test_symmetric(self):
        a, b = sample_tokens(12, seed=1), sample_tokens(9, seed=2)
        assert attacks.token_edit_distance(a, b) == attacks.token_edit_distance(b, a)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
