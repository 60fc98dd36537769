"""
Tests for the p-value sweeps: grid expansion, ROC metrics and the
length / attack trends of watermark detection.
"""

import numpy as np
import pytest

from wepa.core import lm
from wepa.schemas.requests import AttackKind, SweepConfig, SweepKind
from wepa.services import sweep
from wepa.services.sweep import SweepError


def markov_model(vocab: int = 16, seed: int = 99):
    stream = np.random.default_rng(seed).integers(0, vocab, size=5000).tolist()
    return lm.train_markov(stream, order=1, vocab_size=vocab)


def inversions(values):
    return sum(b > a for a, b in zip(values, values[1:]))


# ============================================================================
# GRID AND METRICS
# ============================================================================

class TestConditions:
    """Expansion of each experiment kind"""

    def test_length(self):
        config = SweepConfig(experiment="length", lengths=[4, 8])
        assert [c.m for c in sweep.conditions(config)] == [4, 8]

    def test_attack(self):
        config = SweepConfig(experiment="attack", attack_kinds=["substitute", "delete"], epsilons=[0.0, 0.1])
        grid = sweep.conditions(config)
        assert len(grid) == 4
        assert {(c.attack, c.epsilon) for c in grid} == {
            (AttackKind.SUBSTITUTE, 0.0), (AttackKind.SUBSTITUTE, 0.1),
            (AttackKind.DELETE, 0.0), (AttackKind.DELETE, 0.1),
        }

    def test_bitwidth_precision_at_least_bitwidth(self):
        config = SweepConfig(experiment="bitwidth", bitwidths=[1, 4, 8], bitwidth=2, precision=6)
        assert [(c.bitwidth, c.precision) for c in sweep.conditions(config)] == [(1, 6), (4, 6), (8, 8)]

    def test_lambda_and_degree(self):
        config = SweepConfig(experiment="lambda", lambdas=[4, 16])
        assert [c.lambda_ for c in sweep.conditions(config)] == [4, 16]
        config = SweepConfig(experiment="degree", degrees=[1, 2], **{"lambda": 8})
        assert [c.degree for c in sweep.conditions(config)] == [1, 2]

    def test_degree_must_fit_lambda(self):
        config = SweepConfig(experiment=SweepKind.DEGREE, degrees=[4], **{"lambda": 4})
        with pytest.raises(SweepError):
            sweep.conditions(config)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SweepConfig(epsilons=[1.5])
        with pytest.raises(ValueError):
            SweepConfig(bitwidth=2)


class TestRocMetrics:
    """ROC-AUC and TPR at 1% FPR from paired p-values"""

    def test_perfect_separation(self):
        marked = [0.01, 0.02, 0.03]
        null = [0.2, 0.5, 0.9, 0.7]
        assert sweep.roc_auc(marked, null) == pytest.approx(1.0)
        assert sweep.tpr_at_fpr(marked, null) == pytest.approx(1.0)

    def test_identical_arms(self):
        p = [0.1, 0.4, 0.6, 0.9]
        assert sweep.roc_auc(p, p) == pytest.approx(0.5)

    def test_strict_cut(self):
        null = [0.1 * i for i in range(1, 11)]
        marked = [0.05, 0.1, 0.5, 0.01]
        assert sweep.tpr_at_fpr(marked, null) == pytest.approx(0.5)

    def test_ties_and_larger_null_arm(self):
        assert sweep.roc_auc([0.2, 0.2], [0.2, 0.2]) == pytest.approx(0.5)
        assert sweep.roc_auc([0.1, 0.3], [0.3, 0.5]) == pytest.approx(0.875)
        null = [i / 200 for i in range(1, 201)]
        marked = [0.004, 0.01, 0.0149, 0.015, 0.5]
        assert sweep.tpr_at_fpr(marked, null) == pytest.approx(0.6)


# ============================================================================
# RUNS
# ============================================================================

class TestRunSweep:
    """run_sweep output shape and reproducibility"""

    def test_rows_and_seeds(self):
        config = SweepConfig(experiment="length", lengths=[5, 10], trials=4, null_samples=9,
                             vocab_size=4, **{"lambda": 8})
        rows, seeds = sweep.run_sweep(config)
        assert [(r.m, r.arm) for r in rows] == [(5, "watermarked"), (5, "null"), (10, "watermarked"), (10, "null")]
        assert rows[0].roc_auc is not None and rows[1].roc_auc is None
        assert all(r.p_q33 <= r.p_median <= r.p_q67 for r in rows)
        assert len(seeds["key_seeds"]) == 4
        comments = sweep.csv_comments(config, seeds)
        assert comments[0].startswith("experiment=length")
        assert any(line.startswith("detect_seed=") for line in comments)
        dicts = sweep.row_dicts(rows)
        assert set(sweep.SWEEP_FIELDS) == set(dicts[0])

    def test_reproducible(self):
        config = SweepConfig(experiment="attack", attack_kinds=["insert"], epsilons=[0.2], m=12,
                             trials=3, null_samples=9, vocab_size=4, **{"lambda": 8})
        a, _ = sweep.run_sweep(config)
        b, _ = sweep.run_sweep(config)
        assert sweep.row_dicts(a) == sweep.row_dicts(b)

    def test_null_arm_is_uniform(self):
        config = SweepConfig(experiment="length", lengths=[20], trials=100, null_samples=99,
                             vocab_size=8, **{"lambda": 16})
        rows, _ = sweep.run_sweep(config)
        null = [r for r in rows if r.arm == "null"][0]
        assert 0.3 <= null.p_median <= 0.7

    def test_model_path_resolved_against_config_dir(self, tmp_path):
        (tmp_path / "model.json").write_text(lm.categorical_spec([0.5, 0.5]).model_dump_json())
        config = SweepConfig(model_path="model.json")
        spec = sweep.resolve_model(config, base_dir=tmp_path)
        assert spec.vocab_size == 2


class TestTrends:
    """Median p-value falls with length and degrades gracefully under attack"""

    def test_length_trend(self):
        config = SweepConfig(
            experiment="length", model=markov_model(), lengths=[4, 8, 12, 16, 20, 50],
            trials=200, null_samples=199, include_null=False, **{"lambda": 64},
        )
        assert lm.entropy_rate(config.model, 20, 20, seed=0) >= 1.5
        rows, _ = sweep.run_sweep(config)
        medians = {r.m: r.p_median for r in rows}
        assert medians[20] < 0.05
        assert medians[50] < 0.01
        assert inversions([medians[m] for m in config.lengths]) <= 1

    def test_attack_trend(self):
        config = SweepConfig(
            experiment="attack", model=markov_model(), m=50, epsilons=[0.0, 0.1, 0.2],
            trials=100, null_samples=199, include_null=False, **{"lambda": 64},
        )
        rows, _ = sweep.run_sweep(config)
        for kind in AttackKind:
            arm = sorted((r for r in rows if r.attack == kind.value), key=lambda r: r.epsilon)
            medians = [r.p_median for r in arm]
            assert medians[1] < 0.05 and medians[2] < 0.05, kind
            assert sum(b < a for a, b in zip(medians, medians[1:])) <= 1


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
