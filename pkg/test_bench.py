"""
Tests for detection timing and the block-alignment baseline stand-in
"""

import numpy as np
import pytest

from wepa.core import decode, lm, wkey
from wepa.schemas.requests import BenchGrid
from wepa.services import bench
from wepa.services.bench import BenchError


class TestBaseline:
    """baseline_block_scores / baseline_block_detect"""

    def test_unit_block_is_per_token_matching(self):
        key = wkey.gen_key(6, 1, 5, None, None, seed=2)
        y = [0, 4, 2, 2, 1, 3, 0]
        scores = bench.baseline_block_scores(y, key.noise, 1)
        table = np.log1p(-key.noise)
        expected = [np.mean([table[(s + j) % 6, t] for j, t in enumerate(y)]) for s in range(6)]
        assert np.allclose(scores, expected)
        assert bench.baseline_block_detect(y, key.noise, 1) == pytest.approx(min(expected))

    def test_accepts_noise_vectors(self):
        key = wkey.gen_key(4, 1, 3, 2, 2, seed=0)
        rows = [wkey.NoiseVector(key.noise[q]) for q in range(4)]
        y = [0, 1, 2, 1, 0]
        assert np.allclose(bench.baseline_block_scores(y, rows, 2), bench.baseline_block_scores(y, key.noise, 2))

    def test_deterministic(self):
        key = wkey.gen_key(16, 1, 8, None, None, seed=4)
        y = np.random.default_rng(1).integers(0, 8, size=40).tolist()
        assert bench.baseline_block_detect(y, key.noise, 5) == bench.baseline_block_detect(y, key.noise, 5)

    def test_true_shift_scores_below_median(self):
        key = wkey.gen_key(64, 1, 16, None, None, seed=7)
        trace = decode.generate_watermarked(lm.uniform_spec(16), key, [], 80, rng=3, initial_state=10)
        scores = bench.baseline_block_scores(trace.tokens, key.noise, 4)
        assert scores[11] < np.median(scores)
        assert int(np.argmin(scores)) == 11

    def test_block_larger_than_sequence(self):
        key = wkey.gen_key(4, 1, 3, None, None, seed=0)
        with pytest.raises(BenchError):
            bench.baseline_block_detect([0, 1], key.noise, 3)
        with pytest.raises(BenchError):
            bench.baseline_block_detect([0, 5], key.noise, 1)


class TestTiming:
    """time_call and slope fitting"""

    def test_time_call_samples(self):
        calls = []
        median, samples = bench.time_call(lambda: calls.append(1), repeats=5, warmup=2)
        assert len(calls) == 7
        assert len(samples) == 5
        assert median == int(np.median(samples))
        assert all(s >= 0 for s in samples)

    def test_interleaved_rounds(self):
        order = []
        fns = [lambda: order.append("a"), lambda: order.append("b")]
        samples = bench.time_interleaved(fns, repeats=3, warmup=1)
        assert order == ["a", "b"] * 4
        assert [len(s) for s in samples] == [3, 3]

    def test_loglog_slope_exact_power_law(self):
        assert bench.loglog_slope([1, 2, 4, 8], [3, 12, 48, 192]) == pytest.approx(2.0)
        with pytest.raises(BenchError):
            bench.loglog_slope([1], [1])

    def test_report_structure(self):
        grid = BenchGrid(ms=[16, 32], lambdas=[8, 16], base_m=16, base_lambda=8,
                         ks=[2, 4], baseline_m=16, baseline_lambda=8, repeats=1, warmup=0)
        report = bench.scaling_report(grid)
        assert len(report.rows) == 6
        assert set(report.slopes) == {"lev_dp_vs_m", "lev_dp_vs_lambda", "baseline_vs_k"}
        assert [r.detector for r in report.rows].count(bench.BASELINE_LABEL) == 2
        assert all(len(r.samples) == 1 for r in report.rows)
        assert all(r.min_ns <= r.median_ns for r in report.rows)

    def test_min_statistic_and_worker_processes(self):
        grid = BenchGrid(ms=[16, 32], lambdas=[8, 16], base_m=16, base_lambda=8, ks=[2],
                         baseline_m=16, baseline_lambda=8, repeats=2, warmup=0, slope_statistic="min")
        report = bench.scaling_report(grid, workers=2)
        assert set(report.slopes) == {"lev_dp_vs_m", "lev_dp_vs_lambda"}
        assert all(len(r.samples) == 2 and r.min_ns == min(r.samples) for r in report.rows)

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            BenchGrid(ks=[8, 300], baseline_m=256)


class TestScaling:
    """Complexity class of lev_dp and of the baseline stand-in"""

    GRID = BenchGrid(ms=[512, 1024, 2048], lambdas=[256, 512, 1024], base_m=512, base_lambda=256,
                     ks=[8, 16, 32], baseline_m=256, baseline_lambda=256, repeats=5, warmup=1)

    def test_slopes_and_repeat_stability(self):
        first = bench.scaling_report(self.GRID)
        second = bench.scaling_report(self.GRID)
        for report in (first, second):
            assert 0.9 <= report.slopes["lev_dp_vs_m"] <= 1.1
            assert 0.9 <= report.slopes["lev_dp_vs_lambda"] <= 1.1
            assert 1.8 <= report.slopes["baseline_vs_k"] <= 2.2
        for name, value in first.slopes.items():
            assert abs(second.slopes[name] - value) <= 0.1, name

    def test_doubling_block_size(self):
        key = wkey.gen_key(256, 1, 16, None, None, seed=1)
        y = np.random.default_rng(2).integers(0, 16, size=256).tolist()
        fns = [lambda k=k: bench.baseline_block_detect(y, key.noise, k) for k in (8, 16, 32)]
        medians = [np.median(s) for s in bench.time_interleaved(fns, repeats=5, warmup=1)]
        for small, large in zip(medians, medians[1:]):
            assert 3.2 <= large / small <= 5.0


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
