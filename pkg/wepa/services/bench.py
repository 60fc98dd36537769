"""
Bench Service: detection timing and scaling fits.

Times lev_dp against a block-alignment baseline. The baseline is a
complexity stand-in for cyclic-key-sequence detection with Θ(λ·n·k²) cost,
not a reimplementation of it.
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Dict, List, Sequence, Tuple, Union

import numpy as np

from wepa.core.detect import lev_dp
from wepa.core.wkey import KeyAutomaton, NoiseVector, gen_key
from wepa.schemas.reports import BenchRow, ScalingReport
from wepa.schemas.requests import BenchGrid, CostParams
from wepa.utils.error_handler import WatermarkError
from wepa.utils.rng import derive_seed

logger = logging.getLogger(__name__)

BASELINE_LABEL = "baseline-stand-in"
WEPA_LABEL = "wepa-lev-dp"

KeySequence = Union[np.ndarray, Sequence[NoiseVector]]


class BenchError(WatermarkError):
    """Raised for invalid benchmark inputs."""
    def __init__(self, message: str):
        super().__init__(message, "bench_error")


def _key_matrix(key_sequence: KeySequence) -> np.ndarray:
    if isinstance(key_sequence, np.ndarray):
        rows = key_sequence
    else:
        rows = np.stack([xi.mu if isinstance(xi, NoiseVector) else np.asarray(xi) for xi in key_sequence])
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or np.any(rows < 0) or np.any(rows >= 1):
        raise BenchError("key sequence must be a (lambda, vocab) matrix of values in [0, 1)")
    return rows


def baseline_block_scores(
    y: Sequence[int],
    key_sequence: KeySequence,
    block_k: int,
    gamma: float = 0.0,
) -> np.ndarray:
    """
    Per-shift block statistic of the baseline stand-in.

    For every cyclic shift s and every length-k window y[j:j+k], a soft
    Levenshtein alignment (indel cost γ, substitution cost log(1 − μ_y))
    against key rows s+j, ..., s+j+k−1 (mod λ); the score of a shift is the
    mean over windows.

    Returns:
        Array of λ scores, lower = better aligned
    """
    rows = _key_matrix(key_sequence)
    lam, vocab = rows.shape
    tokens = np.asarray([int(t) for t in y], dtype=np.int64)
    n = len(tokens)
    if block_k < 1 or block_k > n:
        raise BenchError(f"block size must lie in [1, {n}], got {block_k}")
    if np.any(tokens < 0) or np.any(tokens >= vocab):
        raise BenchError(f"sequence has tokens outside vocabulary of size {vocab}")

    table = np.log1p(-rows)
    shifts = np.arange(lam)[:, None]
    offsets = np.arange(block_k)[None, :]
    k = block_k
    total = np.zeros(lam)
    for j in range(n - k + 1):
        key_rows = (shifts + j + offsets) % lam                       # (λ, k)
        cost = table[key_rows[:, None, :], tokens[j:j + k][None, :, None]]  # (λ, k, k)
        prev = [np.full(lam, gamma * l) for l in range(k + 1)]
        for a in range(1, k + 1):
            cur = [np.full(lam, gamma * a)]
            for l in range(1, k + 1):
                best = np.minimum(prev[l] + gamma, cur[l - 1] + gamma)
                cur.append(np.minimum(best, prev[l - 1] + cost[:, a - 1, l - 1]))
            prev = cur
        total += prev[k]
    return total / (n - k + 1)


def baseline_block_detect(
    y: Sequence[int],
    key_sequence: KeySequence,
    block_k: int,
    gamma: float = 0.0,
) -> float:
    """Baseline stand-in statistic: the best shift's block score."""
    return float(baseline_block_scores(y, key_sequence, block_k, gamma).min())


def time_call(fn: Callable[[], object], repeats: int = 5, warmup: int = 1) -> Tuple[int, List[int]]:
    """
    Time fn on the monotonic clock.

    Returns:
        (median ns, raw samples in ns)
    """
    for attempt in range(warmup):
        logger.debug(f"Warmup {attempt + 1}/{warmup}")
        fn()
    samples: List[int] = []
    for attempt in range(repeats):
        start = time.perf_counter_ns()
        fn()
        samples.append(time.perf_counter_ns() - start)
        logger.debug(f"Repeat {attempt + 1}/{repeats}: {samples[-1]} ns")
    return int(np.median(samples)), samples


def time_interleaved(fns: Sequence[Callable[[], object]], repeats: int = 5, warmup: int = 1) -> List[List[int]]:
    """
    Time several calls round-robin: every round times each fn once, so slow
    drift of the machine hits all of them alike.

    Returns:
        Raw samples in ns, one list of `repeats` values per fn
    """
    for attempt in range(warmup):
        logger.debug(f"Warmup round {attempt + 1}/{warmup}")
        for fn in fns:
            fn()
    samples: List[List[int]] = [[] for _ in fns]
    for attempt in range(repeats):
        for i, fn in enumerate(fns):
            start = time.perf_counter_ns()
            fn()
            samples[i].append(time.perf_counter_ns() - start)
        logger.debug(f"Round {attempt + 1}/{repeats} done")
    return samples


PointArgs = Tuple[str, int, int, int, int, int, int]


def _point_call(args: PointArgs) -> Callable[[], object]:
    detector, m, lam, d, k, vocab, seed = args
    tokens = np.random.default_rng(derive_seed(seed, m, lam)).integers(0, vocab, size=m).tolist()
    key = gen_key(lam, d, vocab, None, None, derive_seed(seed, lam, d))
    if detector == WEPA_LABEL:
        costs = CostParams()
        return lambda: lev_dp(tokens, key, costs)
    return lambda: baseline_block_detect(tokens, key.noise, k)


def _point_row(args: PointArgs, samples: List[int]) -> BenchRow:
    detector, m, lam, d, k, _, _ = args
    k_out = k if detector == BASELINE_LABEL else None
    median = int(np.median(samples))
    logger.info(f"{detector}: m={m}, lambda={lam}, d={d}, k={k_out} -> {median / 1e6:.2f} ms")
    return BenchRow(detector=detector, m=m, lambda_=lam, d=d, k=k_out, median_ns=median,
                    min_ns=int(min(samples)), samples=samples)


def _bench_point(args: Tuple[PointArgs, int, int]) -> BenchRow:
    point, repeats, warmup = args
    _, samples = time_call(_point_call(point), repeats, warmup)
    return _point_row(point, samples)


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    if len(xs) < 2:
        raise BenchError("a slope needs at least two grid points")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def scaling_report(grid: BenchGrid, workers: int = 1) -> ScalingReport:
    """
    Time lev_dp over lengths (at base λ) and over λ (at base length), and the
    baseline over block sizes; fit log-log slopes for each sweep.

    In-process runs interleave the repeats of all grid points; slopes are
    fitted on the per-point median (or minimum, see `grid.slope_statistic`).

    Args:
        grid: Timing grid
        workers: > 1 times each grid point in its own worker process

    Returns:
        ScalingReport with raw rows and fitted slopes
    """
    points = []
    for m in grid.ms:
        points.append((WEPA_LABEL, m, grid.base_lambda, grid.degree, 0))
    for lam in grid.lambdas:
        points.append((WEPA_LABEL, grid.base_m, lam, grid.degree, 0))
    if grid.include_baseline:
        for k in grid.ks:
            points.append((BASELINE_LABEL, grid.baseline_m, grid.baseline_lambda, 1, k))
    points = [p + (grid.vocab_size, grid.seed) for p in points]

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_bench_point, [(p, grid.repeats, grid.warmup) for p in points]))
    else:
        samples = time_interleaved([_point_call(p) for p in points], grid.repeats, grid.warmup)
        rows = [_point_row(p, s) for p, s in zip(points, samples)]

    def timings(selected: Sequence[BenchRow]) -> List[int]:
        return [r.min_ns if grid.slope_statistic == "min" else r.median_ns for r in selected]

    n_m, n_lam = len(grid.ms), len(grid.lambdas)
    slopes: Dict[str, float] = {}
    if n_m >= 2:
        slopes["lev_dp_vs_m"] = loglog_slope(grid.ms, timings(rows[:n_m]))
    if n_lam >= 2:
        slopes["lev_dp_vs_lambda"] = loglog_slope(grid.lambdas, timings(rows[n_m:n_m + n_lam]))
    if grid.include_baseline and len(grid.ks) >= 2:
        slopes["baseline_vs_k"] = loglog_slope(grid.ks, timings(rows[n_m + n_lam:]))
    logger.info(f"Scaling slopes: {slopes}")
    return ScalingReport(rows=rows, slopes=slopes)
