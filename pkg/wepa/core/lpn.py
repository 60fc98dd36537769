"""
LPN Module: the parity-based undetectable scheme over a binary vocabulary.

Every position draws a pair (μ₀, μ₁) from a keyed stream. Every (λ+1)-th
position carries one noisy parity bit of the λ pair orderings before it: the
pair is ordered so that 1[μ₀ < μ₁] equals the parity with probability 1 − q.
The detector recomputes the parities from the key and counts how often the
emitted bit agrees.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from wepa.core.decode import gamma_exp_min
from wepa.core.lm import ModelLike, entropy_bits, load_model, uniform_spec
from wepa.schemas.reports import LpnReport
from wepa.utils.error_handler import WatermarkError
from wepa.utils.rng import SeedLike, derive_seed, make_rng

logger = logging.getLogger(__name__)

STREAM_TAG = 0x1A5


class LpnError(WatermarkError):
    """Raised for invalid parity-scheme parameters or inputs."""
    def __init__(self, message: str):
        super().__init__(message, "lpn_error")


@dataclass(frozen=True)
class LpnKey:
    """Sparse parity secret: ⌊log₂ λ⌋ supported indices and flip rate q."""
    lambda_: int
    support: Tuple[int, ...]
    noise_q: float
    seed: int

    def __post_init__(self):
        if self.lambda_ < 2:
            raise LpnError(f"lambda must be >= 2, got {self.lambda_}")
        if not 0.0 <= self.noise_q <= 0.5:
            raise LpnError(f"flip rate q must lie in [0, 1/2], got {self.noise_q}")
        if len(self.support) != int(math.log2(self.lambda_)):
            raise LpnError(f"support must have floor(log2 lambda) = {int(math.log2(self.lambda_))} indices")
        if len(set(self.support)) != len(self.support) or any(not 0 <= i < self.lambda_ for i in self.support):
            raise LpnError("support indices must be distinct and inside [0, lambda)")

    @property
    def period(self) -> int:
        return self.lambda_ + 1

    @property
    def default_theta(self) -> float:
        return 1.0 / (2 * self.lambda_)


@dataclass(frozen=True)
class LpnTrace:
    """Per-position details of one parity-scheme generation (positions 1-indexed)."""
    tokens: List[int]
    embedded: List[int]
    parity_bits: List[int]
    swaps: List[bool]
    entropies: List[float]

    @property
    def mean_entropy(self) -> float:
        return float(np.mean(self.entropies)) if self.entropies else 0.0


def lpn_gen(lambda_: int, q: float, seed: int) -> LpnKey:
    """Uniform support of size ⌊log₂ λ⌋, derived from seed."""
    if lambda_ < 2:
        raise LpnError(f"lambda must be >= 2, got {lambda_}")
    if not 0.0 <= q <= 0.5:
        raise LpnError(f"flip rate q must lie in [0, 1/2], got {q}")
    weight = int(math.log2(lambda_))
    rng = np.random.default_rng(seed)
    support = tuple(sorted(int(i) for i in rng.choice(lambda_, size=weight, replace=False)))
    return LpnKey(lambda_, support, float(q), int(seed))


def parity(key: LpnKey, x: Sequence[int]) -> int:
    """s · x mod 2."""
    if len(x) != key.lambda_:
        raise LpnError(f"parity input has length {len(x)}, expected {key.lambda_}")
    bit = 0
    for i in key.support:
        bit ^= int(x[i]) & 1
    return bit


def lpn_stream(key: LpnKey, n: int) -> np.ndarray:
    """Keyed Gumbel pairs for positions 1..n as an (n, 2) array; prefix-stable in n."""
    return np.random.default_rng([key.seed, STREAM_TAG]).random((n, 2))


def intended_bits(key: LpnKey, n: int) -> Tuple[List[int], List[int], List[int]]:
    """
    Embedded positions of a length-n sequence with the stream's own ordering
    bit and the parity bit the generator aims for at each of them.
    """
    pairs = lpn_stream(key, n)
    order = (pairs[:, 0] < pairs[:, 1]).astype(int)
    positions = list(range(key.period, n + 1, key.period))
    stream_bits = [int(order[i - 1]) for i in positions]
    parities = [parity(key, order[i - 1 - key.lambda_:i - 1]) for i in positions]
    return positions, stream_bits, parities


def lpn_trace(model: ModelLike, key: LpnKey, m: int, rng: SeedLike = None) -> LpnTrace:
    """Generate m bits, recording embedded positions, parities and swaps."""
    lm = load_model(model)
    if lm.vocab_size != 2:
        raise LpnError(f"the parity scheme needs a binary vocabulary, got {lm.vocab_size}")
    if m < key.period:
        raise LpnError(f"length {m} is shorter than one embedding period {key.period}")
    rng = make_rng(rng)
    pairs = lpn_stream(key, m)
    order = (pairs[:, 0] < pairs[:, 1]).astype(int)

    tokens: List[int] = []
    embedded: List[int] = []
    parities: List[int] = []
    swaps: List[bool] = []
    entropies: List[float] = []
    for i in range(1, m + 1):
        mu = pairs[i - 1]
        if i % key.period == 0:
            b = parity(key, order[i - 1 - key.lambda_:i - 1])
            target = b if rng.random() >= key.noise_q else 1 - b
            swapped = int(order[i - 1]) != target
            if swapped:
                mu = mu[::-1]
            embedded.append(i)
            parities.append(b)
            swaps.append(swapped)
        dist = lm.next_dist(tokens)
        entropies.append(entropy_bits(dist))
        tokens.append(gamma_exp_min(mu, dist))

    logger.debug(f"Parity scheme: {len(embedded)} embedded bits in {m} tokens, {sum(swaps)} swaps")
    return LpnTrace(tokens, embedded, parities, swaps, entropies)


def lpn_generate(model: ModelLike, key: LpnKey, m: int, rng: SeedLike = None) -> List[int]:
    return lpn_trace(model, key, m, rng).tokens


def lpn_detect(y: Sequence[int], key: LpnKey, theta: Optional[float] = None) -> LpnReport:
    """
    Match-rate detector: p̂ = mean of 1[y_i = parity bit] over embedded
    positions; accepts when p̂ >= 1/2 + θ (θ defaults to 1/(2λ)).
    """
    theta = key.default_theta if theta is None else theta
    if any(int(t) not in (0, 1) for t in y):
        raise LpnError("the parity detector expects a bit sequence")
    positions, _, parities = intended_bits(key, len(y))
    if not positions:
        raise LpnError(f"sequence of length {len(y)} holds no embedded position (period {key.period})")
    matches = sum(int(y[i - 1]) == b for i, b in zip(positions, parities))
    rate = matches / len(positions)
    return LpnReport(
        embedded_positions=len(positions),
        match_rate=rate,
        theta=theta,
        verdict=rate >= 0.5 + theta,
    )


def entropy_threshold(q: float) -> float:
    """Per-token entropy (bits) the model needs for the scheme's guarantees at flip rate q."""
    if not 0.0 < q < 0.5:
        raise LpnError(f"q must lie in (0, 1/2), got {q}")
    return 2.0 + math.log2(1.0 - q) - (3.0 - 4.0 * q) / (4.0 * (1.0 - q)) * math.log2(3.0 - 4.0 * q)


def lpn_trials(
    lambda_: int,
    q: float,
    t: int,
    trials: int,
    seed: int,
    theta: Optional[float] = None,
    model: Optional[ModelLike] = None,
) -> Dict[str, object]:
    """
    Completeness and soundness rates over independent keys.

    Each trial draws a fresh key, generates t embedding periods with the model
    (uniform bits by default) and also scores i.i.d. uniform bits of the same
    length.
    """
    if trials < 1 or t < 1:
        raise LpnError(f"need trials >= 1 and t >= 1, got {trials}, {t}")
    model = model or uniform_spec(2)
    m = t * (lambda_ + 1)
    marked: List[LpnReport] = []
    unmarked: List[LpnReport] = []
    entropies: List[float] = []
    for trial in range(trials):
        key = lpn_gen(lambda_, q, derive_seed(seed, trial, 0))
        trace = lpn_trace(model, key, m, derive_seed(seed, trial, 1))
        report = lpn_detect(trace.tokens, key, theta)
        marked.append(report.model_copy(update={"mean_token_entropy": trace.mean_entropy}))
        entropies.append(trace.mean_entropy)
        noise = np.random.default_rng(derive_seed(seed, trial, 2)).integers(0, 2, size=m)
        unmarked.append(lpn_detect(noise.tolist(), key, theta))

    summary = {
        "lambda": lambda_,
        "q": q,
        "t": t,
        "theta": marked[0].theta,
        "trials": trials,
        "completeness": sum(r.verdict for r in marked) / trials,
        "false_positive_rate": sum(r.verdict for r in unmarked) / trials,
        "mean_match_rate": float(np.mean([r.match_rate for r in marked])),
        "mean_null_match_rate": float(np.mean([r.match_rate for r in unmarked])),
        "mean_token_entropy": float(np.mean(entropies)),
        "entropy_threshold": entropy_threshold(q) if 0.0 < q < 0.5 else None,
        "seed": seed,
    }
    logger.info(f"Parity scheme trials: completeness={summary['completeness']:.2f}, "
                f"false positives={summary['false_positive_rate']:.2f}")
    return summary
