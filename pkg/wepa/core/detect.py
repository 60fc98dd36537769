"""
Detect Module: generalized Levenshtein distance to the key automaton and the
permutation test built on it.

ψ = d_L(y, M_sk) is the cheapest alignment of y against any noise string the
key automaton can emit, with deletion cost γ_d, insertion cost γ_i and
substitution cost d₀(y, Φ_u) = log(1 − v_{u,y}). Matches are rewarded with
negative cost, so smaller ψ means stronger evidence.
"""

import logging
import math
from functools import lru_cache
from itertools import chain
from typing import List, Optional, Sequence, Tuple

import numpy as np

from wepa.core import automata
from wepa.core.config import WatermarkConfig
from wepa.core.wkey import KeyAutomaton, gen_key
from wepa.schemas.reports import DetectionReport
from wepa.schemas.requests import CostParams
from wepa.utils.error_handler import WatermarkError
from wepa.utils.rng import derive_seed

logger = logging.getLogger(__name__)

VP_BREAK = 5.0 / 3.0
NULL_STREAM = 1
# float64 entries held by one block of null cost tables
NULL_TABLE_LIMIT = 2**22
MAX_BRUTEFORCE_NODES = 2_000_000


class DetectionError(WatermarkError):
    """Raised for invalid detection inputs."""
    def __init__(self, message: str):
        super().__init__(message, "detection_error")


def cost_d0(mu_y: float) -> float:
    """d₀(y, ξ) = log(1 − μ_y)."""
    if not 0.0 <= mu_y < 1.0:
        raise DetectionError(f"noise value {mu_y} outside [0, 1)")
    return math.log1p(-mu_y)


def cost_d0_state(key: KeyAutomaton, state: int, y: int) -> float:
    """
    d₀(y, Φ_state): the largest log(1 − μ_y) over the support of Φ_state,
    attained with every free bit at zero, i.e. at the stored value v.
    """
    if not 0 <= state < key.lambda_:
        raise DetectionError(f"state {state} outside [0, {key.lambda_})")
    if not 0 <= y < key.vocab_size:
        raise DetectionError(f"token {y} outside vocabulary of size {key.vocab_size}")
    return float(key.costs[state, y])


def _check_tokens(y: Sequence[int], vocab_size: int) -> List[int]:
    tokens = [int(t) for t in y]
    for t in tokens:
        if not 0 <= t < vocab_size:
            raise DetectionError(f"token {t} outside vocabulary of size {vocab_size}")
    return tokens


def lev_dp(y: Sequence[int], key: KeyAutomaton, costs: CostParams) -> float:
    """
    Generalized Levenshtein distance by the rolling-row DP, O(m·λ·d).

    f_u is the best cost of aligning y_{1:i} to a path whose last state is u.
    Each token first takes deletion and substitution from the previous row,
    then insertions are relaxed around the cycle in two sweeps that start
    right after the row minimum.
    """
    tokens = _check_tokens(y, key.vocab_size)
    lam, d = key.lambda_, key.degree
    gamma_d, gamma_i = costs.gamma_d, costs.gamma_i
    columns = {t: key.costs[:, t].tolist() for t in set(tokens)}

    f = [0.0] * lam
    g = [0.0] * lam
    for token in tokens:
        cost = columns[token]
        for u in range(lam):
            d0 = cost[u]
            best = g[u] + gamma_d
            for k in range(1, d + 1):
                cand = g[u - k] + d0
                if cand < best:
                    best = cand
            f[u] = best

        u_star = min(range(lam), key=f.__getitem__)
        for u in chain(range(u_star + 1, lam), range(0, u_star)):
            best = f[u]
            for k in range(1, d + 1):
                cand = f[u - k] + gamma_i
                if cand < best:
                    best = cand
            f[u] = best
        f, g = g, f

    return min(g)


def _insertion_closure(f: np.ndarray, d: int, gamma_i: float) -> np.ndarray:
    """
    Row-wise insertion relaxation f_u ← min_v f_v + γ_i·⌈((u − v) mod λ)/d⌉.

    Each row is rotated so its minimum sits at position 0; the optimal source
    then never lies past the target, and with p = dP + r, q = dQ + s the step
    count ⌈(p − q)/d⌉ equals P − Q + [s < r], which turns the relaxation into
    one prefix minimum per residue r.
    """
    n, lam = f.shape
    pos = np.arange(lam)
    idx = (np.argmin(f, axis=1)[:, None] + pos[None, :]) % lam
    a = np.take_along_axis(f, idx, axis=1)

    blocks, residues = np.divmod(pos, d)
    base = a - gamma_i * blocks[None, :]
    out = a.copy()
    for r in range(d):
        carried = base + gamma_i * (residues < r)[None, :]
        prefix = np.minimum.accumulate(carried, axis=1)
        cols = residues == r
        out[:, cols] = np.minimum(a[:, cols], gamma_i * blocks[cols][None, :] + prefix[:, cols])

    result = np.empty_like(f)
    np.put_along_axis(result, idx, out, axis=1)
    return result


def lev_dp_batch(
    y: Sequence[int],
    cost_tables: np.ndarray,
    degree: int,
    costs: CostParams,
) -> np.ndarray:
    """
    The lev_dp recursion for many keys at once.

    Args:
        y: Token sequence
        cost_tables: (keys, λ, |V|) array of log(1 − v)
        degree: Shared degree d of every key
        costs: Edit costs

    Returns:
        ψ per key, shape (keys,)
    """
    tables = np.asarray(cost_tables, dtype=np.float64)
    if tables.ndim != 3:
        raise DetectionError(f"cost tables must be (keys, lambda, vocab), got shape {tables.shape}")
    n, lam, vocab = tables.shape
    if lam > 1 and not 1 <= degree < lam:
        raise DetectionError(f"need 1 <= d < lambda, got d={degree}, lambda={lam}")
    tokens = _check_tokens(y, vocab)

    g = np.zeros((n, lam))
    for token in tokens:
        d0 = tables[:, :, token]
        f = g + costs.gamma_d
        for k in range(1, degree + 1):
            np.minimum(f, np.roll(g, k, axis=1) + d0, out=f)
        g = _insertion_closure(f, degree, costs.gamma_i)
    return g.min(axis=1)


def path_length_bound(m: int, lambda_: int, degree: int) -> int:
    """
    Longest state path an optimal alignment can need: leading and trailing
    insertions never pay off, and consecutive matched states are joined by a
    shortest hop sequence of at most ⌈λ/d⌉ steps.
    """
    if m == 0:
        return 0
    return m + (m - 1) * (-(-lambda_ // degree) - 1)


def lev_bruteforce(
    y: Sequence[int],
    key: KeyAutomaton,
    costs: CostParams,
    max_path_len: Optional[int] = None,
) -> float:
    """
    Exhaustive oracle: the edit-distance table of y against every state path of
    length <= max_path_len (every start, every successor choice), minimized.
    """
    tokens = _check_tokens(y, key.vocab_size)
    m = len(tokens)
    if max_path_len is None:
        max_path_len = path_length_bound(m, key.lambda_, key.degree)
    if max_path_len < 0:
        raise DetectionError(f"max_path_len must be >= 0, got {max_path_len}")
    nodes = sum(key.lambda_ * key.degree ** (length - 1) for length in range(1, max_path_len + 1))
    if nodes > MAX_BRUTEFORCE_NODES:
        raise DetectionError(f"{nodes} path prefixes exceed the brute-force limit {MAX_BRUTEFORCE_NODES}")

    gamma_d, gamma_i = costs.gamma_d, costs.gamma_i
    table = key.costs.tolist()
    empty = [gamma_d * i for i in range(m + 1)]
    best = empty[m]

    # stack of (last state, path length, column D[0..m][length])
    stack: List[Tuple[int, int, List[float]]] = []

    def extend(column: List[float], length: int, state: int) -> List[float]:
        row = table[state]
        nxt = [gamma_i * length]
        for i in range(1, m + 1):
            nxt.append(min(
                nxt[i - 1] + gamma_d,
                column[i] + gamma_i,
                column[i - 1] + row[tokens[i - 1]],
            ))
        return nxt

    if max_path_len > 0:
        for start in range(key.lambda_):
            stack.append((start, 1, extend(empty, 1, start)))
    while stack:
        state, length, column = stack.pop()
        if column[m] < best:
            best = column[m]
        if length == max_path_len:
            continue
        for nxt in automata.successors(state, key.lambda_, key.degree):
            stack.append((nxt, length + 1, extend(column, length + 1, nxt)))
    return best


@lru_cache(maxsize=8)
def null_cost_tables(
    lambda_: int,
    degree: int,
    vocab_size: int,
    bitwidth: Optional[int],
    precision: Optional[int],
    seed: int,
    n: int,
) -> np.ndarray:
    """Cost tables of the n null keys for one (scheme, seed); read-only, cached."""
    tables = np.stack([
        gen_key(lambda_, degree, vocab_size, bitwidth, precision, derive_seed(seed, i, NULL_STREAM)).costs
        for i in range(n)
    ])
    tables.setflags(write=False)
    return tables


def null_statistics(
    y: Sequence[int],
    key: KeyAutomaton,
    costs: CostParams,
    n: int,
    seed: int,
) -> np.ndarray:
    """ψ of y under n fresh keys of the same scheme, seeds derived from (seed, i)."""
    if n < 1:
        raise DetectionError(f"null sample count must be >= 1, got {n}")
    tokens = _check_tokens(y, key.vocab_size)
    scheme = (key.lambda_, key.degree, key.vocab_size, key.bitwidth, key.precision)
    per_key = key.lambda_ * key.vocab_size
    if n * per_key <= NULL_TABLE_LIMIT:
        return lev_dp_batch(tokens, null_cost_tables(*scheme, int(seed), n), key.degree, costs)

    # Large vocabularies: build the null keys in blocks and keep only the
    # columns of tokens that occur in y.
    used = sorted(set(tokens))
    remap = {t: j for j, t in enumerate(used)}
    local = [remap[t] for t in tokens]
    block = max(1, NULL_TABLE_LIMIT // per_key)
    out = np.empty(n)
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        tables = np.stack([
            gen_key(*scheme, derive_seed(seed, i, NULL_STREAM)).costs[:, used] for i in range(lo, hi)
        ])
        out[lo:hi] = lev_dp_batch(local, tables, key.degree, costs)
    logger.debug(f"Computed {n} null statistics in blocks of {block}")
    return out


def vp_bound(z: float) -> float:
    """One-sided Vysochanskij–Petunin bound on the tail beyond z."""
    if not math.isfinite(z):
        raise DetectionError(f"z must be finite, got {z}")
    z2 = z * z
    if z2 >= VP_BREAK:
        bound = 4.0 / (9.0 * (z2 + 1.0))
    else:
        bound = 4.0 / (3.0 * (z2 + 1.0)) - 1.0 / 3.0
    return min(1.0, bound)


def p_value(
    y: Sequence[int],
    key: KeyAutomaton,
    costs: Optional[CostParams] = None,
    n: Optional[int] = None,
    seed: int = 0,
    threshold: Optional[float] = None,
) -> Tuple[float, DetectionReport]:
    """
    Empirical p-value p̂ = (1 + #{ψ_i <= ψ}) / (N + 1) against N null keys.

    Args:
        y: Token sequence under test
        key: Detection key
        costs: Edit costs (configuration defaults when omitted)
        n: Null sample count N
        seed: Seed the null keys are derived from
        threshold: Level used for the report's verdict

    Returns:
        (p̂, DetectionReport)
    """
    costs = costs or CostParams.from_config()
    n = WatermarkConfig.NULL_SAMPLES if n is None else n
    threshold = WatermarkConfig.THRESHOLD if threshold is None else threshold
    tokens = _check_tokens(y, key.vocab_size)

    psi = float(lev_dp_batch(tokens, key.costs[None], key.degree, costs)[0])
    nulls = null_statistics(tokens, key, costs, n, seed)
    p_hat = (1 + int(np.count_nonzero(nulls <= psi))) / (n + 1)

    mean = float(nulls.mean())
    std = float(nulls.std(ddof=1)) if n > 1 else 0.0
    if std > 0:
        z = (psi - mean) / std
        bound = vp_bound(z) if z <= 0 else 1.0
    else:
        logger.warning(f"Null statistics have zero spread (N={n}, m={len(tokens)}); z undefined")
        z, bound = None, 1.0

    verdict = bool(tokens) and p_hat <= threshold
    report = DetectionReport(
        psi=psi,
        null_mean=mean,
        null_std=std,
        p_hat=p_hat,
        z=z,
        vp_bound=bound,
        verdict=verdict,
        null_samples=n,
        threshold=threshold,
        length=len(tokens),
    )
    logger.debug(f"psi={psi:.4f}, null mean={mean:.4f}, std={std:.4f}, p_hat={p_hat:.5f}")
    return p_hat, report


def detect(
    y: Sequence[int],
    key: KeyAutomaton,
    costs: Optional[CostParams] = None,
    threshold: Optional[float] = None,
    n: Optional[int] = None,
    seed: int = 0,
) -> Tuple[bool, DetectionReport]:
    """Watermark verdict: true iff p̂ <= threshold (always false for empty y)."""
    _, report = p_value(y, key, costs, n, seed, threshold)
    return report.verdict, report
