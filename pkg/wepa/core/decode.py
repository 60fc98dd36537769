"""
Decode Module: exponential minimum sampling and watermarked generation.

Γ(ξ, π) = argmin_j π_j / log(μ_j) turns one uniform noise vector into a draw
from π. Generation walks the key automaton, draws ξ from each visited state and
decodes the next token with Γ.
"""

import logging
import math
from dataclasses import dataclass, field
from itertools import product
from typing import List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from wepa.core import automata
from wepa.core.lm import ModelLike, TokenSeq, load_model
from wepa.core.wkey import KeyAutomaton, NoiseVector, noise_support, sample_initial, state_noise, transition
from wepa.schemas.documents import TraceFile
from wepa.utils.error_handler import WatermarkError
from wepa.utils.rng import SeedLike, make_rng

logger = logging.getLogger(__name__)

# Exhaustive enumeration guard for enumerate_outputs.
MAX_ENUMERATION = 2_000_000


class DecodeError(WatermarkError):
    """Raised for invalid decoder inputs or inconsistent traces."""
    def __init__(self, message: str):
        super().__init__(message, "decode_error")


@dataclass(frozen=True)
class GenerationTrace:
    """The (state, ξ, y) triples of one watermarked generation."""
    tokens: List[int]
    states: List[int]
    noises: List[NoiseVector] = field(repr=False)

    def __post_init__(self):
        if not len(self.tokens) == len(self.states) == len(self.noises):
            raise DecodeError(
                f"trace lengths differ: {len(self.tokens)} tokens, "
                f"{len(self.states)} states, {len(self.noises)} noises"
            )

    def __len__(self) -> int:
        return len(self.tokens)

    def check_path(self, key: KeyAutomaton):
        """Raise unless consecutive states follow the key's successor relation."""
        for prev, nxt in zip(self.states, self.states[1:]):
            if nxt not in key.successors(prev):
                raise DecodeError(f"state {nxt} is not a successor of {prev}")

    def to_file(self, key: KeyAutomaton, seed: Optional[int] = None) -> TraceFile:
        """Noises are stored only when the key leaves free bits to chance."""
        explicit = key.free_bits > 0
        return TraceFile(
            tokens=list(self.tokens),
            states=list(self.states),
            noises=[xi.mu.tolist() for xi in self.noises] if explicit else None,
            watermarked=True,
            seed=seed,
        )

    @classmethod
    def from_file(cls, doc: TraceFile, key: KeyAutomaton) -> "GenerationTrace":
        if doc.states is None:
            raise DecodeError("trace file carries no states")
        if any(not 0 <= q < key.lambda_ for q in doc.states):
            raise DecodeError(f"trace states must lie in [0, {key.lambda_})")
        if doc.noises is not None:
            noises = [NoiseVector(mu, key.precision) for mu in doc.noises]
        elif key.free_bits > 0:
            raise DecodeError("trace needs explicit noises when the key has free bits")
        else:
            noises = [NoiseVector(key.noise[q], key.precision) for q in doc.states]
        return cls(list(doc.tokens), list(doc.states), noises)


def binary_expand(z: float, c: int) -> List[int]:
    """
    c-bit expansion of z ∈ [0, 1), least significant bit first:
    z ≈ (1/2^c) Σ_k σ_k 2^k.
    """
    if c < 1:
        raise DecodeError(f"bit count must be >= 1, got {c}")
    if not 0.0 <= z < 1.0:
        raise DecodeError(f"value {z} outside [0, 1)")
    n = int(math.floor(z * 2.0 ** c))
    return [(n >> k) & 1 for k in range(c)]


def bits_to_unit(bits: Sequence[int]) -> float:
    """Inverse of binary_expand on the 2^c grid."""
    if any(bit not in (0, 1) for bit in bits):
        raise DecodeError("bits must be 0 or 1")
    n = sum(int(bit) << k for k, bit in enumerate(bits))
    return n / 2.0 ** len(bits)


def gamma_exp_min(xi: Union[NoiseVector, Sequence[float]], pi: Sequence[float]) -> int:
    """
    Exponential minimum sampling: argmin_j π_j / log(μ_j).

    μ_j = 0 gives the ratio 0⁻; tokens with π_j = 0 are never chosen; exact
    ties go to the lowest token id.
    """
    mu = xi.mu if isinstance(xi, NoiseVector) else np.asarray(xi, dtype=np.float64)
    pi = np.asarray(pi, dtype=np.float64)
    if mu.shape != pi.shape or mu.ndim != 1:
        raise DecodeError(f"noise length {mu.shape} does not match distribution length {pi.shape}")
    if np.any(pi < 0) or not np.any(pi > 0):
        raise DecodeError("distribution must be non-negative with positive mass")
    if np.any(mu < 0) or np.any(mu >= 1):
        raise DecodeError("noise values must lie in [0, 1)")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(pi > 0, pi / np.log(mu), np.inf)
    return int(np.argmin(ratios))


def generate_watermarked(
    model: ModelLike,
    key: KeyAutomaton,
    prompt: Sequence[int],
    m: int,
    rng: SeedLike = None,
    initial_state: Optional[int] = None,
) -> GenerationTrace:
    """
    Watermarked generation.

    Args:
        model: Model spec or instance sharing the key's vocabulary
        key: Key automaton
        prompt: Conditioning tokens
        m: Number of tokens to generate
        rng: Generator or seed for state walks and free noise bits
        initial_state: Fixes the starting state instead of sampling it

    Returns:
        GenerationTrace of length m
    """
    lm = load_model(model)
    if lm.vocab_size != key.vocab_size:
        raise DecodeError(f"model vocabulary {lm.vocab_size} != key vocabulary {key.vocab_size}")
    if m < 0:
        raise DecodeError(f"length must be >= 0, got {m}")
    lm.check_tokens(prompt)
    rng = make_rng(rng)

    if initial_state is None:
        state = sample_initial(key, rng)
    elif 0 <= initial_state < key.lambda_:
        state = int(initial_state)
    else:
        raise DecodeError(f"initial state {initial_state} outside [0, {key.lambda_})")

    context = list(prompt)
    tokens: TokenSeq = []
    states: List[int] = []
    noises: List[NoiseVector] = []
    for _ in range(m):
        state = transition(key, state, rng)
        xi = state_noise(key, state, rng)
        token = gamma_exp_min(xi, lm.next_dist(context))
        tokens.append(token)
        states.append(state)
        noises.append(xi)
        context.append(token)

    logger.debug(f"Generated {m} watermarked tokens, final state {state}")
    return GenerationTrace(tokens, states, noises)


def enumerate_outputs(
    model: ModelLike,
    key: KeyAutomaton,
    prompt: Sequence[int],
    m: int,
) -> Set[Tuple[int, ...]]:
    """
    Every token sequence the key can decode: all λ·d^(m−1) visited-state paths
    crossed with every free-bit assignment along them.
    """
    lm = load_model(model)
    if m < 1:
        return {()}
    supports = [noise_support(key, q) for q in range(key.lambda_)]
    per_path = len(supports[0]) ** m
    total = automata.count_paths(key.lambda_, key.degree, m - 1) * per_path
    if total > MAX_ENUMERATION:
        raise DecodeError(f"{total} decodings exceed the enumeration limit {MAX_ENUMERATION}")

    outputs: Set[Tuple[int, ...]] = set()
    for path in automata.iter_state_paths(key.lambda_, key.degree, m - 1):
        for noises in product(*(supports[q] for q in path)):
            context = list(prompt)
            for mu in noises:
                context.append(gamma_exp_min(mu, lm.next_dist(context)))
            outputs.add(tuple(context[len(prompt):]))
    return outputs
