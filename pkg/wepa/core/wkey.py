"""
Watermark Key Module: Gen(1^λ).

The key is a λ-state cyclic automaton in which state i moves to one of
i+1, ..., i+d (mod λ) with equal probability, and carries one noise row fixed
to b bits. Decoding fills the remaining c − b low bits with fresh uniform bits.
Full-precision mode (bitwidth = precision = None) stores float64 rows and
makes every state's noise deterministic.
"""

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import List, Optional, Tuple

import numpy as np

from wepa.core import automata
from wepa.schemas.documents import KeyFile
from wepa.utils.error_handler import WatermarkError
from wepa.utils.rng import make_rng

logger = logging.getLogger(__name__)

MAX_PRECISION = 52


class WatermarkKeyError(WatermarkError):
    """Raised for invalid key parameters or key files."""
    def __init__(self, message: str):
        super().__init__(message, "invalid_key")


@dataclass(frozen=True)
class NoiseVector:
    """ξ = (μ_1, ..., μ_|V|); precision None means full float precision."""
    mu: np.ndarray
    precision: Optional[int] = None

    def __post_init__(self):
        mu = np.array(self.mu, dtype=np.float64)
        if mu.ndim != 1 or np.any(mu < 0) or np.any(mu >= 1):
            raise WatermarkKeyError("noise values must form a vector in [0, 1)")
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)

    def __len__(self) -> int:
        return len(self.mu)


def check_key_params(lambda_: int, degree: int, bitwidth_b: Optional[int], precision_c: Optional[int]):
    if lambda_ < 1:
        raise WatermarkKeyError(f"lambda must be >= 1, got {lambda_}")
    if lambda_ == 1:
        if degree != 1:
            raise WatermarkKeyError(f"a single-state key only supports degree 1, got {degree}")
    elif not 1 <= degree < lambda_:
        raise WatermarkKeyError(f"need 1 <= d < lambda, got d={degree}, lambda={lambda_}")
    if (bitwidth_b is None) != (precision_c is None):
        raise WatermarkKeyError("bitwidth and precision must both be set or both be float mode")
    if bitwidth_b is not None and not 1 <= bitwidth_b <= precision_c <= MAX_PRECISION:
        raise WatermarkKeyError(
            f"need 1 <= b <= c <= {MAX_PRECISION}, got b={bitwidth_b}, c={precision_c}"
        )


@dataclass(frozen=True)
class KeyAutomaton:
    """
    The watermark secret.

    `grid` holds integer numerators t with v = t / 2^b in fixed-point mode, or
    the float64 values v themselves in float mode.
    """
    lambda_: int
    degree: int
    vocab_size: int
    bitwidth: Optional[int]
    precision: Optional[int]
    seed: int
    grid: np.ndarray
    noise: np.ndarray = field(init=False, repr=False, compare=False)
    costs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        check_key_params(self.lambda_, self.degree, self.bitwidth, self.precision)
        grid = np.array(self.grid)
        if grid.shape != (self.lambda_, self.vocab_size):
            raise WatermarkKeyError(f"noise matrix shape {grid.shape} != ({self.lambda_}, {self.vocab_size})")
        if self.float_mode:
            grid = grid.astype(np.float64)
            if np.any(grid < 0) or np.any(grid >= 1):
                raise WatermarkKeyError("float-mode noise must lie in [0, 1)")
            noise = grid
        else:
            grid = grid.astype(np.int64)
            if np.any(grid < 0) or np.any(grid >= 2 ** self.bitwidth):
                raise WatermarkKeyError(f"noise numerators must lie in [0, 2^{self.bitwidth})")
            noise = grid / float(2 ** self.bitwidth)
        grid.setflags(write=False)
        noise.setflags(write=False)
        costs = np.log1p(-noise)
        costs.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "noise", noise)
        object.__setattr__(self, "costs", costs)

    @property
    def float_mode(self) -> bool:
        return self.bitwidth is None

    @property
    def free_bits(self) -> int:
        return 0 if self.float_mode else self.precision - self.bitwidth

    def successors(self, state: int) -> Tuple[int, ...]:
        return automata.successors(state, self.lambda_, self.degree)

    def predecessors(self, state: int) -> Tuple[int, ...]:
        return tuple((state - k) % self.lambda_ for k in range(1, self.degree + 1))

    def key_bits(self, state: int) -> List[List[int]]:
        """The b fixed bits of every μ in the state's row, most significant first."""
        if self.float_mode:
            raise WatermarkKeyError("float-mode keys have no finite bit representation")
        b = self.bitwidth
        return [[(int(t) >> (b - 1 - j)) & 1 for j in range(b)] for t in self.grid[state]]

    def subordinate_pa(self, state: int) -> automata.Pnfa:
        """Explicit bit automaton of the state's noise distribution Φ."""
        return automata.build_subordinate_pa(self.vocab_size, self.bitwidth, self.precision, self.key_bits(state))

    def to_file(self, expanded: bool = False) -> KeyFile:
        return KeyFile(
            lambda_=self.lambda_,
            degree=self.degree,
            vocab_size=self.vocab_size,
            bitwidth=self.bitwidth,
            precision=self.precision,
            seed=self.seed,
            noise=self.grid.tolist() if expanded else None,
        )

    @classmethod
    def from_file(cls, doc: KeyFile) -> "KeyAutomaton":
        if doc.noise is None:
            return gen_key(doc.lambda_, doc.degree, doc.vocab_size, doc.bitwidth, doc.precision, doc.seed)
        grid = np.asarray(doc.noise, dtype=np.float64)
        if doc.bitwidth is not None:
            if np.any(grid != np.floor(grid)):
                raise WatermarkKeyError("fixed-point noise must be stored as integer numerators")
            grid = grid.astype(np.int64)
        return cls(doc.lambda_, doc.degree, doc.vocab_size, doc.bitwidth, doc.precision, doc.seed, grid)


def derive_noise(lambda_: int, vocab_size: int, bitwidth_b: Optional[int], seed: int) -> np.ndarray:
    """Noise rows from the key seed: i.i.d. uniform on the 2^b grid (or [0, 1))."""
    rng = np.random.default_rng(seed)
    if bitwidth_b is None:
        return rng.random((lambda_, vocab_size))
    return rng.integers(0, 2 ** bitwidth_b, size=(lambda_, vocab_size), dtype=np.int64)


def gen_key(
    lambda_: int,
    degree: int,
    vocab_size: int,
    bitwidth_b: Optional[int],
    precision_c: Optional[int],
    seed: int,
) -> KeyAutomaton:
    """Generate the key automaton deterministically from `seed`."""
    check_key_params(lambda_, degree, bitwidth_b, precision_c)
    if vocab_size < 1:
        raise WatermarkKeyError(f"vocab_size must be >= 1, got {vocab_size}")
    grid = derive_noise(lambda_, vocab_size, bitwidth_b, seed)
    logger.debug(f"Generated key: lambda={lambda_}, d={degree}, |V|={vocab_size}, "
                 f"b={bitwidth_b}, c={precision_c}, seed={seed}")
    return KeyAutomaton(lambda_, degree, vocab_size, bitwidth_b, precision_c, int(seed), grid)


def sample_initial(key: KeyAutomaton, rng: np.random.Generator) -> int:
    """Uniform initial state."""
    return int(make_rng(rng).integers(key.lambda_))


def transition(key: KeyAutomaton, state: int, rng: np.random.Generator) -> int:
    """Uniform move to one of the d successors."""
    if not 0 <= state < key.lambda_:
        raise WatermarkKeyError(f"state {state} outside [0, {key.lambda_})")
    if key.degree == 1:
        return (state + 1) % key.lambda_
    return (state + 1 + int(make_rng(rng).integers(key.degree))) % key.lambda_


def state_noise(key: KeyAutomaton, state: int, rng: np.random.Generator) -> NoiseVector:
    """Draw ξ ~ Φ_state: stored high bits plus fresh uniform low bits."""
    if not 0 <= state < key.lambda_:
        raise WatermarkKeyError(f"state {state} outside [0, {key.lambda_})")
    if key.free_bits == 0:
        return NoiseVector(key.noise[state], key.precision)
    free = key.free_bits
    low = make_rng(rng).integers(0, 2 ** free, size=key.vocab_size, dtype=np.int64)
    mu = (key.grid[state] * (2 ** free) + low) / float(2 ** key.precision)
    return NoiseVector(mu, key.precision)


def noise_support(key: KeyAutomaton, state: int) -> List[Tuple[float, ...]]:
    """Every vector in supp(Φ_state); exponential in (c − b)·|V|, small keys only."""
    if key.float_mode or key.free_bits == 0:
        return [tuple(float(v) for v in key.noise[state])]
    free = key.free_bits
    scale = float(2 ** key.precision)
    base = [int(t) * (2 ** free) for t in key.grid[state]]
    return [
        tuple((t + u) / scale for t, u in zip(base, lows))
        for lows in product(range(2 ** free), repeat=key.vocab_size)
    ]
