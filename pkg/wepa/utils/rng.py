"""Seeded random streams.

Every random draw in the package goes through an explicit numpy Generator.
Child seeds are derived by index, so work split across trials or workers gives
the same numbers no matter how it is scheduled.
"""

from typing import Optional, Union

import numpy as np

SeedLike = Union[int, np.random.Generator, None]


def make_rng(seed: SeedLike = None) -> np.random.Generator:
    """Return a Generator; an existing Generator is passed through unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def derive_seed(seed: int, index: int, stream: int = 0) -> int:
    """Deterministic 63-bit child seed for (seed, index, stream)."""
    state = np.random.SeedSequence([int(seed), int(index), int(stream)]).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])


def fresh_seed(rng: Optional[np.random.Generator] = None) -> int:
    """Draw a new seed, from `rng` when given, otherwise from OS entropy."""
    if rng is None:
        return int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0] >> 1)
    return int(rng.integers(0, 2**62))
