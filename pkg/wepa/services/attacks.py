"""
Attack Service: random token edits for robustness experiments.
A fraction ε of the sequence is substituted, deleted or padded with inserted
uniform tokens; sequences are never re-padded or truncated afterwards.
"""

import logging
import math
from typing import List, Sequence

import numpy as np

from wepa.schemas.requests import AttackKind, AttackSpec
from wepa.utils.error_handler import WatermarkError
from wepa.utils.rng import SeedLike, make_rng

logger = logging.getLogger(__name__)


class AttackError(WatermarkError):
    """Raised for invalid attack inputs."""
    def __init__(self, message: str):
        super().__init__(message, "attack_error")


def edit_count(length: int, fraction: float) -> int:
    """⌊ε·|y|⌋ edits."""
    return int(math.floor(fraction * length))


def substitute(y: Sequence[int], n: int, vocab_size: int, rng: np.random.Generator) -> List[int]:
    out = list(y)
    for pos in rng.choice(len(out), size=n, replace=False):
        out[int(pos)] = int(rng.integers(vocab_size))
    return out


def delete(y: Sequence[int], n: int, rng: np.random.Generator) -> List[int]:
    dropped = set(int(p) for p in rng.choice(len(y), size=n, replace=False))
    return [t for i, t in enumerate(y) if i not in dropped]


def insert(y: Sequence[int], n: int, vocab_size: int, rng: np.random.Generator) -> List[int]:
    out = list(y)
    for _ in range(n):
        pos = int(rng.integers(len(out) + 1))
        out.insert(pos, int(rng.integers(vocab_size)))
    return out


def corrupt(y: Sequence[int], spec: AttackSpec, vocab_size: int, rng: SeedLike = None) -> List[int]:
    """
    Apply one random edit attack.

    Args:
        y: Token sequence
        spec: Attack kind, fraction and seed
        vocab_size: Vocabulary replacement tokens are drawn from
        rng: Overrides spec.seed when given

    Returns:
        The corrupted sequence
    """
    if vocab_size < 1:
        raise AttackError(f"vocab_size must be >= 1, got {vocab_size}")
    y = [int(t) for t in y]
    if any(not 0 <= t < vocab_size for t in y):
        raise AttackError(f"sequence has tokens outside vocabulary of size {vocab_size}")
    rng = make_rng(spec.seed if rng is None else rng)
    n = edit_count(len(y), spec.fraction)

    if spec.kind == AttackKind.SUBSTITUTE:
        out = substitute(y, n, vocab_size, rng)
    elif spec.kind == AttackKind.DELETE:
        out = delete(y, n, rng)
    else:
        out = insert(y, n, vocab_size, rng)
    logger.debug(f"{spec.kind.value} attack: {n} edits, {len(y)} -> {len(out)} tokens")
    return out


def token_edit_distance(a: Sequence[int], b: Sequence[int]) -> int:
    """Unit-cost Levenshtein distance between two token sequences."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, t in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != t)))
        prev = cur
    return prev[-1]
