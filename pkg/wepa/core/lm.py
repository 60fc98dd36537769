"""
Language Model Module: the autoregressive interface and the toy models that
stand in for neural generators (uniform, fixed categorical, smoothed Markov).
"""

import logging
from collections import Counter
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from wepa.schemas.documents import ModelKind, ModelSpec
from wepa.utils.error_handler import WatermarkError
from wepa.utils.rng import SeedLike, make_rng

logger = logging.getLogger(__name__)

TokenSeq = List[int]


class ModelError(WatermarkError):
    """Raised for invalid model specs or token sequences."""
    def __init__(self, message: str):
        super().__init__(message, "invalid_model")


class LanguageModel:
    """Maps a token prefix to a distribution over the vocabulary."""

    def __init__(self, spec: ModelSpec):
        self.spec = spec
        self.vocab_size = spec.vocab_size

    def next_dist(self, prefix: Sequence[int]) -> np.ndarray:
        raise NotImplementedError

    def check_tokens(self, tokens: Sequence[int]):
        for t in tokens:
            if not 0 <= int(t) < self.vocab_size:
                raise ModelError(f"token {t} outside vocabulary of size {self.vocab_size}")


class UniformModel(LanguageModel):
    def __init__(self, spec: ModelSpec):
        super().__init__(spec)
        self._dist = np.full(spec.vocab_size, 1.0 / spec.vocab_size)
        self._dist.setflags(write=False)

    def next_dist(self, prefix: Sequence[int]) -> np.ndarray:
        return self._dist


class CategoricalModel(LanguageModel):
    def __init__(self, spec: ModelSpec):
        super().__init__(spec)
        self._dist = np.asarray(spec.probs, dtype=np.float64)
        self._dist.setflags(write=False)

    def next_dist(self, prefix: Sequence[int]) -> np.ndarray:
        return self._dist


class MarkovModel(LanguageModel):
    """Order-k Markov model with add-α smoothing."""

    def __init__(self, spec: ModelSpec):
        super().__init__(spec)
        self.order = spec.order
        self.alpha = spec.alpha
        self._rows: Dict[Tuple[int, ...], np.ndarray] = {}
        for context, row in spec.counts.items():
            key = tuple(int(t) for t in context.split(",")) if context else ()
            self._rows[key] = self._smooth(row)
        if () not in self._rows:
            self._rows[()] = self._smooth({})

    def _smooth(self, row: Dict[int, int]) -> np.ndarray:
        counts = np.zeros(self.vocab_size, dtype=np.float64)
        for token, count in row.items():
            counts[int(token)] = count
        counts += self.alpha
        total = counts.sum()
        if total <= 0:
            dist = np.full(self.vocab_size, 1.0 / self.vocab_size)
        else:
            dist = counts / total
        dist.setflags(write=False)
        return dist

    def next_dist(self, prefix: Sequence[int]) -> np.ndarray:
        if self.order == 0 or len(prefix) < self.order:
            return self._rows[()]
        context = tuple(int(t) for t in prefix[len(prefix) - self.order:])
        return self._rows.get(context, self._rows[()])


ModelLike = Union[ModelSpec, LanguageModel]

_MODEL_CLASSES = {
    ModelKind.UNIFORM: UniformModel,
    ModelKind.FIXED: CategoricalModel,
    ModelKind.MARKOV: MarkovModel,
}


def load_model(model: ModelLike) -> LanguageModel:
    """Instantiate the model for a spec; model instances pass through."""
    if isinstance(model, LanguageModel):
        return model
    return _MODEL_CLASSES[model.kind](model)


def uniform_spec(vocab_size: int) -> ModelSpec:
    return ModelSpec(kind=ModelKind.UNIFORM, vocab_size=vocab_size)


def categorical_spec(probs: Sequence[float]) -> ModelSpec:
    return ModelSpec(kind=ModelKind.FIXED, vocab_size=len(probs), probs=list(probs))


def next_dist(model: ModelLike, prefix: Sequence[int]) -> np.ndarray:
    """Distribution of the next token given the prefix."""
    return load_model(model).next_dist(prefix)


def sample_categorical(dist: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw; zero-probability tokens are never returned."""
    cdf = np.cumsum(dist)
    token = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    if token >= len(dist):
        token = int(np.flatnonzero(dist)[-1])
    return token


def generate_plain(model: ModelLike, prompt: Sequence[int], m: int, seed: SeedLike = None) -> TokenSeq:
    """Sample m tokens autoregressively without a watermark."""
    if m < 0:
        raise ModelError(f"length must be >= 0, got {m}")
    lm = load_model(model)
    lm.check_tokens(prompt)
    rng = make_rng(seed)
    context = list(prompt)
    out: TokenSeq = []
    for _ in range(m):
        token = sample_categorical(lm.next_dist(context), rng)
        out.append(token)
        context.append(token)
    return out


def entropy_bits(dist: np.ndarray) -> float:
    p = dist[dist > 0]
    return float(-(p * np.log2(p)).sum())


def entropy_rate(
    model: ModelLike,
    samples: int,
    m: int,
    seed: SeedLike = None,
    prompt: Sequence[int] = (),
) -> float:
    """
    Monte-Carlo estimate of the mean conditional entropy per token (bits),
    averaged over uniformly random positions of sampled continuations.
    """
    if samples < 1 or m < 1:
        raise ModelError(f"need samples >= 1 and m >= 1, got {samples}, {m}")
    lm = load_model(model)
    rng = make_rng(seed)
    total = 0.0
    for _ in range(samples):
        context = list(prompt)
        for _ in range(m):
            dist = lm.next_dist(context)
            total += entropy_bits(dist)
            context.append(sample_categorical(dist, rng))
    rate = total / (samples * m)
    logger.debug(f"Entropy rate over {samples}x{m} positions: {rate:.4f} bits/token")
    return rate


def tokenize_text(text: str) -> TokenSeq:
    """Byte-level tokenization of UTF-8 text (vocabulary of 256)."""
    return list(text.encode("utf-8"))


def train_markov(
    tokens: Sequence[int],
    order: int = 1,
    alpha: float = 0.1,
    vocab_size: Optional[int] = None,
) -> ModelSpec:
    """Count order-k transitions (plus the order-0 row) into a Markov spec."""
    if order < 0:
        raise ModelError(f"order must be >= 0, got {order}")
    if alpha < 0:
        raise ModelError(f"alpha must be >= 0, got {alpha}")
    tokens = [int(t) for t in tokens]
    if vocab_size is None:
        vocab_size = max(tokens) + 1 if tokens else 1
    if any(not 0 <= t < vocab_size for t in tokens):
        raise ModelError(f"training stream has tokens outside vocabulary of size {vocab_size}")

    rows: Dict[str, Counter] = {"": Counter(tokens)}
    if order > 0:
        for i in range(order, len(tokens)):
            context = ",".join(str(t) for t in tokens[i - order:i])
            rows.setdefault(context, Counter())[tokens[i]] += 1

    logger.info(f"Trained order-{order} Markov model on {len(tokens)} tokens, "
                f"{len(rows) - 1} contexts, vocab {vocab_size}")
    return ModelSpec(
        kind=ModelKind.MARKOV,
        vocab_size=vocab_size,
        order=order,
        alpha=alpha,
        counts={k: dict(v) for k, v in rows.items()},
    )
