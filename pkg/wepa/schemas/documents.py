"""
Pydantic schemas for the files the toolkit reads and writes:
model specs, key files and generation traces.
"""

import math
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

PROB_TOL = 1e-9


class ModelKind(str, Enum):
    """Supported toy model kinds"""
    UNIFORM = "uniform"
    FIXED = "fixed-categorical"
    MARKOV = "markov"


class ModelSpec(BaseModel):
    """
    Autoregressive toy model.

    Markov counts map a context key (comma-joined token ids, "" for order 0)
    to {token id: count}; the order-0 row is used for short or unseen contexts.
    """
    model_config = ConfigDict(frozen=True)

    kind: ModelKind
    vocab_size: int = Field(ge=1)
    probs: Optional[List[float]] = None
    order: int = Field(default=1, ge=0)
    alpha: float = Field(default=0.1, ge=0.0)
    counts: Dict[str, Dict[int, int]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def check_kind_params(self):
        if self.kind == ModelKind.FIXED:
            if self.probs is None or len(self.probs) != self.vocab_size:
                raise ValueError("fixed-categorical model needs one probability per token")
            if any(p < 0 or not math.isfinite(p) for p in self.probs):
                raise ValueError("probabilities must be finite and non-negative")
            if abs(sum(self.probs) - 1.0) > PROB_TOL:
                raise ValueError(f"probabilities sum to {sum(self.probs)}, expected 1")
        if self.kind == ModelKind.MARKOV:
            for context, row in self.counts.items():
                ids = [int(t) for t in context.split(",")] if context else []
                if len(ids) not in (0, self.order):
                    raise ValueError(f"context {context!r} does not match order {self.order}")
                if any(not 0 <= t < self.vocab_size for t in ids + list(row)):
                    raise ValueError(f"context {context!r} references a token outside the vocabulary")
                if any(c < 0 for c in row.values()):
                    raise ValueError("counts must be non-negative")
        return self


class KeyFile(BaseModel):
    """
    Key file: {lambda, degree, vocab_size, bitwidth, precision, seed}.
    bitwidth = precision = null selects full-precision (float) mode. The
    expanded form also carries the noise matrix: integer grid numerators t
    (v = t / 2^b) in fixed-point mode, raw floats in float mode.
    """
    model_config = ConfigDict(populate_by_name=True)

    lambda_: int = Field(alias="lambda", ge=1)
    degree: int = Field(ge=1)
    vocab_size: int = Field(ge=1)
    bitwidth: Optional[int] = Field(default=None, ge=1)
    precision: Optional[int] = Field(default=None, ge=1)
    seed: int
    noise: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def check_bits(self):
        if (self.bitwidth is None) != (self.precision is None):
            raise ValueError("bitwidth and precision must both be set or both be null")
        if self.bitwidth is not None and self.bitwidth > self.precision:
            raise ValueError(f"bitwidth {self.bitwidth} exceeds precision {self.precision}")
        if self.noise is not None:
            if len(self.noise) != self.lambda_ or any(len(r) != self.vocab_size for r in self.noise):
                raise ValueError("noise matrix must be lambda x vocab_size")
        return self


class TraceFile(BaseModel):
    """Token sequence file, optionally with the generating states and noises."""
    tokens: List[int]
    states: Optional[List[int]] = None
    noises: Optional[List[List[float]]] = None
    watermarked: bool = False
    seed: Optional[int] = None

    @model_validator(mode="after")
    def check_lengths(self):
        if any(t < 0 for t in self.tokens):
            raise ValueError("token ids must be non-negative")
        if self.states is not None and len(self.states) != len(self.tokens):
            raise ValueError("states and tokens differ in length")
        if self.noises is not None and len(self.noises) != len(self.tokens):
            raise ValueError("noises and tokens differ in length")
        return self
