"""
Pydantic schemas for the parameters the toolkit accepts.
"""

from enum import Enum
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from wepa.core.config import WatermarkConfig
from wepa.schemas.documents import ModelSpec


class CostParams(BaseModel):
    """
    Edit costs of the generalized Levenshtein distance:
    { "gamma_d": deletion >= 0, "gamma_i": insertion > 0 }
    """
    model_config = ConfigDict(frozen=True)

    gamma_d: float = Field(default=0.0, ge=0.0)
    gamma_i: float = Field(default=2.0, gt=0.0)

    @classmethod
    def from_config(cls) -> "CostParams":
        return cls(gamma_d=WatermarkConfig.GAMMA_D, gamma_i=WatermarkConfig.GAMMA_I)


class AttackKind(str, Enum):
    SUBSTITUTE = "substitute"
    DELETE = "delete"
    INSERT = "insert"


class AttackSpec(BaseModel):
    """Random edit attack: { "kind": ..., "fraction": ε in [0, 1], "seed": ... }"""
    model_config = ConfigDict(frozen=True)

    kind: AttackKind
    fraction: float = Field(ge=0.0, le=1.0)
    seed: Optional[int] = None


class SweepKind(str, Enum):
    """Experiment families run by `sweep`"""
    LENGTH = "length"
    ATTACK = "attack"
    LAMBDA = "lambda"
    BITWIDTH = "bitwidth"
    DEGREE = "degree"


class SweepConfig(BaseModel):
    """
    Sweep configuration file.

    The model is either given inline, loaded from `model_path` (relative paths
    resolve against the config file) or, when both are absent, uniform over
    `vocab_size` tokens. `lengths` drive the length experiment; the other
    experiments run at length `m` and vary their own grid.
    """
    model_config = ConfigDict(populate_by_name=True)

    experiment: SweepKind = SweepKind.LENGTH
    model: Optional[ModelSpec] = None
    model_path: Optional[str] = None
    vocab_size: int = Field(default=16, ge=2)
    prompt: List[int] = Field(default_factory=list)

    lambda_: int = Field(default=64, alias="lambda", ge=1)
    degree: int = Field(default=1, ge=1)
    bitwidth: Optional[int] = Field(default=None, ge=1)
    precision: Optional[int] = Field(default=None, ge=1)

    m: int = Field(default=50, ge=1)
    lengths: List[int] = Field(default_factory=lambda: [4, 8, 12, 16, 20, 50])
    attack_kinds: List[AttackKind] = Field(default_factory=lambda: list(AttackKind))
    epsilons: List[float] = Field(default_factory=lambda: [0.0, 0.1, 0.2])
    lambdas: List[int] = Field(default_factory=lambda: [16, 64, 256])
    bitwidths: List[int] = Field(default_factory=lambda: [1, 2, 4, 8])
    degrees: List[int] = Field(default_factory=lambda: [1, 2])

    trials: int = Field(default=100, ge=1)
    null_samples: int = Field(default=199, ge=1)
    gamma_d: float = Field(default=0.0, ge=0.0)
    gamma_i: float = Field(default=2.0, gt=0.0)
    include_null: bool = True
    seed: int = 0
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def check_grids(self):
        if (self.bitwidth is None) != (self.precision is None):
            raise ValueError("bitwidth and precision must both be set or both be null")
        if any(m < 1 for m in self.lengths):
            raise ValueError("lengths must be >= 1")
        if any(not 0.0 <= e <= 1.0 for e in self.epsilons):
            raise ValueError("epsilons must lie in [0, 1]")
        if any(b < 1 or b > 52 for b in self.bitwidths):
            raise ValueError("bitwidths must lie in [1, 52]")
        if any(lam < 1 for lam in self.lambdas) or any(d < 1 for d in self.degrees):
            raise ValueError("lambdas and degrees must be >= 1")
        return self

    @property
    def costs(self) -> CostParams:
        return CostParams(gamma_d=self.gamma_d, gamma_i=self.gamma_i)


class BenchGrid(BaseModel):
    """Timing grid for `bench`: lev_dp over ms (at base_lambda) and lambdas (at base_m), the baseline over ks."""
    ms: List[int] = Field(default_factory=lambda: [512, 1024, 2048])
    lambdas: List[int] = Field(default_factory=lambda: [256, 512, 1024])
    degree: int = Field(default=1, ge=1)
    base_m: int = Field(default=1024, ge=1)
    base_lambda: int = Field(default=256, ge=2)
    ks: List[int] = Field(default_factory=lambda: [8, 16, 32])
    baseline_m: int = Field(default=256, ge=1)
    baseline_lambda: int = Field(default=256, ge=1)
    vocab_size: int = Field(default=16, ge=2)
    repeats: int = Field(default=5, ge=1)
    warmup: int = Field(default=1, ge=0)
    seed: int = 0
    include_baseline: bool = True
    slope_statistic: Literal["median", "min"] = "median"

    @model_validator(mode="after")
    def check_grid(self):
        if not self.ms or not self.lambdas:
            raise ValueError("bench grid needs at least one length and one lambda")
        if any(k > self.baseline_m for k in self.ks):
            raise ValueError(f"block sizes must not exceed baseline_m={self.baseline_m}")
        return self
