"""
Pydantic schemas for the results the toolkit emits.
"""

from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field


class DetectionReport(BaseModel):
    """Detection outcome for one token sequence."""
    psi: float
    null_mean: float
    null_std: float
    p_hat: float = Field(gt=0.0, le=1.0)
    z: Optional[float] = None
    vp_bound: float = Field(gt=0.0, le=1.0)
    verdict: bool
    null_samples: int
    threshold: float
    length: int


class LpnReport(BaseModel):
    """Match-rate detector outcome of the parity scheme."""
    embedded_positions: int
    match_rate: float = Field(ge=0.0, le=1.0)
    theta: float
    verdict: bool
    mean_token_entropy: Optional[float] = None


class BenchRow(BaseModel):
    """One timed configuration; median, minimum and raw samples in nanoseconds."""
    model_config = ConfigDict(populate_by_name=True)

    detector: str
    m: int
    lambda_: int = Field(alias="lambda")
    d: int
    k: Optional[int] = None
    median_ns: int
    min_ns: int
    samples: List[int]


class ScalingReport(BaseModel):
    rows: List[BenchRow]
    slopes: Dict[str, float]


class SweepRow(BaseModel):
    """Quantiles of p̂ across trials for one grid point and arm."""
    model_config = ConfigDict(populate_by_name=True)

    experiment: str
    arm: str
    m: int
    lambda_: int = Field(alias="lambda")
    d: int
    b: Optional[int] = None
    c: Optional[int] = None
    attack: Optional[str] = None
    epsilon: float = 0.0
    trials: int
    p_q33: float
    p_median: float
    p_q67: float
    detect_rate: float
    roc_auc: Optional[float] = None
    tpr_at_1fpr: Optional[float] = None
