"""
Sweep Service: p-value experiments over text length, edit attacks, key size,
bitwidth and degree.

Each grid point runs `trials` watermarked generations (plus an unwatermarked
arm) and reports the 1/3, 1/2 and 2/3 quantiles of p̂. Trial seeds are derived
from (seed, trial), so results do not depend on how trials are scheduled.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.metrics import roc_auc_score, roc_curve
from tqdm import tqdm

from wepa.core.config import WatermarkConfig
from wepa.core.decode import generate_watermarked
from wepa.core.detect import p_value
from wepa.core.lm import ModelLike, generate_plain, load_model, uniform_spec
from wepa.core.wkey import gen_key
from wepa.schemas.documents import ModelSpec
from wepa.schemas.reports import SweepRow
from wepa.schemas.requests import AttackKind, AttackSpec, SweepConfig, SweepKind
from wepa.services.attacks import corrupt
from wepa.services.files import read_document
from wepa.utils.error_handler import WatermarkError
from wepa.utils.rng import derive_seed

logger = logging.getLogger(__name__)

KEY_STREAM = 0
GEN_STREAM = 1
ATTACK_STREAM = 2
PLAIN_STREAM = 3
DETECT_STREAM = 4

ROC_FPR = 0.01

SWEEP_FIELDS = [
    "experiment", "arm", "m", "lambda", "d", "b", "c", "attack", "epsilon", "trials",
    "p_q33", "p_median", "p_q67", "detect_rate", "roc_auc", "tpr_at_1fpr",
]


class SweepError(WatermarkError):
    """Raised for sweep configurations that cannot run."""
    def __init__(self, message: str):
        super().__init__(message, "sweep_error")


@dataclass(frozen=True)
class Condition:
    """One grid point of a sweep."""
    m: int
    lambda_: int
    degree: int
    bitwidth: Optional[int]
    precision: Optional[int]
    attack: Optional[AttackKind] = None
    epsilon: float = 0.0


def resolve_model(config: SweepConfig, base_dir: Optional[Path] = None) -> ModelSpec:
    if config.model is not None:
        return config.model
    if config.model_path:
        path = Path(config.model_path)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        return read_document(path, ModelSpec)
    return uniform_spec(config.vocab_size)


def conditions(config: SweepConfig) -> List[Condition]:
    """Expand the configured experiment into its grid points."""
    base = dict(m=config.m, lambda_=config.lambda_, degree=config.degree,
                bitwidth=config.bitwidth, precision=config.precision)
    kind = config.experiment
    if kind == SweepKind.LENGTH:
        grid = [Condition(**{**base, "m": m}) for m in config.lengths]
    elif kind == SweepKind.ATTACK:
        grid = [Condition(**base, attack=a, epsilon=e) for a in config.attack_kinds for e in config.epsilons]
    elif kind == SweepKind.LAMBDA:
        grid = [Condition(**{**base, "lambda_": lam}) for lam in config.lambdas]
    elif kind == SweepKind.BITWIDTH:
        grid = [
            Condition(**{**base, "bitwidth": b, "precision": max(b, config.precision or b)})
            for b in config.bitwidths
        ]
    else:
        grid = [Condition(**{**base, "degree": d}) for d in config.degrees]

    for cond in grid:
        if cond.lambda_ > 1 and cond.degree >= cond.lambda_:
            raise SweepError(f"degree {cond.degree} needs lambda > {cond.degree}, got {cond.lambda_}")
        if cond.lambda_ == 1 and cond.degree != 1:
            raise SweepError("a single-state key only supports degree 1")
    return grid


def _run_trial(args: Tuple[Condition, ModelLike, SweepConfig, int, int]) -> Tuple[float, Optional[float]]:
    cond, model, config, trial, detect_seed = args
    seed = config.seed
    key = gen_key(cond.lambda_, cond.degree, model.vocab_size, cond.bitwidth, cond.precision,
                  derive_seed(seed, trial, KEY_STREAM))
    tokens = generate_watermarked(model, key, config.prompt, cond.m, derive_seed(seed, trial, GEN_STREAM)).tokens
    if cond.attack is not None:
        spec = AttackSpec(kind=cond.attack, fraction=cond.epsilon, seed=derive_seed(seed, trial, ATTACK_STREAM))
        tokens = corrupt(tokens, spec, model.vocab_size)
    p_marked, _ = p_value(tokens, key, config.costs, config.null_samples, detect_seed)

    p_plain = None
    if config.include_null:
        plain = generate_plain(model, config.prompt, cond.m, derive_seed(seed, trial, PLAIN_STREAM))
        p_plain, _ = p_value(plain, key, config.costs, config.null_samples, detect_seed)
    return p_marked, p_plain


def _roc_inputs(p_marked: Sequence[float], p_null: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    # watermarked arm is the positive class; a smaller p̂ is a higher score
    labels = np.r_[np.ones(len(p_marked)), np.zeros(len(p_null))]
    return labels, -np.r_[np.asarray(p_marked, dtype=float), np.asarray(p_null, dtype=float)]


def roc_auc(p_marked: Sequence[float], p_null: Sequence[float]) -> float:
    """Probability that a watermarked p̂ ranks below a null p̂ (ties count half)."""
    return float(roc_auc_score(*_roc_inputs(p_marked, p_null)))


def tpr_at_fpr(p_marked: Sequence[float], p_null: Sequence[float], fpr: float = ROC_FPR) -> float:
    """Detection rate at the strictest p̂ cut that flags at most fpr of the null arm."""
    false_rate, true_rate, _ = roc_curve(*_roc_inputs(p_marked, p_null), drop_intermediate=False)
    return float(true_rate[false_rate <= fpr].max())


def _row(config: SweepConfig, cond: Condition, arm: str, p: Sequence[float], **extra) -> SweepRow:
    q33, q50, q67 = np.quantile(p, [1 / 3, 1 / 2, 2 / 3])
    return SweepRow(
        experiment=config.experiment.value,
        arm=arm,
        m=cond.m,
        lambda_=cond.lambda_,
        d=cond.degree,
        b=cond.bitwidth,
        c=cond.precision,
        attack=cond.attack.value if cond.attack else None,
        epsilon=cond.epsilon,
        trials=len(p),
        p_q33=float(q33),
        p_median=float(q50),
        p_q67=float(q67),
        detect_rate=float(np.mean(np.asarray(p) <= WatermarkConfig.THRESHOLD)),
        **extra,
    )


def run_sweep(
    config: SweepConfig,
    base_dir: Optional[Path] = None,
    progress: bool = False,
) -> Tuple[List[SweepRow], Dict[str, object]]:
    """
    Run every grid point of the configured experiment.

    Args:
        config: Sweep configuration
        base_dir: Directory relative model paths resolve against
        progress: Show a tqdm bar on stderr

    Returns:
        (rows, seeds) where seeds lists every seed the run used
    """
    model = resolve_model(config, base_dir)
    grid = conditions(config)
    detect_seed = derive_seed(config.seed, 0, DETECT_STREAM)
    logger.info(f"Sweep '{config.experiment.value}': {len(grid)} grid points x {config.trials} trials, "
                f"N={config.null_samples}")

    rows: List[SweepRow] = []
    workers = max(config.workers, 1)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    # worker processes receive the picklable spec, the local loop a built model
    shared = model if pool else load_model(model)
    try:
        with tqdm(total=len(grid) * config.trials, desc="sweep", disable=not progress) as bar:
            for cond in grid:
                tasks = [(cond, shared, config, trial, detect_seed) for trial in range(config.trials)]
                results = []
                for result in (pool.map(_run_trial, tasks) if pool else map(_run_trial, tasks)):
                    results.append(result)
                    bar.update(1)
                marked = [r[0] for r in results]
                if config.include_null:
                    plain = [r[1] for r in results]
                    rows.append(_row(config, cond, "watermarked", marked,
                                     roc_auc=roc_auc(marked, plain), tpr_at_1fpr=tpr_at_fpr(marked, plain)))
                    rows.append(_row(config, cond, "null", plain))
                else:
                    rows.append(_row(config, cond, "watermarked", marked))
                logger.info(f"m={cond.m}, lambda={cond.lambda_}, d={cond.degree}, b={cond.bitwidth}, "
                            f"attack={cond.attack.value if cond.attack else None}, eps={cond.epsilon}: "
                            f"median p={rows[-1 if not config.include_null else -2].p_median:.4f}")
    finally:
        if pool:
            pool.shutdown()

    seeds = {
        "seed": config.seed,
        "detect_seed": detect_seed,
        "key_seeds": [derive_seed(config.seed, t, KEY_STREAM) for t in range(config.trials)],
        "generation_seeds": [derive_seed(config.seed, t, GEN_STREAM) for t in range(config.trials)],
        "attack_seeds": [derive_seed(config.seed, t, ATTACK_STREAM) for t in range(config.trials)],
        "plain_seeds": [derive_seed(config.seed, t, PLAIN_STREAM) for t in range(config.trials)],
    }
    return rows, seeds


def csv_comments(config: SweepConfig, seeds: Dict[str, object]) -> List[str]:
    """Header comment lines that make a sweep CSV reproducible."""
    lines = [
        f"experiment={config.experiment.value} trials={config.trials} null_samples={config.null_samples} "
        f"gamma_d={config.gamma_d} gamma_i={config.gamma_i} threshold={WatermarkConfig.THRESHOLD}",
    ]
    for name, value in seeds.items():
        text = ",".join(str(v) for v in value) if isinstance(value, list) else str(value)
        lines.append(f"{name}={text}")
    return lines


def row_dicts(rows: Sequence[SweepRow]) -> List[dict]:
    return [row.model_dump(by_alias=True) for row in rows]
