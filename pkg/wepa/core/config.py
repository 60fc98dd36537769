"""
Watermark Configuration Module
Environment-driven defaults for key generation, detection and experiments.
"""

import os
import logging
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)

FLOAT_MODE = "float"


def _optional_bits(raw: Optional[str]) -> Optional[int]:
    """Parse a bit count; the "float" sentinel (or empty) means full precision."""
    if raw is None or raw.strip() == "" or raw.strip().lower() == FLOAT_MODE:
        return None
    return int(raw)


def _read_environment() -> Dict[str, Any]:
    """WEPA_* settings from the environment, with their defaults."""
    return {
        # Key automaton
        "LAMBDA": int(os.getenv("WEPA_LAMBDA", "256")),
        "DEGREE": int(os.getenv("WEPA_DEGREE", "1")),
        "BITWIDTH": _optional_bits(os.getenv("WEPA_BITWIDTH", FLOAT_MODE)),
        "PRECISION": _optional_bits(os.getenv("WEPA_PRECISION", FLOAT_MODE)),
        # Detection
        "GAMMA_D": float(os.getenv("WEPA_GAMMA_D", "0.0")),
        "GAMMA_I": float(os.getenv("WEPA_GAMMA_I", "2.0")),
        "NULL_SAMPLES": int(os.getenv("WEPA_NULL_SAMPLES", "10000")),
        "THRESHOLD": float(os.getenv("WEPA_THRESHOLD", "0.01")),
        # Models and runtime
        "MARKOV_ALPHA": float(os.getenv("WEPA_MARKOV_ALPHA", "0.1")),
        "LOG_LEVEL": os.getenv("WEPA_LOG_LEVEL", "INFO").upper(),
        "WORKERS": int(os.getenv("WEPA_WORKERS", "1")),
    }


class WatermarkConfig:
    """Watermark configuration"""

    LAMBDA: int
    DEGREE: int
    BITWIDTH: Optional[int]
    PRECISION: Optional[int]
    GAMMA_D: float
    GAMMA_I: float
    NULL_SAMPLES: int
    THRESHOLD: float
    MARKOV_ALPHA: float
    LOG_LEVEL: str
    WORKERS: int

    @classmethod
    def reload(cls):
        """Re-read the environment (after load_dotenv or in tests)."""
        for name, value in _read_environment().items():
            setattr(cls, name, value)

    @classmethod
    def is_float_mode(cls) -> bool:
        """Check if keys default to full machine precision"""
        return cls.BITWIDTH is None

    @classmethod
    def log_configuration(cls):
        """Log the current configuration"""
        bits = "float" if cls.is_float_mode() else f"b={cls.BITWIDTH}, c={cls.PRECISION}"
        logger.info(f"Key automaton: lambda={cls.LAMBDA}, degree={cls.DEGREE}, {bits}")
        logger.info(f"Detection: gamma_d={cls.GAMMA_D}, gamma_i={cls.GAMMA_I}, "
                    f"null_samples={cls.NULL_SAMPLES}, threshold={cls.THRESHOLD}")
        logger.info(f"Markov alpha: {cls.MARKOV_ALPHA}, workers: {cls.WORKERS}")


WatermarkConfig.reload()
