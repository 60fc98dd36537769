"""
Detection command: one report per input sequence.
"""

import argparse
import logging

from wepa.commands.common import emit, load_key
from wepa.core.config import WatermarkConfig
from wepa.core.detect import detect
from wepa.schemas.requests import CostParams
from wepa.services.files import read_token_batch, read_tokens

logger = logging.getLogger(__name__)


def cmd_detect(args: argparse.Namespace) -> int:
    key = load_key(args.key)
    costs = CostParams(
        gamma_d=WatermarkConfig.GAMMA_D if args.gamma_d is None else args.gamma_d,
        gamma_i=WatermarkConfig.GAMMA_I if args.gamma_i is None else args.gamma_i,
    )
    n = WatermarkConfig.NULL_SAMPLES if args.null_samples is None else args.null_samples
    threshold = WatermarkConfig.THRESHOLD if args.threshold is None else args.threshold

    sequences = read_token_batch(args.input) if args.batch else [read_tokens(args.input)]
    for i, tokens in enumerate(sequences):
        if not tokens:
            logger.warning(f"Sequence {i} is empty; it cannot carry a watermark")
        verdict, report = detect(tokens, key, costs, threshold, n, args.seed)
        logger.info(f"Sequence {i}: m={len(tokens)}, p_hat={report.p_hat:.5f}, verdict={verdict}")
        emit(report)
    return 0


def register(subparsers):
    p = subparsers.add_parser("detect", help="test token sequences for the watermark")
    p.add_argument("--key", required=True)
    p.add_argument("--input", required=True, help="token file, or one sequence per line with --batch")
    p.add_argument("--batch", action="store_true", help="input holds several sequences; one JSON report per line")
    p.add_argument("--null-samples", type=int, help="null keys N (default WEPA_NULL_SAMPLES)")
    p.add_argument("--gamma-d", type=float, help="deletion cost (default WEPA_GAMMA_D)")
    p.add_argument("--gamma-i", type=float, help="insertion cost (default WEPA_GAMMA_I)")
    p.add_argument("--threshold", type=float, help="p-value level (default WEPA_THRESHOLD)")
    p.add_argument("--seed", type=int, default=0, help="seed the null keys are derived from")
    p.set_defaults(func=cmd_detect)
