"""
Key and model commands: gen-key, train-model.
"""

import argparse
import logging

from wepa.commands.common import emit, resolve_bits
from wepa.core.config import WatermarkConfig
from wepa.core.lm import train_markov
from wepa.core.wkey import gen_key
from wepa.services.files import read_corpus
from wepa.utils.rng import fresh_seed

logger = logging.getLogger(__name__)


def cmd_gen_key(args: argparse.Namespace) -> int:
    lambda_ = WatermarkConfig.LAMBDA if args.lambda_ is None else args.lambda_
    degree = WatermarkConfig.DEGREE if args.degree is None else args.degree
    bitwidth = resolve_bits(args.bitwidth, WatermarkConfig.BITWIDTH)
    precision = resolve_bits(args.precision, WatermarkConfig.PRECISION)
    if bitwidth is not None and precision is None:
        precision = bitwidth
    seed = fresh_seed() if args.seed is None else args.seed
    if args.seed is None:
        logger.info(f"No seed given; drew seed {seed}")

    key = gen_key(lambda_, degree, args.vocab, bitwidth, precision, seed)
    emit(key.to_file(expanded=args.expanded), args.output)
    return 0


def cmd_train_model(args: argparse.Namespace) -> int:
    tokens = read_corpus(args.input, integers=args.integers)
    vocab = args.vocab
    if vocab is None and not args.integers:
        vocab = 256
    alpha = WatermarkConfig.MARKOV_ALPHA if args.alpha is None else args.alpha
    spec = train_markov(tokens, order=args.order, alpha=alpha, vocab_size=vocab)
    emit(spec, args.output)
    return 0


def register(subparsers):
    p = subparsers.add_parser("gen-key", help="generate a watermark key")
    p.add_argument("--lambda", dest="lambda_", type=int, help="number of key states (default WEPA_LAMBDA)")
    p.add_argument("--degree", type=int, help="successors per state (default WEPA_DEGREE)")
    p.add_argument("--vocab", type=int, required=True, help="vocabulary size")
    p.add_argument("--bitwidth", help="fixed bits per noise value, or 'float'")
    p.add_argument("--precision", help="total bits per noise value, or 'float'")
    p.add_argument("--seed", type=int)
    p.add_argument("--expanded", action="store_true", help="store the noise matrix in the file")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen_key)

    p = subparsers.add_parser("train-model", help="fit a Markov model to a corpus")
    p.add_argument("--input", required=True, help="UTF-8 text (byte tokens) or integer stream")
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--alpha", type=float, help="add-alpha smoothing (default WEPA_MARKOV_ALPHA)")
    p.add_argument("--integers", action="store_true", help="input is whitespace-separated token ids")
    p.add_argument("--vocab", type=int, help="vocabulary size (256 for text)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_train_model)
