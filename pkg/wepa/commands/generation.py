"""
Generation commands: generate (watermarked or plain) and attack.
"""

import argparse
import logging

from wepa.commands.common import emit, load_key, load_model_spec
from wepa.core.decode import generate_watermarked
from wepa.core.lm import generate_plain, tokenize_text
from wepa.schemas.documents import TraceFile
from wepa.schemas.requests import AttackKind, AttackSpec
from wepa.services.attacks import corrupt
from wepa.services.files import read_tokens
from wepa.utils.error_handler import FileFormatError
from wepa.utils.rng import fresh_seed

logger = logging.getLogger(__name__)


def cmd_generate(args: argparse.Namespace) -> int:
    key = load_key(args.key)
    model = load_model_spec(args.model, key.vocab_size)
    if args.prompt_file and args.prompt_text is not None:
        raise FileFormatError("give either --prompt-file or --prompt-text, not both")
    prompt = read_tokens(args.prompt_file) if args.prompt_file else []
    if args.prompt_text is not None:
        prompt = tokenize_text(args.prompt_text)
    seed = fresh_seed() if args.seed is None else args.seed

    if args.plain:
        tokens = generate_plain(model, prompt, args.length, seed)
        doc = TraceFile(tokens=tokens, watermarked=False, seed=seed)
    else:
        trace = generate_watermarked(model, key, prompt, args.length, seed, args.initial_state)
        doc = trace.to_file(key, seed)
    logger.info(f"Generated {args.length} {'plain' if args.plain else 'watermarked'} tokens (seed {seed})")
    emit(doc, args.output)
    return 0


def cmd_attack(args: argparse.Namespace) -> int:
    tokens = read_tokens(args.input)
    spec = AttackSpec(kind=args.kind, fraction=args.epsilon, seed=args.seed)
    out = corrupt(tokens, spec, args.vocab)
    emit(TraceFile(tokens=out, seed=args.seed), args.output)
    return 0


def register(subparsers):
    p = subparsers.add_parser("generate", help="sample tokens with (or without) the watermark")
    p.add_argument("--key", required=True)
    p.add_argument("--model", help="model spec JSON (uniform over the key vocabulary if omitted)")
    p.add_argument("--prompt-file", help="JSON token array used as the prompt")
    p.add_argument("--prompt-text", help="prompt text, tokenized as UTF-8 bytes")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--initial-state", type=int, help="fix the key state generation starts from")
    p.add_argument("--plain", action="store_true", help="sample without the watermark")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_generate)

    p = subparsers.add_parser("attack", help="randomly edit a token sequence")
    p.add_argument("--kind", required=True, choices=[k.value for k in AttackKind])
    p.add_argument("--epsilon", type=float, required=True, help="fraction of tokens to edit")
    p.add_argument("--seed", type=int)
    p.add_argument("--input", required=True)
    p.add_argument("--vocab", type=int, required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_attack)
