"""
Demo commands: lpn-demo (parity scheme trials) and sam-demo (cyclic suffix automaton).
"""

import argparse
import logging

from wepa.commands.common import emit_dict
from wepa.core import automata
from wepa.core.lpn import lpn_trials

logger = logging.getLogger(__name__)


def cmd_lpn_demo(args: argparse.Namespace) -> int:
    summary = lpn_trials(args.lambda_, args.q, args.t, args.trials, args.seed, args.theta)
    emit_dict(summary)
    return 0


def cmd_sam_demo(args: argparse.Namespace) -> int:
    s = [ord(ch) for ch in args.string]
    sam = automata.suffix_automaton_cyclic(s, literal_wrap=args.literal_wrap)
    checks = []
    for word in args.check or []:
        w = [ord(ch) for ch in word]
        accepted = sam.accepts(w)
        expected = automata.is_cyclic_substring(s, w)
        if accepted != expected:
            logger.warning(f"Automaton and direct check disagree on {word!r}")
        checks.append({"word": word, "accepted": accepted, "expected": expected})
    emit_dict({
        "string": args.string,
        "n_states": sam.n_states,
        "state_bound": 4 * len(s),
        "literal_wrap": args.literal_wrap,
        "automaton": sam.to_document(),
        "checks": checks,
    })
    return 0


def register(subparsers):
    p = subparsers.add_parser("lpn-demo", help="completeness and soundness trials of the parity scheme")
    p.add_argument("--lambda", dest="lambda_", type=int, default=8)
    p.add_argument("--q", type=float, default=1 / 3, help="parity flip rate")
    p.add_argument("--t", type=int, default=400, help="embedded positions per sequence")
    p.add_argument("--theta", type=float, help="acceptance margin (default 1/(2 lambda))")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_lpn_demo)

    p = subparsers.add_parser("sam-demo", help="build the suffix automaton of a cyclic string")
    p.add_argument("--string", required=True)
    p.add_argument("--check", action="append", help="word to test for membership (repeatable)")
    p.add_argument("--literal-wrap", action="store_true", help="use the newest first-pass state as wrap target")
    p.set_defaults(func=cmd_sam_demo)
