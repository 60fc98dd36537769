"""
wepa command-line entry point.

    python main.py gen-key --vocab 256 --seed 7 -o key.json
    python main.py generate --key key.json --model model.json --length 50 --seed 1 -o tokens.json
    python main.py detect --key key.json --input tokens.json --null-samples 999
"""

import argparse
import logging
import sys
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from wepa import __version__
from wepa.commands import demos, detection, experiments, generation, keys
from wepa.core.config import WatermarkConfig
from wepa.utils.error_handler import (
    EXIT_DATA,
    EXIT_USAGE,
    WatermarkError,
    create_error_response,
    error_response_from,
    log_error,
)

logger = logging.getLogger(__name__)

COMMAND_GROUPS = [keys, generation, detection, experiments, demos]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wepa",
        description="Watermarking with probabilistic automata: keys, generation, detection and experiments.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR (default WEPA_LOG_LEVEL)")
    subparsers = parser.add_subparsers(dest="command")
    for group in COMMAND_GROUPS:
        group.register(subparsers)
    return parser


def configure_logging(level: Optional[str] = None):
    name = (level or WatermarkConfig.LOG_LEVEL).upper()
    logging.basicConfig(
        level=getattr(logging, name, logging.INFO),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand; returns the process exit code."""
    load_dotenv()
    WatermarkConfig.reload()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    configure_logging(args.log_level)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    if logger.isEnabledFor(logging.DEBUG):
        WatermarkConfig.log_configuration()

    try:
        return args.func(args)
    except WatermarkError as e:
        log_error(e.error_code, e.message)
        response = error_response_from(e)
    except ValidationError as e:
        log_error("validation_error", str(e))
        response = create_error_response(
            error_code="validation_error",
            message=str(e.errors()[0]["msg"]) if e.errors() else str(e),
            details={"errors": len(e.errors())},
        )
    except ValueError as e:
        log_error("data_error", str(e), e)
        response = error_response_from(e)
    print(response.model_dump_json(), file=sys.stderr)
    return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
