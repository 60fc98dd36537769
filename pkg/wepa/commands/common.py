"""
Shared helpers for the CLI subcommands.
Results go to stdout (or -o files); logs go to stderr.
"""

import json
import logging
import sys
from typing import Optional

from pydantic import BaseModel

from wepa.core.config import FLOAT_MODE
from wepa.core.lm import uniform_spec
from wepa.core.wkey import KeyAutomaton
from wepa.schemas.documents import KeyFile, ModelSpec
from wepa.services.files import read_document, write_document
from wepa.utils.error_handler import FileFormatError

logger = logging.getLogger(__name__)


def resolve_bits(raw: Optional[str], default: Optional[int]) -> Optional[int]:
    """CLI bit count: absent → configured default, "float" → full precision."""
    if raw is None:
        return default
    if raw.strip().lower() == FLOAT_MODE:
        return None
    try:
        return int(raw)
    except ValueError:
        raise FileFormatError(f"bit count must be an integer or '{FLOAT_MODE}', got {raw!r}")


def emit(doc: BaseModel, path: Optional[str] = None):
    """Write a document to `path`, or print it as JSON on stdout."""
    if path:
        write_document(path, doc)
    else:
        print(doc.model_dump_json(by_alias=True))


def emit_dict(data: dict):
    print(json.dumps(data, indent=2))
    sys.stdout.flush()


def load_key(path: str) -> KeyAutomaton:
    return KeyAutomaton.from_file(read_document(path, KeyFile))


def load_model_spec(path: Optional[str], vocab_size: int) -> ModelSpec:
    """Model from file, or uniform over the key's vocabulary when no file is given."""
    if path is None:
        logger.info(f"No model given; using the uniform model over {vocab_size} tokens")
        return uniform_spec(vocab_size)
    spec = read_document(path, ModelSpec)
    if spec.vocab_size != vocab_size:
        raise FileFormatError(f"model vocabulary {spec.vocab_size} does not match key vocabulary {vocab_size}")
    return spec
