"""
File Service: reading and writing the toolkit's documents.
JSON documents are validated with their pydantic schema; token files are JSON
integer arrays or trace objects; corpora are UTF-8 text.
"""

import csv
import json
import logging
import sys
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from wepa.core.lm import TokenSeq, tokenize_text
from wepa.schemas.documents import TraceFile
from wepa.utils.error_handler import FileFormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
M = TypeVar("M", bound=BaseModel)


def _read_text(path: PathLike) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FileFormatError(f"file not found: {path}")
    except (OSError, UnicodeDecodeError) as e:
        raise FileFormatError(f"cannot read {path}: {e}")


def _parse_json(text: str, path: PathLike) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FileFormatError(f"{path} is not valid JSON: {e}")


def read_document(path: PathLike, schema: Type[M]) -> M:
    """Load a JSON file and validate it against `schema`."""
    data = _parse_json(_read_text(path), path)
    try:
        doc = schema.model_validate(data)
    except ValidationError as e:
        raise FileFormatError(f"{path} is not a valid {schema.__name__}: {e.errors()[0]['msg']}")
    logger.debug(f"Loaded {schema.__name__} from {path}")
    return doc


def write_document(path: PathLike, doc: BaseModel):
    """Write a document as JSON (aliases such as "lambda" are used as keys)."""
    Path(path).write_text(doc.model_dump_json(by_alias=True, indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote {type(doc).__name__} to {path}")


def _as_tokens(data: Any, path: PathLike) -> TokenSeq:
    if isinstance(data, dict):
        try:
            return TraceFile.model_validate(data).tokens
        except ValidationError as e:
            raise FileFormatError(f"{path} holds an invalid trace: {e.errors()[0]['msg']}")
    if isinstance(data, list) and all(isinstance(t, int) and not isinstance(t, bool) for t in data):
        if any(t < 0 for t in data):
            raise FileFormatError(f"{path} holds negative token ids")
        return list(data)
    raise FileFormatError(f"{path} must hold a JSON integer array or a trace object")


def read_tokens(path: PathLike) -> TokenSeq:
    return _as_tokens(_parse_json(_read_text(path), path), path)


def read_token_batch(path: PathLike) -> List[TokenSeq]:
    """
    Several sequences: a JSON array of arrays, or JSON Lines with one array or
    trace object per line.
    """
    text = _read_text(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        return [_as_tokens(_parse_json(line, path), path) for line in text.splitlines() if line.strip()]
    if isinstance(data, list) and data and all(isinstance(row, (list, dict)) for row in data):
        return [_as_tokens(row, path) for row in data]
    return [_as_tokens(data, path)]


def write_tokens(path: PathLike, doc: Union[TraceFile, Sequence[int]]):
    if not isinstance(doc, TraceFile):
        doc = TraceFile(tokens=[int(t) for t in doc])
    write_document(path, doc)


def read_corpus(path: PathLike, integers: bool = False) -> TokenSeq:
    """UTF-8 text as byte tokens, or whitespace-separated integer ids."""
    text = _read_text(path)
    if not integers:
        return tokenize_text(text)
    try:
        tokens = [int(t) for t in text.split()]
    except ValueError as e:
        raise FileFormatError(f"{path} is not a whitespace-separated integer stream: {e}")
    if any(t < 0 for t in tokens):
        raise FileFormatError(f"{path} holds negative token ids")
    return tokens


def write_csv(
    rows: Iterable[dict],
    fieldnames: Sequence[str],
    path: Optional[PathLike] = None,
    comments: Sequence[str] = (),
):
    """CSV with leading '# ' comment lines; stdout when no path is given."""
    handle = open(path, "w", newline="", encoding="utf-8") if path else sys.stdout
    try:
        for line in comments:
            handle.write(f"# {line}\n")
        writer = csv.DictWriter(handle, fieldnames=list(fieldnames), extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    finally:
        if path:
            handle.close()
            logger.info(f"Wrote CSV to {path}")
