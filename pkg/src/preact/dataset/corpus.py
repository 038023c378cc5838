"""JSONL corpus ingestion and pair emission."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Iterable

from .records import Conversation, SchemaError, TrainingPair

logger = logging.getLogger(__name__)


def load_corpus(
    path: str | Path, *, strict: bool = True, errors: list[SchemaError] | None = None
) -> list[Conversation]:
    """Read one conversation per line.

    With ``strict`` the first bad record raises :class:`SchemaError` carrying
    its line number; otherwise bad records are logged, appended to
    ``errors`` when given, and skipped.  Blank lines are ignored.
    """
    conversations = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                try:
                    data = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise SchemaError(f"invalid JSON: {exc.msg}") from None
                if not isinstance(data, dict):
                    raise SchemaError("record is not a JSON object")
                conversations.append(Conversation.from_dict(data))
            except SchemaError as exc:
                err = SchemaError(exc.message, lineno)
                if strict:
                    raise err from None
                logger.warning("%s: skipping record: %s", path, err)
                if errors is not None:
                    errors.append(err)
    return conversations


def _write_jsonl(records: Iterable[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def dump_corpus(conversations: Iterable[Conversation], path: str | Path) -> None:
    _write_jsonl((c.to_dict() for c in conversations), path)


def write_pairs(pairs: Iterable[TrainingPair], path: str | Path) -> None:
    _write_jsonl((p.to_dict() for p in pairs), path)


def read_pairs(path: str | Path) -> list[TrainingPair]:
    with open(path, encoding="utf-8") as fh:
        return [TrainingPair.from_dict(json.loads(line)) for line in fh if line.strip()]
