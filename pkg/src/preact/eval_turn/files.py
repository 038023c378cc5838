"""Scoring aligned prediction / ground-truth JSONL files."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from ..plan_core import Action, ParseError, action_from_dict, parse_plan
from .metrics import Level1Report, Prediction, TurnJudgment, aggregate, judge_turn
from .similarity import SimilarityPort, tf_cosine


class AlignmentError(ValueError):
    pass


def _read_jsonl(path: str | Path) -> list[dict[str, Any]]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
    return records


def gt_action(record: dict[str, Any]) -> Action:
    return action_from_dict(record["action"])


def predicted_action(record: dict[str, Any]) -> Prediction:
    """Prediction from a record holding either ``action`` or the ``raw`` completion.

    A raw completion is parsed under ``mode`` (default react) and its first
    step is the prediction; unparsable output yields the :class:`ParseError`.
    """
    if record.get("action"):
        return action_from_dict(record["action"])
    raw = record.get("raw")
    if raw is None:
        return ParseError(record.get("error") or "no prediction", 0, 1, "a prediction")
    try:
        return parse_plan(raw, record.get("mode", "react")).steps[0].action
    except ParseError as exc:
        return exc


def evaluate_records(
    preds: list[dict[str, Any]], gts: list[dict[str, Any]], sim: SimilarityPort = tf_cosine
) -> tuple[Level1Report, list[TurnJudgment]]:
    if len(preds) != len(gts):
        raise AlignmentError(f"{len(preds)} predictions for {len(gts)} ground-truth records")
    judgments = []
    for pos, (p, g) in enumerate(zip(preds, gts), start=1):
        if str(p.get("id")) != str(g.get("id")):
            raise AlignmentError(f"record {pos}: prediction id {p.get('id')!r} != ground-truth id {g.get('id')!r}")
        judgments.append(judge_turn(gt_action(g), predicted_action(p), sim))
    return aggregate(judgments), judgments


def evaluate_file(
    pred_path: str | Path, gt_path: str | Path, sim: SimilarityPort = tf_cosine
) -> tuple[Level1Report, list[TurnJudgment]]:
    return evaluate_records(_read_jsonl(pred_path), _read_jsonl(gt_path), sim)


def write_judgments(judgments: list[TurnJudgment], ids: list[str], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for id_, j in zip(ids, judgments):
            fh.write(json.dumps({"id": id_, **j.to_dict()}, ensure_ascii=False, sort_keys=True) + "\n")
