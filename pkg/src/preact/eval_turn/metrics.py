"""Turn-level judgments and their aggregation into a Level-1 report."""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Any, Iterable, Union

from ..plan_core import Action, FinalAnswer, ParseError, ToolCall
from .similarity import SimilarityPort, tf_cosine, token_f1

SCHEMA_VERSION = "1.0"

Prediction = Union[ToolCall, FinalAnswer, ParseError]


def canonical_value(value: Any) -> Any:
    """Comparison key for argument values.

    Numbers compare by decimal value (``1`` equals ``1.0``), every other type
    compares exactly and booleans never equal numbers.
    """
    if isinstance(value, bool):
        return ("bool", value)
    if isinstance(value, (int, float)):
        try:
            return ("num", Decimal(str(value)))
        except InvalidOperation:
            return ("num", str(value))
    if isinstance(value, str):
        return ("str", value)
    if value is None:
        return ("null",)
    if isinstance(value, (list, tuple)):
        return ("list", tuple(canonical_value(v) for v in value))
    if isinstance(value, dict):
        return ("obj", tuple(sorted((k, canonical_value(v)) for k, v in value.items())))
    return ("other", repr(value))


def arguments_match(a: dict[str, Any], b: dict[str, Any]) -> bool:
    return canonical_value(a) == canonical_value(b)


@dataclass(frozen=True)
class TurnJudgment:
    gt: Action
    pred: Prediction
    action_match: bool
    param_match_full: bool | None
    answer_f1: float | None
    answer_sim: float | None

    def to_dict(self) -> dict[str, Any]:
        pred = {"kind": "error", "message": str(self.pred)} if isinstance(self.pred, ParseError) else self.pred.to_dict()
        return {
            "gt": self.gt.to_dict(),
            "pred": pred,
            "action_match": self.action_match,
            "param_match_full": self.param_match_full,
            "answer_f1": self.answer_f1,
            "answer_sim": self.answer_sim,
        }


def judge_turn(gt: Action, pred: Prediction, sim: SimilarityPort = tf_cosine) -> TurnJudgment:
    if isinstance(gt, ToolCall):
        if isinstance(pred, ToolCall) and pred.tool_name == gt.tool_name:
            return TurnJudgment(gt, pred, True, arguments_match(pred.arguments, gt.arguments), None, None)
        return TurnJudgment(gt, pred, False, False, None, None)
    if isinstance(pred, FinalAnswer):
        f1 = token_f1(pred.text, gt.text)
        score = max(0.0, min(1.0, float(sim(pred.text, gt.text))))
        return TurnJudgment(gt, pred, True, None, f1, score)
    return TurnJudgment(gt, pred, False, None, 0.0, 0.0)


def _ratio(num: float, den: int) -> float | None:
    return num / den if den else None


@dataclass(frozen=True)
class Level1Report:
    action_recall: float | None
    tool_precision: float | None
    tool_recall: float | None
    tool_f1: float | None
    params_match_full: float | None
    final_answer_f1: float | None
    final_answer_sim: float | None
    counts: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "metrics": {
                "action_recall": self.action_recall,
                "tool_precision": self.tool_precision,
                "tool_recall": self.tool_recall,
                "tool_f1": self.tool_f1,
                "params_match_full": self.params_match_full,
                "final_answer_f1": self.final_answer_f1,
                "final_answer_sim": self.final_answer_sim,
            },
            "counts": dict(self.counts),
            "metadata": {"tool_averaging": "micro"},
        }


def aggregate(judgments: Iterable[TurnJudgment]) -> Level1Report:
    """Combine per-turn judgments; a metric with an empty denominator is ``None``.

    Tool precision, recall and F1 are micro-averaged over tool-name
    predictions on turns where either side is a tool call.
    """
    judgments = list(judgments)
    matches = sum(j.action_match for j in judgments)

    tp = fp = fn = 0
    for j in judgments:
        gt_tool = j.gt.tool_name if isinstance(j.gt, ToolCall) else None
        pred_tool = j.pred.tool_name if isinstance(j.pred, ToolCall) else None
        if gt_tool is not None and gt_tool == pred_tool:
            tp += 1
            continue
        if pred_tool is not None:
            fp += 1
        if gt_tool is not None:
            fn += 1
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    if precision is None or recall is None:
        f1 = None
    else:
        f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)

    named = [j for j in judgments if isinstance(j.gt, ToolCall) and j.action_match]
    answers = [j for j in judgments if isinstance(j.gt, FinalAnswer)]
    counts = {
        "turns": len(judgments),
        "action_matches": matches,
        "gt_tool_calls": sum(isinstance(j.gt, ToolCall) for j in judgments),
        "pred_tool_calls": sum(isinstance(j.pred, ToolCall) for j in judgments),
        "tool_true_positives": tp,
        "tool_false_positives": fp,
        "tool_false_negatives": fn,
        "name_matched_tool_calls": len(named),
        "full_param_matches": sum(bool(j.param_match_full) for j in named),
        "gt_final_answers": len(answers),
        "parse_errors": sum(isinstance(j.pred, ParseError) for j in judgments),
    }
    return Level1Report(
        action_recall=_ratio(matches, len(judgments)),
        tool_precision=precision,
        tool_recall=recall,
        tool_f1=f1,
        params_match_full=_ratio(counts["full_param_matches"], len(named)),
        final_answer_f1=_ratio(sum(j.answer_f1 for j in answers), len(answers)),
        final_answer_sim=_ratio(sum(j.answer_sim for j in answers), len(answers)),
        counts=counts,
    )
