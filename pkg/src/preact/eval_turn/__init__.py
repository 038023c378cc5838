from .files import AlignmentError, evaluate_file, evaluate_records, predicted_action, write_judgments
from .metrics import (
    SCHEMA_VERSION,
    Level1Report,
    TurnJudgment,
    aggregate,
    arguments_match,
    canonical_value,
    judge_turn,
)
from .similarity import EmbeddingSimilarity, SimilarityPort, normalize_tokens, tf_cosine, token_f1

__all__ = [
    "SCHEMA_VERSION",
    "AlignmentError",
    "EmbeddingSimilarity",
    "Level1Report",
    "SimilarityPort",
    "TurnJudgment",
    "aggregate",
    "arguments_match",
    "canonical_value",
    "evaluate_file",
    "evaluate_records",
    "judge_turn",
    "normalize_tokens",
    "predicted_action",
    "tf_cosine",
    "token_f1",
    "write_judgments",
]
