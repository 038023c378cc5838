from .corpus import dump_corpus, load_corpus, read_pairs, write_pairs
from .records import Conversation, SchemaError, TrainingPair, Turn
from .transform import (
    FINAL_THOUGHT,
    TOOL_THOUGHT,
    fill_placeholders,
    placeholder,
    target_action,
    transform,
    transform_preact,
    transform_react,
)

__all__ = [
    "FINAL_THOUGHT",
    "TOOL_THOUGHT",
    "Conversation",
    "SchemaError",
    "TrainingPair",
    "Turn",
    "dump_corpus",
    "fill_placeholders",
    "load_corpus",
    "placeholder",
    "read_pairs",
    "target_action",
    "transform",
    "transform_preact",
    "transform_react",
    "write_pairs",
]
