from .grammar import (
    AmbiguousFinalAnswer,
    ParseError,
    clean_completion,
    parse_plan,
    render_context_entry,
    render_plan,
)
from .model import (
    MODES,
    Action,
    ExecutionContext,
    FinalAnswer,
    Mode,
    Observation,
    ParamSpec,
    Plan,
    PlanStep,
    PromptBundle,
    ToolCall,
    ToolDefinition,
    action_from_dict,
    canonical_json,
)
from .prompt import InvalidBundle, render_prompt, render_tool_catalog

__all__ = [
    "MODES",
    "Action",
    "AmbiguousFinalAnswer",
    "ExecutionContext",
    "FinalAnswer",
    "InvalidBundle",
    "Mode",
    "Observation",
    "ParamSpec",
    "ParseError",
    "Plan",
    "PlanStep",
    "PromptBundle",
    "ToolCall",
    "ToolDefinition",
    "action_from_dict",
    "canonical_json",
    "clean_completion",
    "parse_plan",
    "render_context_entry",
    "render_plan",
    "render_prompt",
    "render_tool_catalog",
]
