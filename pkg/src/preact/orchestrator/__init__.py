from .loop import (
    DEFAULT_MAX_ITERATIONS,
    MAX_ITERATIONS_ANSWER,
    AgentConfig,
    ConversationAborted,
    Transcript,
    TurnResult,
    run_conversation,
    run_turn,
)
from .providers import HttpLlm, LlmPort, ScriptedLlm, TransportError
from .tools import (
    ArgumentError,
    ToolRegistry,
    UnknownTool,
    execute_call,
    execute_step,
    registry_from_specs,
    stub_executor,
    validate_arguments,
)

__all__ = [
    "DEFAULT_MAX_ITERATIONS",
    "MAX_ITERATIONS_ANSWER",
    "AgentConfig",
    "ArgumentError",
    "ConversationAborted",
    "HttpLlm",
    "LlmPort",
    "ScriptedLlm",
    "ToolRegistry",
    "Transcript",
    "TransportError",
    "TurnResult",
    "UnknownTool",
    "execute_call",
    "execute_step",
    "registry_from_specs",
    "run_conversation",
    "run_turn",
    "stub_executor",
    "validate_arguments",
]
