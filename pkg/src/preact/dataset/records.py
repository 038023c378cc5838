"""Conversation records and training pairs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Literal

from ..plan_core import Observation, ToolCall, ToolDefinition
from ..plan_core.model import check_tool_set

Stage = Literal["react", "preact"]


class SchemaError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.message = message
        self.line = line


@dataclass(frozen=True)
class Turn:
    user: str
    calls: tuple[tuple[ToolCall, Observation], ...]
    assistant: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "calls", tuple(self.calls))


@dataclass(frozen=True)
class Conversation:
    instruction: str
    tools: tuple[ToolDefinition, ...]
    turns: tuple[Turn, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tools", tuple(self.tools))
        object.__setattr__(self, "turns", tuple(self.turns))

    def validate(self) -> None:
        if not self.turns:
            raise SchemaError("conversation has no turns")
        try:
            check_tool_set(self.tools)
        except ValueError as exc:
            raise SchemaError(str(exc)) from None
        names = {t.name for t in self.tools}
        for i, turn in enumerate(self.turns, start=1):
            if not turn.assistant.strip():
                raise SchemaError(f"turn {i} has an empty assistant reply")
            for call, obs in turn.calls:
                if call.tool_name not in names:
                    raise SchemaError(f"turn {i} calls unknown tool {call.tool_name!r}")
                if obs.source_tool != call.tool_name:
                    raise SchemaError(f"turn {i}: response attributed to {obs.source_tool!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "instruction": self.instruction,
            "tools": [t.to_dict() for t in self.tools],
            "turns": [
                {
                    "user": turn.user,
                    "calls": [
                        {"name": call.tool_name, "arguments": call.arguments, "response": obs.payload}
                        for call, obs in turn.calls
                    ],
                    "assistant": turn.assistant,
                }
                for turn in self.turns
            ],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Conversation:
        """Build and validate a conversation; raises :class:`SchemaError`."""
        try:
            tools = tuple(ToolDefinition.from_dict(t) for t in data.get("tools", []))
            turns = []
            for t in data["turns"]:
                calls = tuple(
                    (ToolCall(c["name"], dict(c.get("arguments") or {})), Observation(c["name"], str(c["response"])))
                    for c in t.get("calls", [])
                )
                turns.append(Turn(user=t["user"], calls=calls, assistant=t["assistant"]))
            conv = cls(instruction=data.get("instruction", ""), tools=tools, turns=tuple(turns))
        except KeyError as exc:
            raise SchemaError(f"missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError, AttributeError) as exc:
            raise SchemaError(str(exc)) from None
        conv.validate()
        return conv


@dataclass(frozen=True)
class TrainingPair:
    input: str
    output: str
    stage: Stage
    reasoning_placeholders: tuple[tuple[int, str], ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "input": self.input,
            "output": self.output,
            "stage": self.stage,
            "placeholders": [{"step": k, "marker": m} for k, m in self.reasoning_placeholders],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> TrainingPair:
        return cls(
            input=data["input"],
            output=data["output"],
            stage=data["stage"],
            reasoning_placeholders=tuple((p["step"], p["marker"]) for p in data.get("placeholders", [])),
        )
