"""Plan and action domain model shared by the agent loop, dataset and evaluators."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Literal, Union

Mode = Literal["react", "preact"]
MODES: tuple[str, ...] = ("react", "preact")

PARAM_TYPES = ("string", "number", "boolean", "object", "array")

_IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*\Z")


def is_identifier(name: str) -> bool:
    return bool(_IDENTIFIER.match(name))


def canonical_json(value: Any) -> str:
    """Serialize ``value`` with sorted keys and minimal whitespace.

    Newlines inside strings come out as ``\\n`` escapes, so the result is
    always a single line.
    """
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass(frozen=True)
class ParamSpec:
    name: str
    type: str = "string"
    required: bool = False
    description: str = ""

    def __post_init__(self) -> None:
        if not is_identifier(self.name):
            raise ValueError(f"invalid parameter name {self.name!r}")
        if self.type not in PARAM_TYPES:
            raise ValueError(f"parameter {self.name!r} has unsupported type {self.type!r}")


@dataclass(frozen=True)
class ToolDefinition:
    name: str
    description: str = ""
    parameters: tuple[ParamSpec, ...] = ()

    def __post_init__(self) -> None:
        if not is_identifier(self.name):
            raise ValueError(f"invalid tool name {self.name!r}")
        object.__setattr__(self, "parameters", tuple(self.parameters))
        names = [p.name for p in self.parameters]
        if len(names) != len(set(names)):
            raise ValueError(f"tool {self.name!r} has duplicate parameter names")

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "description": self.description,
            "parameters": [
                {"name": p.name, "type": p.type, "required": p.required, "description": p.description}
                for p in self.parameters
            ],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ToolDefinition:
        params = tuple(
            ParamSpec(
                name=p["name"],
                type=p.get("type", "string"),
                required=bool(p.get("required", False)),
                description=p.get("description", ""),
            )
            for p in data.get("parameters", [])
        )
        return cls(name=data["name"], description=data.get("description", ""), parameters=params)


def check_tool_set(tools: tuple[ToolDefinition, ...] | list[ToolDefinition]) -> None:
    names = [t.name for t in tools]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise ValueError(f"duplicate tool names: {', '.join(dupes)}")


@dataclass(frozen=True)
class ToolCall:
    tool_name: str
    arguments: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not is_identifier(self.tool_name):
            raise ValueError(f"invalid tool name {self.tool_name!r}")
        if not isinstance(self.arguments, dict):
            raise TypeError("tool arguments must be a dict")

    @property
    def arguments_json(self) -> str:
        return canonical_json(self.arguments)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "tool", "name": self.tool_name, "arguments": self.arguments}


@dataclass(frozen=True)
class FinalAnswer:
    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("final answer text must be nonempty")

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "final", "text": self.text}


Action = Union[ToolCall, FinalAnswer]


def action_from_dict(data: dict[str, Any]) -> Action:
    kind = data.get("kind")
    if kind == "tool":
        return ToolCall(data["name"], dict(data.get("arguments") or {}))
    if kind == "final":
        return FinalAnswer(data["text"])
    raise ValueError(f"unknown action kind {kind!r}")


@dataclass(frozen=True)
class Observation:
    source_tool: str
    payload: str


@dataclass(frozen=True)
class ExecutionContext:
    """Ordered (tool call, observation) pairs accumulated during one turn."""

    entries: tuple[tuple[ToolCall, Observation], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        for call, obs in self.entries:
            if not isinstance(call, ToolCall):
                raise TypeError("context actions must be tool calls")
            if obs.source_tool != call.tool_name:
                raise ValueError(
                    f"observation from {obs.source_tool!r} does not belong to call {call.tool_name!r}"
                )

    def __len__(self) -> int:
        return len(self.entries)

    def append(self, call: ToolCall, observation: Observation) -> ExecutionContext:
        return ExecutionContext(self.entries + ((call, observation),))

    def prefix(self, n: int) -> ExecutionContext:
        return ExecutionContext(self.entries[:n])


@dataclass(frozen=True)
class PlanStep:
    index: int
    thought: str
    action: Action
    status: Literal["executed", "pending"] = "pending"

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError("step indices start at 1")
        if "\n" in self.thought:
            raise ValueError("a thought must fit on one line")
        if self.status not in ("executed", "pending"):
            raise ValueError(f"bad step status {self.status!r}")


@dataclass(frozen=True)
class Plan:
    """An ordered list of steps; only the last may be a final answer.

    Besides the structural rules, a plan is only representable in the text
    grammar if its final-answer text carries no trailing whitespace and no
    line of it starts with ``Action:``.
    """

    steps: tuple[PlanStep, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps:
            raise ValueError("a plan needs at least one step")
        for pos, step in enumerate(self.steps, start=1):
            if step.index != pos:
                raise ValueError(f"step indices must be contiguous from 1 (got {step.index} at {pos})")
            if isinstance(step.action, FinalAnswer) and pos != len(self.steps):
                raise ValueError("a final answer may only appear in the last step")
        last = self.steps[-1].action
        if isinstance(last, FinalAnswer):
            if last.text != last.text.rstrip():
                raise ValueError("final answer text must not end in whitespace")
            if any(line.startswith("Action:") for line in last.text.split("\n")):
                raise ValueError("final answer text may not contain an Action: line")

    @property
    def is_complete(self) -> bool:
        return isinstance(self.steps[-1].action, FinalAnswer)

    def first_pending(self) -> PlanStep | None:
        for step in self.steps:
            if step.status == "pending":
                return step
        return None

    def mark_executed(self, index: int) -> Plan:
        return Plan(
            tuple(
                PlanStep(s.index, s.thought, s.action, "executed") if s.index == index else s
                for s in self.steps
            )
        )


@dataclass(frozen=True)
class PromptBundle:
    instruction: str
    tools: tuple[ToolDefinition, ...] = ()
    history: tuple[tuple[str, str], ...] = ()
    context: ExecutionContext = field(default_factory=ExecutionContext)
    mode: Mode = "preact"

    def __post_init__(self) -> None:
        object.__setattr__(self, "tools", tuple(self.tools))
        object.__setattr__(self, "history", tuple(tuple(h) for h in self.history))
