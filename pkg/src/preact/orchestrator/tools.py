"""Tool registry and single-step execution."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Any, Callable, Iterable

from ..plan_core import FinalAnswer, Observation, PlanStep, ToolCall, ToolDefinition

Executor = Callable[[dict[str, Any]], str]


class UnknownTool(KeyError):
    pass


class ArgumentError(ValueError):
    pass


_TYPE_CHECKS: dict[str, Callable[[Any], bool]] = {
    "string": lambda v: isinstance(v, str),
    "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    "boolean": lambda v: isinstance(v, bool),
    "object": lambda v: isinstance(v, dict),
    "array": lambda v: isinstance(v, list),
}


def validate_arguments(definition: ToolDefinition, arguments: dict[str, Any]) -> None:
    known = {p.name: p for p in definition.parameters}
    unknown = sorted(set(arguments) - set(known))
    if unknown:
        raise ArgumentError(f"unexpected argument(s) for {definition.name}: {', '.join(unknown)}")
    for p in definition.parameters:
        if p.name not in arguments:
            if p.required:
                raise ArgumentError(f"missing required argument {p.name!r} for {definition.name}")
            continue
        if not _TYPE_CHECKS[p.type](arguments[p.name]):
            raise ArgumentError(f"argument {p.name!r} of {definition.name} must be of type {p.type}")


@dataclass(frozen=True)
class RegisteredTool:
    definition: ToolDefinition
    executor: Executor


class ToolRegistry:
    def __init__(self, tools: Iterable[tuple[ToolDefinition, Executor]] = ()):
        self._tools: dict[str, RegisteredTool] = {}
        self._lock = threading.Lock()
        for definition, executor in tools:
            self.register(definition, executor)

    def register(self, definition: ToolDefinition, executor: Executor) -> None:
        with self._lock:
            if definition.name in self._tools:
                raise ValueError(f"tool {definition.name!r} already registered")
            self._tools[definition.name] = RegisteredTool(definition, executor)

    def __contains__(self, name: str) -> bool:
        return name in self._tools

    def get(self, name: str) -> RegisteredTool:
        try:
            return self._tools[name]
        except KeyError:
            raise UnknownTool(name) from None

    @property
    def definitions(self) -> tuple[ToolDefinition, ...]:
        return tuple(t.definition for t in self._tools.values())


def error_payload(message: str) -> str:
    return f"ERROR: {message}"


def execute_call(call: ToolCall, registry: ToolRegistry) -> Observation:
    """Run one tool call; every failure comes back as an ``ERROR:`` observation."""
    try:
        tool = registry.get(call.tool_name)
    except UnknownTool:
        return Observation(call.tool_name, error_payload(f"unknown tool {call.tool_name}"))
    try:
        validate_arguments(tool.definition, call.arguments)
    except ArgumentError as exc:
        return Observation(call.tool_name, error_payload(str(exc)))
    try:
        result = tool.executor(dict(call.arguments))
    except Exception as exc:  # executor faults must not kill the loop
        return Observation(call.tool_name, error_payload(str(exc) or type(exc).__name__))
    if not isinstance(result, str):
        result = str(result)
    return Observation(call.tool_name, result)


def execute_step(step: PlanStep, registry: ToolRegistry) -> Observation:
    if isinstance(step.action, FinalAnswer):
        raise ValueError("cannot execute a final-answer step")
    return execute_call(step.action, registry)


def stub_executor(spec: dict[str, Any]) -> Executor:
    """Build an executor from a declarative stub.

    Supported keys: ``response`` (fixed payload), ``responses`` (list cycled
    per call), ``error`` (always raise with this message).
    """
    if "error" in spec:
        message = str(spec["error"])

        def failing(args: dict[str, Any]) -> str:
            raise RuntimeError(message)

        return failing
    if "responses" in spec:
        responses = [str(r) for r in spec["responses"]]
        counter = {"n": 0}
        lock = threading.Lock()

        def cycling(args: dict[str, Any]) -> str:
            with lock:
                out = responses[counter["n"] % len(responses)]
                counter["n"] += 1
            return out

        return cycling
    fixed = str(spec.get("response", "OK"))
    return lambda args: fixed


def registry_from_specs(specs: list[dict[str, Any]]) -> ToolRegistry:
    """Registry from ``tools.json``-style records (definition fields plus an optional ``stub``)."""
    registry = ToolRegistry()
    for spec in specs:
        registry.register(ToolDefinition.from_dict(spec), stub_executor(spec.get("stub", {})))
    return registry
