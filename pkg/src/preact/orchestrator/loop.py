"""The plan / execute / observe / re-plan loop."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Literal, Sequence

from ..plan_core import (
    ExecutionContext,
    FinalAnswer,
    Mode,
    ParseError,
    Plan,
    PromptBundle,
    ToolDefinition,
    parse_plan,
    render_prompt,
)
from .providers import LlmPort, TransportError
from .tools import ToolRegistry, execute_step

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITERATIONS = 8
DEFAULT_PARSE_RETRIES = 2
MAX_ITERATIONS_ANSWER = "I'm sorry, I could not finish this request within the allowed number of steps."

Termination = Literal["final_answer", "max_iterations", "unrecoverable_error"]
EVENT_KINDS = ("prompt", "completion", "tool_call", "observation", "final_answer")


class Transcript:
    """Event log persisted as JSONL, one ``{kind, turn, iteration, payload}`` object per line."""

    def __init__(self) -> None:
        self.events: list[dict[str, Any]] = []

    def add(self, kind: str, turn: int, iteration: int, payload: Any) -> None:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown transcript event {kind!r}")
        self.events.append({"kind": kind, "turn": turn, "iteration": iteration, "payload": payload})

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e, ensure_ascii=False, sort_keys=True) + "\n" for e in self.events)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")


@dataclass(frozen=True)
class TurnResult:
    final_answer: str
    context: ExecutionContext
    plans: tuple[Plan, ...]
    llm_calls: int
    terminated_by: Termination
    rejected_completions: int = 0
    error: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "final_answer": self.final_answer,
            "terminated_by": self.terminated_by,
            "llm_calls": self.llm_calls,
            "rejected_completions": self.rejected_completions,
            "tool_calls": [
                {"name": call.tool_name, "arguments": call.arguments, "observation": obs.payload}
                for call, obs in self.context.entries
            ],
            "error": self.error,
        }


@dataclass
class AgentConfig:
    """Everything needed to run the agent for a conversation."""

    instruction: str
    tools: tuple[ToolDefinition, ...]
    llm: LlmPort
    registry: ToolRegistry
    mode: Mode = "preact"
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    model_id: str = "agent"
    temperature: float = 0.0
    parse_retries: int = DEFAULT_PARSE_RETRIES


class ConversationAborted(RuntimeError):
    def __init__(self, reason: str, results: list[TurnResult]):
        super().__init__(reason)
        self.reason = reason
        self.results = results


def _correction(exc: ParseError) -> str:
    return (
        f"Your previous reply could not be parsed ({exc}). "
        "Reply again, following the response format exactly."
    )


def run_turn(
    bundle: PromptBundle,
    llm: LlmPort,
    registry: ToolRegistry,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    *,
    model_id: str = "agent",
    temperature: float = 0.0,
    parse_retries: int = DEFAULT_PARSE_RETRIES,
    transcript: Transcript | None = None,
    turn: int = 1,
) -> TurnResult:
    """Answer the latest user message in ``bundle.history``.

    Each iteration renders the prompt with the current context, asks the LLM
    for a fresh plan and runs only its first step.  A final answer ends the
    turn; a tool call is executed and its observation appended to the
    context.  Transport errors propagate to the caller.
    """
    if max_iterations < 1:
        raise ValueError("max_iterations must be positive")
    if len(bundle.context):
        raise ValueError("run_turn expects an empty execution context")
    for tool in bundle.tools:
        if tool.name not in registry or registry.get(tool.name).definition != tool:
            raise ValueError(f"tool {tool.name!r} is not registered with a matching definition")

    def log(kind: str, iteration: int, payload: Any) -> None:
        if transcript is not None:
            transcript.add(kind, turn, iteration, payload)

    context = ExecutionContext()
    plans: list[Plan] = []
    rejected = 0
    while True:
        iteration = len(context) + 1
        prompt = render_prompt(replace(bundle, context=context))
        messages = [("user", prompt)]
        log("prompt", iteration, prompt)
        plan = None
        last_error: ParseError | None = None
        for _ in range(parse_retries + 1):
            completion = llm.complete(model_id, messages, temperature)
            log("completion", iteration, completion)
            try:
                plan = parse_plan(completion, bundle.mode)
                break
            except ParseError as exc:
                rejected += 1
                last_error = exc
                logger.debug("turn %d iteration %d: unparsable completion: %s", turn, iteration, exc)
                fix = _correction(exc)
                messages = messages + [("assistant", completion), ("system", fix)]
                log("prompt", iteration, fix)
        if plan is None:
            return TurnResult(
                final_answer="",
                context=context,
                plans=tuple(plans),
                llm_calls=len(plans),
                terminated_by="unrecoverable_error",
                rejected_completions=rejected,
                error=str(last_error),
            )

        step = plan.first_pending()
        if isinstance(step.action, FinalAnswer):
            plans.append(plan)
            log("final_answer", iteration, step.action.text)
            return TurnResult(step.action.text, context, tuple(plans), len(plans), "final_answer", rejected)

        log("tool_call", iteration, {"name": step.action.tool_name, "arguments": step.action.arguments})
        observation = execute_step(step, registry)
        log("observation", iteration, {"source_tool": observation.source_tool, "payload": observation.payload})
        plans.append(plan.mark_executed(step.index))
        context = context.append(step.action, observation)
        if len(context) >= max_iterations:
            log("final_answer", iteration, MAX_ITERATIONS_ANSWER)
            return TurnResult(
                MAX_ITERATIONS_ANSWER, context, tuple(plans), len(plans), "max_iterations", rejected
            )


def run_conversation(
    user_messages: Sequence[str],
    agent: AgentConfig,
    transcript: Transcript | None = None,
    history: Sequence[tuple[str, str]] = (),
) -> list[TurnResult]:
    """Run one agent turn per user message, carrying the dialogue history forward.

    Raises :class:`ConversationAborted` (holding the results so far) when a
    turn cannot be completed.
    """
    history = list(history)
    results: list[TurnResult] = []
    for turn, message in enumerate(user_messages, start=1):
        history.append(("user", message))
        bundle = PromptBundle(agent.instruction, agent.tools, tuple(history), mode=agent.mode)
        try:
            result = run_turn(
                bundle,
                agent.llm,
                agent.registry,
                agent.max_iterations,
                model_id=agent.model_id,
                temperature=agent.temperature,
                parse_retries=agent.parse_retries,
                transcript=transcript,
                turn=turn,
            )
        except TransportError as exc:
            raise ConversationAborted(f"turn {turn}: {exc}", results) from exc
        results.append(result)
        if result.terminated_by == "unrecoverable_error":
            raise ConversationAborted(f"turn {turn}: {result.error}", results)
        history.append(("assistant", result.final_answer))
    return results
