"""Turn conversations into supervised (input, output) pairs.

Stage one (``react``) yields one pair per tool call plus one for the final
reply, each output a single ReAct step with minimal reasoning.  Stage two
(``preact``) yields the same inputs, but every output is the whole remaining
plan, with a reasoning placeholder in place of each thought for annotators to
fill in.
"""

from __future__ import annotations

from typing import Callable, Mapping

from ..plan_core import (
    Action,
    ExecutionContext,
    FinalAnswer,
    Plan,
    PlanStep,
    PromptBundle,
    parse_plan,
    render_plan,
    render_prompt,
)
from .records import Conversation, SchemaError, Stage, TrainingPair, Turn

FINAL_THOUGHT = "I know the final answer."
TOOL_THOUGHT = "Need to invoke tool : {name}"


def placeholder(step: int) -> str:
    return f"<<REASONING:step_{step}>>"


def _turn_inputs(conv: Conversation, stage: Stage):
    """Yield ``(turn, [input_0 .. input_n])`` where ``input_j`` sees the first ``j`` calls."""
    history: list[tuple[str, str]] = []
    for turn in conv.turns:
        history.append(("user", turn.user))
        inputs = []
        for j in range(len(turn.calls) + 1):
            bundle = PromptBundle(
                conv.instruction,
                conv.tools,
                tuple(history),
                ExecutionContext(turn.calls[:j]),
                mode=stage,
            )
            inputs.append(render_prompt(bundle))
        yield turn, inputs
        history.append(("assistant", turn.assistant))


def _final(turn: Turn) -> FinalAnswer:
    return FinalAnswer(turn.assistant.rstrip())


def _render(plan_steps: list[PlanStep], stage: Stage) -> str:
    try:
        return render_plan(Plan(tuple(plan_steps)), stage)
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


def transform_react(conv: Conversation) -> list[TrainingPair]:
    conv.validate()
    pairs: list[TrainingPair] = []
    for turn, inputs in _turn_inputs(conv, "react"):
        for j, (call, _obs) in enumerate(turn.calls):
            thought = TOOL_THOUGHT.format(name=call.tool_name)
            output = _render([PlanStep(1, thought, call)], "react")
            pairs.append(TrainingPair(inputs[j], output, "react"))
        output = _render([PlanStep(1, FINAL_THOUGHT, _final(turn))], "react")
        pairs.append(TrainingPair(inputs[-1], output, "react"))
    return pairs


def transform_preact(conv: Conversation) -> list[TrainingPair]:
    conv.validate()
    pairs: list[TrainingPair] = []
    for turn, inputs in _turn_inputs(conv, "preact"):
        actions: list[Action] = [call for call, _obs in turn.calls] + [_final(turn)]
        for j in range(len(actions)):
            remaining = actions[j:]
            steps = [PlanStep(k, placeholder(k), a) for k, a in enumerate(remaining, start=1)]
            marks = tuple((k, placeholder(k)) for k in range(1, len(remaining) + 1))
            pairs.append(TrainingPair(inputs[j], _render(steps, "preact"), "preact", marks))
    return pairs


def transform(conv: Conversation, stage: Stage) -> list[TrainingPair]:
    if stage == "react":
        return transform_react(conv)
    if stage == "preact":
        return transform_preact(conv)
    raise ValueError(f"unknown stage {stage!r}")


def fill_placeholders(
    pair: TrainingPair, reasoning: Mapping[int, str] | Callable[[int], str]
) -> TrainingPair:
    """Replace every reasoning marker with annotator text (one line per step)."""
    lookup = reasoning if callable(reasoning) else reasoning.__getitem__
    output = pair.output
    for step, marker in pair.reasoning_placeholders:
        text = lookup(step)
        if "\n" in text or not text.strip():
            raise ValueError(f"reasoning for step {step} must be a single nonempty line")
        output = output.replace(f"Thought: {marker}\n", f"Thought: {text}\n", 1)
    return TrainingPair(pair.input, output, pair.stage, ())


def target_action(pair: TrainingPair) -> Action:
    """The action a model should take next given ``pair.input``."""
    return parse_plan(pair.output, pair.stage).steps[0].action

