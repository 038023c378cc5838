"""Line-oriented plan grammar: parse LLM completions into plans and back.

ReAct completions hold exactly one thought and one action::

    Thought: <text>
    Action: <tool_name>
    Action Input: <json object>

or ``Thought: <text>`` followed by ``Final Answer: <text...>``, where the
answer runs to the end of the input.  Pre-Act completions are a sequence of
``Step <k>:`` blocks of the same shape, the last of which must be a final
answer.
"""

from __future__ import annotations

import json
import re

from .model import (
    Action,
    FinalAnswer,
    Mode,
    Plan,
    PlanStep,
    ToolCall,
    canonical_json,
    is_identifier,
)

THOUGHT = "Thought:"
ACTION = "Action:"
ACTION_INPUT = "Action Input:"
FINAL_ANSWER = "Final Answer:"
OBSERVATION = "Observation:"

_STEP = re.compile(r"Step (\d+):\Z")
_FENCE = re.compile(r"\A```[^\n]*\n(?P<body>.*?)\n?```\Z", re.DOTALL)


class ParseError(ValueError):
    """Completion text does not follow the plan grammar.

    ``position`` is a character offset into the cleaned completion (fences
    and surrounding whitespace removed); ``line`` is 1-based.
    """

    def __init__(self, message: str, position: int, line: int, expected: str):
        super().__init__(f"line {line} (offset {position}): {message}; expected {expected}")
        self.message = message
        self.position = position
        self.line = line
        self.expected = expected


class AmbiguousFinalAnswer(ParseError):
    """A single step carries both a tool action and a final answer."""


def clean_completion(raw: str) -> str:
    text = raw.strip()
    m = _FENCE.match(text)
    if m:
        text = m.group("body").strip()
    return text


def _after_label(line: str, label: str) -> str:
    rest = line[len(label):]
    return rest[1:] if rest.startswith(" ") else rest


class _Cursor:
    def __init__(self, text: str):
        self.text = text
        self.lines = text.split("\n")
        self.offsets = []
        pos = 0
        for line in self.lines:
            self.offsets.append(pos)
            pos += len(line) + 1
        self.i = 0

    @property
    def done(self) -> bool:
        return self.i >= len(self.lines)

    def peek(self) -> str | None:
        return None if self.done else self.lines[self.i]

    def fail(self, message: str, expected: str, cls: type[ParseError] = ParseError) -> ParseError:
        idx = min(self.i, len(self.lines) - 1)
        pos = self.offsets[idx] if self.i < len(self.lines) else len(self.text)
        return cls(message, pos, idx + 1 if self.i < len(self.lines) else len(self.lines), expected)

    def expect(self, label: str) -> str:
        line = self.peek()
        if line is None:
            raise self.fail("unexpected end of input", repr(label))
        if not line.startswith(label):
            raise self.fail(f"unexpected line {line[:40]!r}", repr(label))
        self.i += 1
        return _after_label(line, label)

    def rest_from(self, label: str) -> str:
        """Consume everything from the current line (which starts with ``label``) to the end."""
        start = self.offsets[self.i] + len(label)
        text = self.text[start:]
        return text[1:] if text.startswith(" ") else text


def _parse_step_body(cur: _Cursor, index: int, require_thought: bool) -> PlanStep:
    thought = cur.expect(THOUGHT)
    if require_thought and not thought.strip():
        cur.i -= 1
        raise cur.fail("empty thought", "a nonempty thought")
    line = cur.peek()
    if line is None:
        raise cur.fail("unexpected end of input", f"{ACTION!r} or {FINAL_ANSWER!r}")
    if line.startswith(FINAL_ANSWER):
        action = _parse_final(cur)
    elif not line.startswith(ACTION):
        raise cur.fail(f"unexpected line {line[:40]!r}", f"{ACTION!r} or {FINAL_ANSWER!r}")
    else:
        action = _parse_tool_call(cur)
    return PlanStep(index=index, thought=thought, action=action)


def _parse_final(cur: _Cursor) -> FinalAnswer:
    start_line = cur.i
    text = cur.rest_from(FINAL_ANSWER)
    for k, line in enumerate(text.split("\n")[1:], start=1):
        if line.startswith(ACTION):
            cur.i = start_line + k
            raise cur.fail(
                "final answer followed by an action", "nothing after the final answer", AmbiguousFinalAnswer
            )
    if not text.strip():
        raise cur.fail("empty final answer", "final answer text")
    cur.i = len(cur.lines)
    return FinalAnswer(text)


def _parse_tool_call(cur: _Cursor) -> ToolCall:
    name = cur.expect(ACTION)
    if not is_identifier(name):
        cur.i -= 1
        raise cur.fail(f"invalid tool name {name!r}", "a tool identifier")
    raw_args = cur.expect(ACTION_INPUT)
    try:
        args = json.loads(raw_args)
    except json.JSONDecodeError as exc:
        cur.i -= 1
        raise cur.fail(f"bad action input ({exc.msg})", "a JSON object") from None
    if not isinstance(args, dict):
        cur.i -= 1
        raise cur.fail("action input is not an object", "a JSON object")
    nxt = cur.peek()
    if nxt is not None and nxt.startswith(FINAL_ANSWER):
        raise cur.fail("tool call followed by a final answer", "a single action per step", AmbiguousFinalAnswer)
    return ToolCall(name, args)


def parse_plan(raw: str, mode: Mode) -> Plan:
    """Parse a full completion into a :class:`Plan` (one step in react mode)."""
    text = clean_completion(raw)
    cur = _Cursor(text)
    if mode == "react":
        step = _parse_step_body(cur, 1, require_thought=False)
        if not cur.done:
            raise cur.fail(f"trailing text {cur.peek()[:40]!r}", "end of input")
        return Plan((step,))
    if mode != "preact":
        raise ValueError(f"unknown mode {mode!r}")

    steps: list[PlanStep] = []
    while True:
        k = len(steps) + 1
        line = cur.peek()
        if line is None:
            raise cur.fail("plan ends without a final answer", f"'Step {k}:'")
        m = _STEP.match(line)
        if not m or int(m.group(1)) != k:
            raise cur.fail(f"unexpected line {line[:40]!r}", f"'Step {k}:'")
        cur.i += 1
        step = _parse_step_body(cur, k, require_thought=True)
        steps.append(step)
        if isinstance(step.action, FinalAnswer):
            return Plan(tuple(steps))


def _render_action(action: Action) -> str:
    if isinstance(action, FinalAnswer):
        return f"{FINAL_ANSWER} {action.text}"
    return f"{ACTION} {action.tool_name}\n{ACTION_INPUT} {canonical_json(action.arguments)}\n"


def render_plan(plan: Plan, mode: Mode) -> str:
    """Inverse of :func:`parse_plan`."""
    if mode == "react":
        if len(plan.steps) != 1:
            raise ValueError("a ReAct plan has exactly one step")
        step = plan.steps[0]
        return f"{THOUGHT} {step.thought}\n" + _render_action(step.action)
    if mode != "preact":
        raise ValueError(f"unknown mode {mode!r}")
    if not plan.is_complete:
        raise ValueError("a Pre-Act plan must end in a final answer")
    parts = []
    for step in plan.steps:
        if not step.thought.strip():
            raise ValueError(f"step {step.index} needs a thought in preact mode")
        parts.append(f"Step {step.index}:\n{THOUGHT} {step.thought}\n" + _render_action(step.action))
    return "".join(parts)


def render_context_entry(call: ToolCall, payload: str) -> str:
    return f"{ACTION} {call.tool_name}\n{ACTION_INPUT} {canonical_json(call.arguments)}\n{OBSERVATION} {payload}\n"

