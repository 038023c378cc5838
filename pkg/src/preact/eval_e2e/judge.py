"""LLM-as-judge prompt construction and output parsing, plus graph drafting."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from ..orchestrator import LlmPort
from ..plan_core import ToolDefinition, clean_completion, render_tool_catalog
from .graph import AchievedSet, GraphError, MilestoneGraph, parse_milestone_graph

_JUDGE_LINE = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_.\-]*)\s*:\s*(\d+)\s*\Z")

STEP_LABELS = {
    "user": "USER",
    "agent": "AGENT",
    "tool_call": "TOOL CALL",
    "tool_result": "TOOL RESULT",
}


class JudgeFormatError(ValueError):
    def __init__(self, line: str, lineno: int):
        super().__init__(f"judge output line {lineno} is not '<milestone>: <step>': {line!r}")
        self.line = line
        self.lineno = lineno


@dataclass(frozen=True)
class SimStep:
    """One numbered step of a simulated conversation."""

    role: str
    text: str

    def render(self, number: int) -> str:
        return f"[{number}] {STEP_LABELS[self.role]}: {self.text}"


JUDGE_TEMPLATE = """\
You are evaluating a conversation between a human user and an AI agent that has access to tools.
Decide which of the milestones below the agent genuinely achieved, and at which step each was first fulfilled.

Be strict:
- Count a functional milestone only if the matching tool was actually called with valid, complete parameters and returned a successful result.
- Do not accept hallucinated data: values the agent states without having received them from the user or a tool do not count.
- A tool call that returned an error does not achieve its milestone.
- A non-functional milestone counts only when the conversation clearly shows the state or condition it describes.
- Avoid false positives. If unsure, leave the milestone out.
- Milestones must respect their dependencies; do not report a milestone before the steps it depends on.

## Agent instructions
{instruction}

## Tools
{tools}
## Milestones
{milestones}

## Conversation
{transcript}

## Output format
List only the achieved milestones, one per line, exactly as
<milestone_name>: <step_number>
where step_number is the bracketed step where the milestone was first fulfilled.
Write nothing else. If no milestone was achieved, write NONE.
"""


def _render_milestones(graph: MilestoneGraph) -> str:
    lines = []
    for m in graph.milestones:
        deps = ", ".join(m.dependencies) if m.dependencies else "none"
        joiner = " (any one of)" if m.or_group and m.dependencies else ""
        lines.append(f"- {m.name} [{m.kind}]: {m.description} | depends on{joiner}: {deps}")
    return "\n".join(lines)


def build_judge_prompt(
    transcript: Sequence[SimStep], graph: MilestoneGraph, instruction: str, tools: Sequence[ToolDefinition]
) -> str:
    if not transcript:
        raise ValueError("cannot judge an empty transcript")
    return JUDGE_TEMPLATE.format(
        instruction=instruction.strip(),
        tools=render_tool_catalog(list(tools)),
        milestones=_render_milestones(graph),
        transcript="\n".join(step.render(i) for i, step in enumerate(transcript, start=1)),
    )


def parse_judge_output(text: str, graph: MilestoneGraph | None = None) -> AchievedSet:
    """Parse ``name: step`` lines.

    Names missing from ``graph`` are kept in ``unknown`` with a warning and
    left out of ``entries``; a repeated name keeps its earliest step.
    """
    entries: dict[str, int] = {}
    unknown: list[tuple[str, int]] = []
    warnings: list[str] = []
    known = set(graph.names) if graph is not None else None
    for lineno, line in enumerate(clean_completion(text).split("\n"), start=1):
        if not line.strip() or line.strip().upper() == "NONE":
            continue
        m = _JUDGE_LINE.match(line)
        if not m:
            raise JudgeFormatError(line, lineno)
        name, step = m.group(1), int(m.group(2))
        if step < 1:
            raise JudgeFormatError(line, lineno)
        if known is not None and name not in known:
            warnings.append(f"unknown milestone {name!r} at line {lineno}")
            unknown.append((name, step))
            continue
        if name in entries:
            warnings.append(f"milestone {name!r} reported more than once")
            step = min(step, entries[name])
        entries[name] = step
    return AchievedSet(tuple(entries.items()), tuple(warnings), tuple(unknown))


DRAFT_TEMPLATE = """\
You are designing an evaluation graph for a conversational AI agent.
Read the workflow and tools below and break the task into incremental and, where the workflow branches, conditional milestones.

Milestone types:
- FC (functional): corresponds directly to a tool call. Name the milestone exactly after the tool.
- NFC (non-functional): a state, condition or contextual transition in the workflow, such as information collected from the user or a decision taken.

For every milestone give:
- name: snake_case identifier
- type: FC or NFC
- description: what must happen for the milestone to be met
- dependencies: names of milestones that must be met first
- or_group: true when meeting any single dependency is enough (alternative branches), otherwise false

Rules:
- The graph must be directed and acyclic.
- Exactly one milestone, the end goal, has no dependents.
- Every milestone must lie on some path from a starting milestone to the end goal.

## Workflow
{workflow}

## Tools
{tools}
## Output
Reply with the YAML list only, for example:
- name: collect_details
  type: NFC
  description: ...
  dependencies: []
  or_group: false
"""


@dataclass(frozen=True)
class MilestoneDraft:
    yaml_text: str
    errors: tuple[str, ...]

    @property
    def valid(self) -> bool:
        return not self.errors


def draft_milestone_graph(
    workflow: str,
    tools: Sequence[ToolDefinition],
    llm: LlmPort,
    *,
    model_id: str = "drafter",
    temperature: float = 0.0,
) -> MilestoneDraft:
    """Ask the LLM for a draft graph; validation problems are reported, not raised.

    Drafts are meant for human review before use.
    """
    if not workflow.strip():
        raise ValueError("workflow text is empty")
    prompt = DRAFT_TEMPLATE.format(workflow=workflow.strip(), tools=render_tool_catalog(list(tools)))
    yaml_text = clean_completion(llm.complete(model_id, [("user", prompt)], temperature)) + "\n"
    try:
        parse_milestone_graph(yaml_text, [t.name for t in tools])
        errors: tuple[str, ...] = ()
    except GraphError as exc:
        errors = (str(exc),)
    return MilestoneDraft(yaml_text, errors)
