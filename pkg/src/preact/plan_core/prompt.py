"""Prompt rendering for ReAct and Pre-Act agents."""

from __future__ import annotations

from .grammar import render_context_entry
from .model import PromptBundle, ToolDefinition, check_tool_set

REACT_DIRECTIVE = """\
Produce one Thought and one Action.
To call a tool, answer with exactly:
Thought: <your reasoning>
Action: <tool name>
Action Input: <JSON object with the tool arguments>
To reply to the user, answer with exactly:
Thought: I know the final answer.
Final Answer: <your reply to the user>
"""

PREACT_DIRECTIVE = """\
Produce a numbered multi-step plan ending in a Final Answer.
Take the executed actions and observations above into account and plan only the steps that remain.
Every step gives a detailed thought explaining why it is needed, followed by exactly one action.
Only the first step is executed before you are asked to plan again, so later steps may change.
Use exactly this format:
Step 1:
Thought: <reasoning for this step>
Action: <tool name>
Action Input: <JSON object with the tool arguments>
Step 2:
...
Step n+1:
Thought: <reasoning for the reply>
Final Answer: <your reply to the user>
When no tool call is needed the plan is a single step holding the Final Answer.
"""

_ROLE_LABEL = {"user": "User", "assistant": "Assistant"}


class InvalidBundle(ValueError):
    pass


def render_tool_catalog(tools: tuple[ToolDefinition, ...] | list[ToolDefinition]) -> str:
    if not tools:
        return "No tools are available.\n"
    lines = ["You can call the following tools:"]
    for tool in tools:
        lines.append(f"- {tool.name}: {tool.description}")
        if tool.parameters:
            lines.append("  Parameters:")
            for p in tool.parameters:
                req = "required" if p.required else "optional"
                lines.append(f"  - {p.name} ({p.type}, {req}): {p.description}")
        else:
            lines.append("  Parameters: none")
    return "\n".join(lines) + "\n"


def check_history(history: tuple[tuple[str, str], ...]) -> None:
    for pos, entry in enumerate(history):
        if len(entry) != 2:
            raise InvalidBundle(f"history entry {pos} is not a (role, text) pair")
        role = entry[0]
        expected = "user" if pos % 2 == 0 else "assistant"
        if role != expected:
            raise InvalidBundle(f"history entry {pos} has role {role!r}, expected {expected!r}")


def render_prompt(bundle: PromptBundle) -> str:
    """Render the full agent prompt for one LLM call.

    Sections appear in a fixed order: instruction, tool catalog, dialogue
    history, executed context, output format.  The context section lists one
    ``Action/Action Input/Observation`` triple per entry and nothing else, so
    growing the context only ever inserts text there.
    """
    if bundle.mode not in ("react", "preact"):
        raise InvalidBundle(f"unknown mode {bundle.mode!r}")
    check_history(bundle.history)
    try:
        check_tool_set(bundle.tools)
    except ValueError as exc:
        raise InvalidBundle(str(exc)) from None

    parts = [
        bundle.instruction.rstrip("\n") + "\n",
        "\n## Tools\n",
        render_tool_catalog(bundle.tools),
        "\n## Conversation\n",
    ]
    for role, text in bundle.history:
        parts.append(f"{_ROLE_LABEL[role]}: {text}\n")
    parts.append("\n## Context\n")
    parts.append("Actions already executed for the latest user message, with their observations:\n")
    for call, obs in bundle.context.entries:
        parts.append(render_context_entry(call, obs.payload))
    parts.append("\n## Response format\n")
    parts.append(REACT_DIRECTIVE if bundle.mode == "react" else PREACT_DIRECTIVE)
    return "".join(parts)
