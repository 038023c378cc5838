import difflib
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from preact.plan_core import (
    AmbiguousFinalAnswer,
    ExecutionContext,
    FinalAnswer,
    InvalidBundle,
    Observation,
    ParamSpec,
    ParseError,
    Plan,
    PlanStep,
    PromptBundle,
    ToolCall,
    ToolDefinition,
    parse_plan,
    render_plan,
    render_prompt,
)

GOLDEN = Path(__file__).parent / "fixtures" / "golden"

ORDER_TOOL = ToolDefinition(
    "get_order_status",
    "Look up the status of an order.",
    (ParamSpec("order_id", "string", True, "Order number."),),
)


def _bundle(context=ExecutionContext(), mode="preact"):
    return PromptBundle(
        "You are a support agent for an online store.",
        (ORDER_TOOL,),
        (("user", "Where is my order A17?"),),
        context,
        mode,
    )


# --- parse_plan -----------------------------------------------------------


def test_parse_react_final_answer():
    plan = parse_plan("Thought: I know the final answer.\nFinal Answer: Hi!", "react")
    assert plan == Plan((PlanStep(1, "I know the final answer.", FinalAnswer("Hi!")),))


def test_parse_react_tool_call():
    plan = parse_plan('Thought: look it up\nAction: get_order_status\nAction Input: {"order_id": "A17"}\n', "react")
    (step,) = plan.steps
    assert step.action == ToolCall("get_order_status", {"order_id": "A17"})
    assert step.status == "pending"


def test_parse_preact_three_steps():
    text = (
        "Step 1:\nThought: check the order\nAction: get_order_status\nAction Input: {\"order_id\":\"A17\"}\n"
        "Step 2:\nThought: refund it\nAction: refund_order\nAction Input: {\"order_id\":\"A17\"}\n"
        "Step 3:\nThought: tell the user\nFinal Answer: Done.\nAll set."
    )
    plan = parse_plan(text, "preact")
    assert [s.index for s in plan.steps] == [1, 2, 3]
    assert plan.steps[2].action == FinalAnswer("Done.\nAll set.")
    assert plan.is_complete


def test_missing_thought_in_preact_is_parse_error():
    with pytest.raises(ParseError) as info:
        parse_plan("Step 1:\nAction: foo", "preact")
    assert info.value.line == 2
    assert "Thought" in info.value.expected


def test_markdown_fence_and_trailing_whitespace_are_stripped():
    raw = "```text\nThought: ok\nFinal Answer: yes\n```\n\n  "
    assert parse_plan(raw, "react").steps[0].action == FinalAnswer("yes")


@pytest.mark.parametrize(
    "text",
    [
        'Thought: x\nAction: foo\nAction Input: {}\nFinal Answer: hi',
        "Thought: x\nFinal Answer: hi\nAction: foo\nAction Input: {}",
        'Step 1:\nThought: x\nAction: foo\nAction Input: {}\nFinal Answer: hi',
    ],
)
def test_action_and_final_answer_in_one_step_is_ambiguous(text):
    mode = "preact" if text.startswith("Step") else "react"
    with pytest.raises(AmbiguousFinalAnswer):
        parse_plan(text, mode)


def test_preact_plan_must_end_in_final_answer():
    with pytest.raises(ParseError, match="without a final answer"):
        parse_plan("Step 1:\nThought: x\nAction: foo\nAction Input: {}\n", "preact")


def test_parse_error_position_points_at_offending_line():
    text = "Step 1:\nThought: a\nAction: foo\nAction Input: {}\nStep 3:\nThought: b\nFinal Answer: c"
    with pytest.raises(ParseError) as info:
        parse_plan(text, "preact")
    assert info.value.position == text.index("Step 3:")
    assert info.value.expected == "'Step 2:'"


# --- render_plan ----------------------------------------------------------


def test_render_single_final_answer_react():
    plan = Plan((PlanStep(1, "I know the final answer.", FinalAnswer("Hi!")),))
    assert render_plan(plan, "react") == "Thought: I know the final answer.\nFinal Answer: Hi!"


def test_render_escapes_newlines_in_arguments():
    plan = Plan(
        (
            PlanStep(1, "write a note", ToolCall("note", {"body": "line one\nline two", "n": 2})),
            PlanStep(2, "reply", FinalAnswer("saved")),
        )
    )
    text = render_plan(plan, "preact")
    assert 'Action Input: {"body":"line one\\nline two","n":2}\n' in text
    assert parse_plan(text, "preact") == plan


def test_render_react_rejects_multi_step_plan():
    plan = Plan((PlanStep(1, "a", ToolCall("x")), PlanStep(2, "b", FinalAnswer("c"))))
    with pytest.raises(ValueError):
        render_plan(plan, "react")


def test_plan_rejects_final_answer_before_last_step():
    with pytest.raises(ValueError):
        Plan((PlanStep(1, "a", FinalAnswer("x")), PlanStep(2, "b", FinalAnswer("y"))))


# --- round trip property ----------------------------------------------------

_name = st.builds(
    str.__add__, st.sampled_from("abcdefghijklmnopqrstuvwxyz_"), st.text("abcdefghijklmnopqrstuvwxyz0123456789_", max_size=10)
)
_text_char = st.characters(blacklist_categories=("Cs",), blacklist_characters="\r\x0b\x0c\x1c\x1d\x1e\x85  ")
_line = st.text(_text_char, min_size=1, max_size=30).filter(lambda s: "\n" not in s and s.strip())
_json_scalar = st.one_of(
    st.none(), st.booleans(), st.integers(-10**6, 10**6), st.text(_text_char, max_size=20)
)
_args = st.dictionaries(_name, st.one_of(_json_scalar, st.lists(_json_scalar, max_size=3)), max_size=4)


@st.composite
def final_texts(draw):
    lines = draw(st.lists(st.text(_text_char, max_size=20).filter(lambda s: "\n" not in s), min_size=1, max_size=3))
    text = "\n".join(lines).rstrip()
    if not text.strip() or any(l.startswith("Action:") for l in text.split("\n")):
        text = "ok"
    return text


@st.composite
def plans(draw, mode="preact"):
    n_tools = 0 if mode == "react" else draw(st.integers(0, 5))
    steps = [PlanStep(k, draw(_line), ToolCall(draw(_name), draw(_args))) for k in range(1, n_tools + 1)]
    if mode == "react" and draw(st.booleans()):
        steps.append(PlanStep(1, draw(_line), ToolCall(draw(_name), draw(_args))))
    else:
        steps.append(PlanStep(len(steps) + 1, draw(_line), FinalAnswer(draw(final_texts()))))
    return Plan(tuple(steps))


@settings(max_examples=100, deadline=None)
@given(plans("preact"))
def test_preact_round_trip(plan):
    assert parse_plan(render_plan(plan, "preact"), "preact") == plan


@settings(max_examples=100, deadline=None)
@given(plans("react"))
def test_react_round_trip(plan):
    assert parse_plan(render_plan(plan, "react"), "react") == plan


# --- render_prompt ----------------------------------------------------------


def test_empty_react_prompt():
    text = render_prompt(PromptBundle("Be nice.", mode="react"))
    assert "No tools are available." in text
    assert text.index("## Tools") < text.index("## Conversation") < text.index("## Context") < text.index("## Response format")
    assert "Produce one Thought and one Action." in text
    assert "Step 1:" not in text


def test_prompt_matches_golden():
    golden = (GOLDEN / "preact_prompt.txt").read_text(encoding="utf-8")
    assert render_prompt(_bundle()) == golden
    assert render_prompt(_bundle()) == render_prompt(_bundle())


def test_appending_context_only_inserts_one_triple():
    before = render_prompt(_bundle())
    ctx = ExecutionContext().append(ToolCall("get_order_status", {"order_id": "A17"}), Observation("get_order_status", "shipped"))
    after = render_prompt(_bundle(ctx))
    ops = [op for op in difflib.SequenceMatcher(None, before, after, autojunk=False).get_opcodes() if op[0] != "equal"]
    assert [op[0] for op in ops] == ["insert"]
    triple = 'Action: get_order_status\nAction Input: {"order_id":"A17"}\nObservation: shipped\n'
    cut = before.index("\n## Response format")
    assert after == before[:cut] + triple + before[cut:]


def test_history_must_alternate_from_user():
    with pytest.raises(InvalidBundle):
        render_prompt(PromptBundle("x", history=(("assistant", "hi"),)))
    with pytest.raises(InvalidBundle):
        render_prompt(PromptBundle("x", history=(("user", "a"), ("user", "b"))))


def test_duplicate_tool_names_rejected():
    with pytest.raises(InvalidBundle):
        render_prompt(PromptBundle("x", tools=(ORDER_TOOL, ORDER_TOOL)))
