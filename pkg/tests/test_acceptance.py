"""Acceptance criteria, one test each.

Every test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line with its
runtime so the pytest log doubles as the acceptance record.
"""

import json
import random
import time
from contextlib import contextmanager
from fractions import Fraction

import jsonschema
import pytest
import yaml
from hypothesis import given, settings

from oracles import brute_progress, hand_react_transform
from preact.cli import main
from preact.dataset import fill_placeholders, load_corpus, transform_preact, transform_react, write_pairs
from preact.eval_e2e import (
    AchievedSet,
    goal_completion,
    load_use_case,
    parse_milestone_graph,
    progress_fraction,
    progress_rate,
    run_simulation,
)
from preact.eval_turn import evaluate_file, evaluate_records, judge_turn
from preact.orchestrator import ScriptedLlm, Transcript, registry_from_specs, run_turn
from preact.plan_core import FinalAnswer, ParseError, PromptBundle, parse_plan, render_plan
from test_plan_core import plans


@contextmanager
def criterion(capsys, number, title, limit_s):
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        within = elapsed < limit_s
        status = "PASS" if ok and within else "FAIL"
        with capsys.disabled():
            print(f"\nACCEPTANCE {number} {status}: {title} ({elapsed:.2f}s, limit {limit_s}s)")
    assert within, f"criterion {number} took {elapsed:.2f}s (limit {limit_s}s)"


# 1 ----------------------------------------------------------------------------


def test_1_react_transform_oracle(fixtures, tmp_path, capsys):
    with criterion(capsys, 1, "ReAct transform pair counts and golden bytes", 1.0):
        corpus = load_corpus(fixtures / "corpus.jsonl")
        raw = [json.loads(l) for l in (fixtures / "corpus.jsonl").read_text(encoding="utf-8").splitlines()]
        per_conv = [transform_react(c) for c in corpus]
        # turns with 0 / 1 / (0, 2) tool calls: 1, 1+1, 1+(2+1)
        assert [len(p) for p in per_conv] == [1, 2, 4]
        for pairs, r in zip(per_conv, raw):
            assert [p.to_dict() for p in pairs] == hand_react_transform(r)
        out = tmp_path / "pairs.jsonl"
        write_pairs([p for pairs in per_conv for p in pairs], out)
        assert out.read_bytes() == (fixtures / "golden" / "react_pairs.jsonl").read_bytes()


# 2 ----------------------------------------------------------------------------


def test_2_preact_transform_oracle(fixtures, capsys):
    with criterion(capsys, 2, "Pre-Act transform plans 3/2/1 and placeholder round trip", 1.0):
        conv = load_corpus(fixtures / "corpus.jsonl")[2]
        pairs = transform_preact(conv)[1:]  # the two-call turn
        assert [len(p.reasoning_placeholders) for p in pairs] == [3, 2, 1]
        for p in pairs:
            filled = fill_placeholders(p, lambda k: f"annotated reason {k}")
            plan = parse_plan(filled.output, "preact")
            assert len(plan.steps) == len(p.reasoning_placeholders)
            assert all(s.thought == f"annotated reason {s.index}" for s in plan.steps)
            assert render_plan(plan, "preact") == filled.output


# 3 ----------------------------------------------------------------------------

_VALID = (
    'Step 1:\nThought: look up\nAction: get_order_status\nAction Input: {"order_id":"A17"}\n'
    "Step 2:\nThought: reply\nFinal Answer: done"
)

MUTATIONS = [
    ("preact", ""),
    ("preact", _VALID.replace("Step 1:", "Step 0:")),
    ("preact", _VALID.replace("Step 2:", "Step 3:")),
    ("preact", _VALID.replace("Thought: look up\n", "")),
    ("preact", _VALID.replace("Action Input:", "Action input:")),
    ("preact", _VALID.replace('{"order_id":"A17"}', '{"order_id":"A17"')),
    ("preact", _VALID.replace('{"order_id":"A17"}', '["A17"]')),
    ("preact", _VALID.replace("Action: get_order_status", "Action: get order status")),
    ("preact", _VALID.replace("Final Answer: done", "Final Answer:")),
    ("preact", _VALID.split("Step 2:")[0]),
    ("preact", _VALID.replace("Final Answer: done", 'Action: x\nAction Input: {}\nFinal Answer: done')),
    ("preact", "Thought: no step header\nFinal Answer: hi"),
    ("preact", _VALID.replace("Thought: reply", "Thought:")),
    ("preact", _VALID + "\nAction: sneaky"),
    ("react", "Final Answer: missing thought"),
    ("react", "Thought: x\nAction: foo"),
    ("react", "Thought: x\nAction: foo\nAction Input: not json"),
    ("react", 'Thought: x\nAction: foo\nAction Input: {}\nThought: again\nFinal Answer: y'),
    ("react", "Thought: x\nObservation: invented\nFinal Answer: y"),
    ("react", "just some prose"),
]


@settings(max_examples=100, deadline=None, database=None)
@given(plans("preact"))
def _preact_round_trip(plan):
    assert parse_plan(render_plan(plan, "preact"), "preact") == plan


@settings(max_examples=100, deadline=None, database=None)
@given(plans("react"))
def _react_round_trip(plan):
    assert parse_plan(render_plan(plan, "react"), "react") == plan


def test_3_plan_grammar_round_trip(capsys):
    with criterion(capsys, 3, "100 random plans round-trip, 20 mutations rejected with positions", 5.0):
        _preact_round_trip()
        _react_round_trip()
        assert len(MUTATIONS) == 20
        for mode, text in MUTATIONS:
            with pytest.raises(ParseError) as info:
                parse_plan(text, mode)
            err = info.value
            assert 0 <= err.position <= len(text) and err.line >= 1 and err.expected, (mode, text)


# 4 ----------------------------------------------------------------------------


def test_4_orchestrator_trace_oracle(fixtures, capsys):
    tools = json.loads((fixtures / "orchestrator" / "tools.json").read_text())
    golden = (fixtures / "golden" / "orchestrator_transcript.jsonl").read_text(encoding="utf-8")

    def scenario(script, mode, max_iterations=8):
        reg = registry_from_specs(tools)
        bundle = PromptBundle(
            "You are a support agent for an online store.",
            reg.definitions,
            (("user", "Please refund order A17, it arrived broken. My email is ann@example.com."),),
            mode=mode,
        )
        t = Transcript()
        llm = ScriptedLlm.from_file(fixtures / "orchestrator" / script)
        return run_turn(bundle, llm, reg, max_iterations, transcript=t), t

    with criterion(capsys, 4, "orchestrator trace equals golden, bounded loop, deterministic", 1.0):
        seen = set()
        for _ in range(10):
            result, t = scenario("script_preact.json", "preact")
            assert (result.llm_calls, len(result.context), result.terminated_by) == (4, 3, "final_answer")
            assert t.to_jsonl() == golden
            seen.add(t.to_jsonl())
        assert len(seen) == 1
        bounded, _ = scenario("script_loop.json", "react", max_iterations=2)
        assert bounded.terminated_by == "max_iterations" and len(bounded.context) == 2


# 5 ----------------------------------------------------------------------------


def test_5_level1_metric_oracle(fixtures, capsys):
    lv = fixtures / "level1"
    with criterion(capsys, 5, "action recall 13/20, token F1 0.8, all-correct 1.0", 1.0):
        report, _ = evaluate_file(lv / "pred.jsonl", lv / "gt.jsonl")
        assert report.action_recall == 0.65
        assert report.counts["action_matches"] == 13 and report.counts["turns"] == 20
        f1 = judge_turn(FinalAnswer("the order shipped"), FinalAnswer("order shipped")).answer_f1
        assert abs(f1 - 0.8) < 1e-12
        gts = [json.loads(l) for l in (lv / "gt.jsonl").read_text().splitlines()]
        perfect, _ = evaluate_records(gts, gts)
        assert all(v == 1.0 for v in perfect.to_dict()["metrics"].values())


# 6 ----------------------------------------------------------------------------


def _dag_cases(n_cases, seed=11):
    rng = random.Random(seed)
    for _ in range(n_cases):
        n = rng.randint(2, 8)
        names = [f"m{i}" for i in range(n)]
        deps = {names[0]: []}
        for i in range(1, n):
            deps[names[i]] = rng.sample(names[:i], rng.randint(1, min(3, i)))
        has_dependent = {d for ds in deps.values() for d in ds}
        deps[names[-1]] = sorted(set(deps[names[-1]]) | {m for m in names[:-1] if m not in has_dependent})
        records = [{"name": m, "dependencies": d, "or_group": bool(d) and rng.random() < 0.3} for m, d in deps.items()]
        achieved = {m: rng.randint(1, 6) for m in names if rng.random() < 0.7}
        yield records, achieved


def test_6_progress_rate_fixtures(capsys):
    with criterion(capsys, 6, "progress-rate fixtures and GC <=> PR=1 over 200 random DAGs", 30.0):
        chain = parse_milestone_graph(
            "- {name: A, dependencies: []}\n- {name: B, dependencies: [A]}\n- {name: C, dependencies: [B]}\n"
            "- {name: D, dependencies: [C]}\n- {name: E, dependencies: [D]}\n"
        )
        assert progress_fraction(chain, AchievedSet((("A", 1), ("B", 2), ("C", 3)))) == Fraction(1, 2)
        diamond = parse_milestone_graph(
            "- {name: A, dependencies: []}\n- {name: B, dependencies: [A]}\n- {name: C, dependencies: [A]}\n"
            "- {name: D, dependencies: [B, C], or_group: true}\n- {name: E, dependencies: [D]}\n"
        )
        assert abs(progress_rate(diamond, AchievedSet((("A", 1), ("C", 2), ("D", 3)))) - 2 / 3) <= 1e-9
        cases = list(_dag_cases(200))
        assert len(cases) == 200
        for records, achieved in cases:
            g = parse_milestone_graph(yaml.safe_dump(records))
            a = AchievedSet(tuple(achieved.items()))
            oracle_pr, oracle_gc = brute_progress(records, achieved)
            assert progress_fraction(g, a) == oracle_pr
            assert goal_completion(g, a) == oracle_gc == (oracle_pr == 1)


# 7 ----------------------------------------------------------------------------


def test_7_scripted_simulation(fixtures, capsys):
    def simulate(name, runs):
        uc = load_use_case(fixtures / "usecases" / name)
        ports = [ScriptedLlm.from_file(uc.scripted_fixture(r)) for r in ("agent", "user", "judge")]
        return run_simulation(uc, *ports, runs)

    with criterion(capsys, 7, "50 scripted happy-path runs GC=PR=1; broken tool GC=0, PR=1/4", 30.0):
        happy = simulate("refund", 50)
        assert happy.runs == 50 and happy.aborted == 0
        assert all(d["goal_completion"] and d["progress_rate"] == 1.0 for d in happy.details)
        assert happy.goal_completion == 1.0 and happy.progress_rate == 1.0
        broken = simulate("refund_broken", 5)
        assert broken.goal_completion == 0.0
        assert abs(broken.progress_rate - 0.25) <= 1e-9


# 8 ----------------------------------------------------------------------------


def test_8_pipeline_smoke(fixtures, tmp_path, capsys):
    with criterion(capsys, 8, "transform -> run (scripted) -> eval-turn, exit 0, schema-valid report", 10.0):
        pairs, gt = tmp_path / "pairs.jsonl", tmp_path / "gt.jsonl"
        assert main(["transform", str(fixtures / "corpus.jsonl"), str(pairs), "--stage", "react", "--gt", str(gt)]) == 0
        outputs = [json.loads(l)["output"] for l in pairs.read_text(encoding="utf-8").splitlines()]
        # a scripted model that gets every step right except that it answers too early once
        outputs[1] = "Thought: I know the final answer.\nFinal Answer: It is sunny."
        script = tmp_path / "model.json"
        script.write_text(json.dumps({"completions": outputs}), encoding="utf-8")
        preds = tmp_path / "preds.jsonl"
        assert main(["run", str(pairs), "--provider", f"scripted:{script}", "--predict", "--out", str(preds)]) == 0
        report_path = tmp_path / "report.json"
        assert main(["eval-turn", str(preds), str(gt), "--out", str(report_path)]) == 0
        report = json.loads(report_path.read_text())
        jsonschema.validate(report, json.loads((fixtures / "level1" / "report.schema.json").read_text()))
        assert report["metrics"]["action_recall"] == pytest.approx(6 / 7)
        assert report["metrics"]["tool_recall"] == pytest.approx(2 / 3)
