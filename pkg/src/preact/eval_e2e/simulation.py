"""Synthetic-user simulation runs scored against a milestone graph."""

from __future__ import annotations

import json
import logging
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import yaml

from ..orchestrator import (
    DEFAULT_MAX_ITERATIONS,
    LlmPort,
    ScriptedLlm,
    Transcript,
    TransportError,
    registry_from_specs,
    run_turn,
)
from ..plan_core import Mode, PromptBundle, ToolDefinition, canonical_json
from .graph import (
    AchievedSet,
    MilestoneGraph,
    goal_completion,
    parse_milestone_graph,
    progress_fraction,
    validly_achieved,
)
from .judge import JudgeFormatError, SimStep, build_judge_prompt, parse_judge_output

logger = logging.getLogger(__name__)

END_TOKEN = "<<END>>"
DEFAULT_MAX_TURNS = 30
SCHEMA_VERSION = "1.0"


@dataclass(frozen=True)
class Persona:
    name: str
    description: str


@dataclass
class UseCase:
    name: str
    instruction: str
    tool_specs: list[dict[str, Any]]
    graph: MilestoneGraph
    personas: list[Persona]
    workflow: str = ""
    directory: Path | None = None

    @property
    def tools(self) -> tuple[ToolDefinition, ...]:
        return tuple(ToolDefinition.from_dict(s) for s in self.tool_specs)

    def scripted_fixture(self, role: str) -> Path | None:
        if self.directory is None:
            return None
        path = self.directory / "scripted" / f"{role}.json"
        return path if path.exists() else None


def load_use_case(directory: str | Path) -> UseCase:
    """Load ``instruction.txt``, ``tools.json``, ``milestones.yaml`` and ``personas.yaml``."""
    d = Path(directory)
    tool_specs = json.loads((d / "tools.json").read_text(encoding="utf-8"))
    graph = parse_milestone_graph(
        (d / "milestones.yaml").read_text(encoding="utf-8"), [s["name"] for s in tool_specs]
    )
    raw_personas = yaml.safe_load((d / "personas.yaml").read_text(encoding="utf-8")) or []
    personas = [Persona(p["name"], p.get("description", "")) for p in raw_personas]
    if not personas:
        raise ValueError(f"{d}: personas.yaml lists no personas")
    workflow_path = d / "workflow.txt"
    return UseCase(
        name=d.name,
        instruction=(d / "instruction.txt").read_text(encoding="utf-8"),
        tool_specs=tool_specs,
        graph=graph,
        personas=personas,
        workflow=workflow_path.read_text(encoding="utf-8") if workflow_path.exists() else "",
        directory=d,
    )


USER_TEMPLATE = """\
You are role-playing a user who is talking to a customer-service AI agent.
Stay in character for the whole conversation.

## Persona: {name}
{description}

Write only your next message to the agent, with no labels.
When your issue is resolved or you want to stop, reply with {end} and nothing else.
"""


def user_messages(persona: Persona, steps: Sequence[SimStep]) -> list[tuple[str, str]]:
    """Chat messages for the synthetic user; roles are mirrored so the agent speaks as ``user``."""
    messages = [("system", USER_TEMPLATE.format(name=persona.name, description=persona.description, end=END_TOKEN))]
    for step in steps:
        if step.role == "user":
            messages.append(("assistant", step.text))
        elif step.role == "agent":
            messages.append(("user", step.text))
    if len(messages) == 1:
        messages.append(("user", "Start the conversation with the agent."))
    return messages


@dataclass
class RunResult:
    run: int
    persona: str
    steps: list[SimStep] = field(default_factory=list)
    transcript: Transcript = field(default_factory=Transcript)
    judge_output: str = ""
    achieved: AchievedSet = field(default_factory=AchievedSet)
    valid: frozenset[str] = frozenset()
    goal_completion: bool = False
    progress_rate: float = 0.0
    aborted: str | None = None

    def judgment(self) -> dict[str, Any]:
        return {
            "run": self.run,
            "persona": self.persona,
            "aborted": self.aborted,
            "judge_output": self.judge_output,
            "achieved": [{"milestone": n, "step": s} for n, s in self.achieved.entries],
            "unknown": [{"milestone": n, "step": s} for n, s in self.achieved.unknown],
            "warnings": list(self.achieved.warnings),
            "validly_achieved": sorted(self.valid),
            "goal_completion": self.goal_completion,
            "progress_rate": self.progress_rate,
        }


@dataclass
class E2EReport:
    use_case: str
    runs: int
    aborted: int
    goal_completion: float | None
    progress_rate: float | None
    goal_completion_std: float | None
    progress_rate_std: float | None
    details: list[dict[str, Any]]

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "use_case": self.use_case,
            "runs": self.runs,
            "aborted": self.aborted,
            "goal_completion": self.goal_completion,
            "progress_rate": self.progress_rate,
            "goal_completion_std": self.goal_completion_std,
            "progress_rate_std": self.progress_rate_std,
            "details": self.details,
        }


def simulate_run(
    run: int,
    use_case: UseCase,
    persona: Persona,
    agent_llm: LlmPort,
    user_llm: LlmPort,
    judge_llm: LlmPort,
    *,
    mode: Mode = "preact",
    max_turns: int = DEFAULT_MAX_TURNS,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> RunResult:
    result = RunResult(run=run, persona=persona.name)
    tools = use_case.tools
    registry = registry_from_specs(use_case.tool_specs)
    history: list[tuple[str, str]] = []
    try:
        for turn in range(1, max_turns + 1):
            message = user_llm.complete("user", user_messages(persona, result.steps), 0.0)
            if END_TOKEN in message:
                break
            message = message.strip()
            result.steps.append(SimStep("user", message))
            history.append(("user", message))
            bundle = PromptBundle(use_case.instruction, tools, tuple(history), mode=mode)
            outcome = run_turn(
                bundle, agent_llm, registry, max_iterations, transcript=result.transcript, turn=turn
            )
            for call, obs in outcome.context.entries:
                result.steps.append(SimStep("tool_call", f"{call.tool_name} {canonical_json(call.arguments)}"))
                result.steps.append(SimStep("tool_result", f"({obs.source_tool}) {obs.payload}"))
            reply = outcome.final_answer or "(no response)"
            result.steps.append(SimStep("agent", reply))
            history.append(("assistant", reply))

        if result.steps:
            prompt = build_judge_prompt(result.steps, use_case.graph, use_case.instruction, tools)
            result.judge_output = judge_llm.complete("judge", [("user", prompt)], 0.0)
            result.achieved = parse_judge_output(result.judge_output, use_case.graph)
    except (TransportError, JudgeFormatError) as exc:
        logger.warning("run %d aborted: %s", run, exc)
        result.aborted = str(exc)
        return result

    result.valid = validly_achieved(use_case.graph, result.achieved)
    result.goal_completion = goal_completion(use_case.graph, result.achieved)
    result.progress_rate = float(progress_fraction(use_case.graph, result.achieved))
    return result


def _mean_std(values: list[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    return statistics.fmean(values), statistics.pstdev(values)


def run_simulation(
    use_case: UseCase,
    agent_llm: LlmPort,
    user_llm: LlmPort,
    judge_llm: LlmPort,
    n_runs: int,
    *,
    personas: Sequence[Persona] | None = None,
    mode: Mode = "preact",
    max_turns: int = DEFAULT_MAX_TURNS,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    artifacts_dir: str | Path | None = None,
    jobs: int = 1,
) -> E2EReport:
    """Simulate ``n_runs`` conversations and report mean goal completion and progress.

    Personas rotate across runs.  Runs aborted by provider failures or
    unreadable judge output are counted but left out of the means.
    Scripted ports are reset before every run, which forces sequential
    execution; otherwise up to ``jobs`` runs proceed in parallel.
    """
    personas = list(personas or use_case.personas)
    ports = (agent_llm, user_llm, judge_llm)
    scripted = any(isinstance(p, ScriptedLlm) for p in ports)

    def one(run: int) -> RunResult:
        if scripted:
            for port in ports:
                port.reset()
        return simulate_run(
            run,
            use_case,
            personas[(run - 1) % len(personas)],
            agent_llm,
            user_llm,
            judge_llm,
            mode=mode,
            max_turns=max_turns,
            max_iterations=max_iterations,
        )

    run_ids = list(range(1, n_runs + 1))
    if scripted or jobs <= 1:
        results = [one(r) for r in run_ids]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, run_ids))

    if artifacts_dir is not None:
        out = Path(artifacts_dir)
        out.mkdir(parents=True, exist_ok=True)
        for r in results:
            r.transcript.write(out / f"run_{r.run:03d}.transcript.jsonl")
            (out / f"run_{r.run:03d}.judgment.json").write_text(
                json.dumps(r.judgment(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )

    done = [r for r in results if r.aborted is None]
    gc, gc_std = _mean_std([float(r.goal_completion) for r in done])
    pr, pr_std = _mean_std([r.progress_rate for r in done])
    return E2EReport(
        use_case=use_case.name,
        runs=len(done),
        aborted=len(results) - len(done),
        goal_completion=gc,
        progress_rate=pr,
        goal_completion_std=gc_std,
        progress_rate_std=pr_std,
        details=[r.judgment() for r in results],
    )
