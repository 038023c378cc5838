from .graph import (
    AchievedSet,
    CycleError,
    DanglingDependency,
    GraphError,
    Milestone,
    MilestoneGraph,
    MultipleEnds,
    goal_completion,
    parse_milestone_graph,
    progress_fraction,
    progress_rate,
    validly_achieved,
)
from .judge import (
    JudgeFormatError,
    MilestoneDraft,
    SimStep,
    build_judge_prompt,
    draft_milestone_graph,
    parse_judge_output,
)
from .simulation import (
    END_TOKEN,
    E2EReport,
    Persona,
    RunResult,
    UseCase,
    load_use_case,
    run_simulation,
    simulate_run,
)

__all__ = [
    "END_TOKEN",
    "AchievedSet",
    "CycleError",
    "DanglingDependency",
    "E2EReport",
    "GraphError",
    "JudgeFormatError",
    "Milestone",
    "MilestoneDraft",
    "MilestoneGraph",
    "MultipleEnds",
    "Persona",
    "RunResult",
    "SimStep",
    "UseCase",
    "build_judge_prompt",
    "draft_milestone_graph",
    "goal_completion",
    "load_use_case",
    "parse_judge_output",
    "parse_milestone_graph",
    "progress_fraction",
    "progress_rate",
    "run_simulation",
    "simulate_run",
    "validly_achieved",
]
