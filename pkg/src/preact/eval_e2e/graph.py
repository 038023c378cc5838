"""Milestone dependency graphs and progress scoring."""

from __future__ import annotations

import graphlib
import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable

import yaml

logger = logging.getLogger(__name__)

KINDS = ("FC", "NFC")


class GraphError(ValueError):
    pass


class CycleError(GraphError):
    def __init__(self, cycle: list[str]):
        super().__init__("dependency cycle: " + " -> ".join(cycle))
        self.cycle = cycle


class DanglingDependency(GraphError):
    pass


class MultipleEnds(GraphError):
    def __init__(self, ends: list[str]):
        super().__init__(f"expected exactly one end milestone, found {len(ends)}: {', '.join(ends)}")
        self.ends = ends


@dataclass(frozen=True)
class Milestone:
    name: str
    kind: str = "NFC"
    description: str = ""
    dependencies: tuple[str, ...] = ()
    or_group: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "type": self.kind,
            "description": self.description,
            "dependencies": list(self.dependencies),
            "or_group": self.or_group,
        }


@dataclass(frozen=True)
class MilestoneGraph:
    """Validated DAG of milestones; edges run from a dependency to its dependent."""

    milestones: tuple[Milestone, ...]
    order: tuple[str, ...] = field(init=False, repr=False)
    dependents: dict[str, tuple[str, ...]] = field(init=False, repr=False, compare=False)
    distance_to_end: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        ms = tuple(self.milestones)
        object.__setattr__(self, "milestones", ms)
        if not ms:
            raise GraphError("graph has no milestones")
        names = [m.name for m in ms]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise GraphError(f"duplicate milestone names: {', '.join(dupes)}")
        known = set(names)
        for m in ms:
            if m.kind not in KINDS:
                raise GraphError(f"milestone {m.name!r} has type {m.kind!r}, expected FC or NFC")
            missing = [d for d in m.dependencies if d not in known]
            if missing:
                raise DanglingDependency(f"milestone {m.name!r} depends on unknown {', '.join(missing)}")

        sorter = graphlib.TopologicalSorter({m.name: m.dependencies for m in ms})
        try:
            order = tuple(sorter.static_order())
        except graphlib.CycleError as exc:
            raise CycleError(list(exc.args[1])) from None

        dependents: dict[str, list[str]] = {n: [] for n in names}
        for m in ms:
            for d in m.dependencies:
                dependents[d].append(m.name)
        ends = [n for n in names if not dependents[n]]
        if len(ends) != 1:
            raise MultipleEnds(ends)

        end = ends[0]
        by_name = {m.name: m for m in ms}
        dist = {end: 0}
        queue = deque([end])
        while queue:
            node = queue.popleft()
            for d in by_name[node].dependencies:
                if d not in dist:
                    dist[d] = dist[node] + 1
                    queue.append(d)
        stranded = [n for n in names if n not in dist]
        if stranded:
            raise GraphError(f"milestones not on a path to the end: {', '.join(stranded)}")

        object.__setattr__(self, "order", order)
        object.__setattr__(self, "dependents", {k: tuple(v) for k, v in dependents.items()})
        object.__setattr__(self, "distance_to_end", dist)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(m.name for m in self.milestones)

    def get(self, name: str) -> Milestone:
        for m in self.milestones:
            if m.name == name:
                return m
        raise KeyError(name)

    @property
    def start(self) -> tuple[str, ...]:
        return tuple(m.name for m in self.milestones if not m.dependencies)

    @property
    def end(self) -> str:
        return next(n for n, deps in self.dependents.items() if not deps)

    def longest_path_length(self) -> int:
        """Edge count of the longest start-to-end path."""
        longest: dict[str, int] = {}
        for name in self.order:
            deps = self.get(name).dependencies
            longest[name] = max((longest[d] + 1 for d in deps), default=0)
        return longest[self.end]

    def shortest_path_length(self) -> int:
        return min(self.distance_to_end[s] for s in self.start)

    def to_yaml(self) -> str:
        return yaml.safe_dump([m.to_dict() for m in self.milestones], sort_keys=False)


def parse_milestone_graph(yaml_text: str, tools: Iterable[str] | None = None) -> MilestoneGraph:
    """Load and validate a graph from a YAML list of milestone records.

    When ``tools`` is given, every FC milestone must be named after one of
    them.
    """
    try:
        data = yaml.safe_load(yaml_text)
    except yaml.YAMLError as exc:
        raise GraphError(f"invalid YAML: {exc}") from None
    if isinstance(data, dict) and "milestones" in data:
        data = data["milestones"]
    if not isinstance(data, list):
        raise GraphError("milestone file must hold a list of milestones")
    milestones = []
    for pos, rec in enumerate(data, start=1):
        if not isinstance(rec, dict) or "name" not in rec:
            raise GraphError(f"milestone #{pos} needs at least a name")
        deps = rec.get("dependencies") or []
        if isinstance(deps, str):
            deps = [deps]
        milestones.append(
            Milestone(
                name=str(rec["name"]),
                kind=str(rec.get("type", "NFC")).upper(),
                description=str(rec.get("description", "")),
                dependencies=tuple(str(d) for d in deps),
                or_group=bool(rec.get("or_group", False)),
            )
        )
    graph = MilestoneGraph(tuple(milestones))
    if tools is not None:
        tool_names = set(tools)
        for m in graph.milestones:
            if m.kind == "FC" and m.name not in tool_names:
                raise GraphError(f"FC milestone {m.name!r} does not name a known tool")
    return graph


@dataclass(frozen=True)
class AchievedSet:
    """Milestones a judge reported, with the step where each was first fulfilled."""

    entries: tuple[tuple[str, int], ...] = ()
    warnings: tuple[str, ...] = ()
    unknown: tuple[tuple[str, int], ...] = ()

    def steps(self) -> dict[str, int]:
        return dict(self.entries)


def _supporting(graph: MilestoneGraph, name: str, steps: dict[str, int], valid: set[str]) -> list[str]:
    """Dependencies of ``name`` that are valid and were reached no later than it."""
    return [d for d in graph.get(name).dependencies if d in valid and steps[d] <= steps[name]]


def validly_achieved(graph: MilestoneGraph, achieved: AchievedSet) -> frozenset[str]:
    """Achieved milestones whose prerequisites were all met, in order, beforehand.

    An ``or_group`` milestone needs only one of its dependencies.
    """
    steps = {}
    for name, step in achieved.entries:
        if name not in graph.dependents:
            logger.warning("ignoring unknown milestone %r", name)
            continue
        steps[name] = step
    valid: set[str] = set()
    for name in graph.order:
        if name not in steps:
            continue
        m = graph.get(name)
        support = _supporting(graph, name, steps, valid)
        if not m.dependencies:
            ok = True
        elif m.or_group:
            ok = bool(support)
        else:
            ok = len(support) == len(m.dependencies)
        if ok:
            valid.add(name)
    return frozenset(valid)


def progress_fraction(graph: MilestoneGraph, achieved: AchievedSet) -> Fraction:
    """Exact progress rate.

    For each path that starts at a start milestone and runs through validly
    achieved milestones only, the rate is ``covered / (covered + remaining)``
    where ``covered`` is its edge count and ``remaining`` the shortest edge
    distance from its last node to the end.  The best such path is scored.
    """
    valid = validly_achieved(graph, achieved)
    if not valid:
        return Fraction(0)
    steps = achieved.steps()
    longest: dict[str, int] = {}
    for name in graph.order:
        if name not in valid:
            continue
        if not graph.get(name).dependencies:
            longest[name] = 0
        else:
            longest[name] = max(longest[d] + 1 for d in _supporting(graph, name, steps, set(valid)))
    best = Fraction(0)
    for name, covered in longest.items():
        total = covered + graph.distance_to_end[name]
        rate = Fraction(1) if total == 0 else Fraction(covered, total)
        best = max(best, rate)
    return best


def progress_rate(graph: MilestoneGraph, achieved: AchievedSet) -> float:
    return float(progress_fraction(graph, achieved))


def goal_completion(graph: MilestoneGraph, achieved: AchievedSet) -> bool:
    return graph.end in validly_achieved(graph, achieved)
