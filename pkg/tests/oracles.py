"""Independent reference constructions used to derive frozen expected values.

Nothing here imports the code under test except plain data types; the prompt
layout and the transformation loop are restated by hand.
"""

from __future__ import annotations

import json
from collections import deque
from fractions import Fraction

import networkx as nx

REACT_FORMAT = (
    "Produce one Thought and one Action.\n"
    "To call a tool, answer with exactly:\n"
    "Thought: <your reasoning>\n"
    "Action: <tool name>\n"
    "Action Input: <JSON object with the tool arguments>\n"
    "To reply to the user, answer with exactly:\n"
    "Thought: I know the final answer.\n"
    "Final Answer: <your reply to the user>\n"
)

PREACT_FORMAT = (
    "Produce a numbered multi-step plan ending in a Final Answer.\n"
    "Take the executed actions and observations above into account and plan only the steps that remain.\n"
    "Every step gives a detailed thought explaining why it is needed, followed by exactly one action.\n"
    "Only the first step is executed before you are asked to plan again, so later steps may change.\n"
    "Use exactly this format:\n"
    "Step 1:\n"
    "Thought: <reasoning for this step>\n"
    "Action: <tool name>\n"
    "Action Input: <JSON object with the tool arguments>\n"
    "Step 2:\n"
    "...\n"
    "Step n+1:\n"
    "Thought: <reasoning for the reply>\n"
    "Final Answer: <your reply to the user>\n"
    "When no tool call is needed the plan is a single step holding the Final Answer.\n"
)


def hand_prompt(instruction, tools, history, context, mode):
    """tools: list of tool dicts; history: list of (role, text); context: list of (name, args, obs)."""
    out = instruction + "\n"
    out += "\n## Tools\n"
    if not tools:
        out += "No tools are available.\n"
    else:
        out += "You can call the following tools:\n"
        for t in tools:
            out += "- " + t["name"] + ": " + t["description"] + "\n"
            if t["parameters"]:
                out += "  Parameters:\n"
                for p in t["parameters"]:
                    req = "required" if p["required"] else "optional"
                    out += "  - " + p["name"] + " (" + p["type"] + ", " + req + "): " + p["description"] + "\n"
            else:
                out += "  Parameters: none\n"
    out += "\n## Conversation\n"
    for role, text in history:
        out += ("User: " if role == "user" else "Assistant: ") + text + "\n"
    out += "\n## Context\n"
    out += "Actions already executed for the latest user message, with their observations:\n"
    for name, args, obs in context:
        out += "Action: " + name + "\n"
        out += "Action Input: " + json.dumps(args, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"
        out += "Observation: " + obs + "\n"
    out += "\n## Response format\n"
    out += REACT_FORMAT if mode == "react" else PREACT_FORMAT
    return out


def hand_react_transform(conv):
    """Straight transcription of the ReAct transformation loop over a corpus record."""
    pairs = []
    history = []
    for t in conv["turns"]:
        history.append(("user", t["user"]))
        calls = t["calls"]
        if not calls:
            inp = hand_prompt(conv["instruction"], conv["tools"], history, [], "react")
            out = "Thought: I know the final answer.\nFinal Answer: " + t["assistant"]
            pairs.append({"input": inp, "output": out, "stage": "react", "placeholders": []})
        else:
            ctx = []
            for fc in calls:
                inp = hand_prompt(conv["instruction"], conv["tools"], history, list(ctx), "react")
                args = json.dumps(fc["arguments"], sort_keys=True, separators=(",", ":"), ensure_ascii=False)
                out = (
                    "Thought: Need to invoke tool : " + fc["name"] + "\n"
                    "Action: " + fc["name"] + "\n"
                    "Action Input: " + args + "\n"
                )
                pairs.append({"input": inp, "output": out, "stage": "react", "placeholders": []})
                ctx.append((fc["name"], fc["arguments"], fc["response"]))
            inp = hand_prompt(conv["instruction"], conv["tools"], history, ctx, "react")
            out = "Thought: I know the final answer.\nFinal Answer: " + t["assistant"]
            pairs.append({"input": inp, "output": out, "stage": "react", "placeholders": []})
        history.append(("assistant", t["assistant"]))
    return pairs


# --- milestone graph oracles ------------------------------------------------


def brute_valid(milestones, achieved):
    """Fixed-point iteration of the validity rule (independent of topological order)."""
    deps = {m["name"]: m["dependencies"] for m in milestones}
    or_group = {m["name"]: m.get("or_group", False) for m in milestones}
    steps = {n: s for n, s in achieved.items() if n in deps}
    valid = set()
    changed = True
    while changed:
        changed = False
        for n, s in steps.items():
            if n in valid:
                continue
            ok_deps = [d for d in deps[n] if d in valid and steps[d] <= s]
            if not deps[n]:
                ok = True
            elif or_group[n]:
                ok = len(ok_deps) >= 1
            else:
                ok = len(ok_deps) == len(deps[n])
            if ok:
                valid.add(n)
                changed = True
    return valid


def brute_progress(milestones, achieved):
    """Enumerate every start-rooted path inside the valid set and score the best one."""
    g = nx.DiGraph()
    for m in milestones:
        g.add_node(m["name"])
        for d in m["dependencies"]:
            g.add_edge(d, m["name"])
    end = [n for n in g.nodes if g.out_degree(n) == 0][0]
    starts = [n for n in g.nodes if g.in_degree(n) == 0]
    valid = brute_valid(milestones, achieved)
    if not valid:
        return Fraction(0), False
    best = Fraction(0)
    for s in starts:
        if s not in valid:
            continue
        stack = deque([[s]])
        while stack:
            path = stack.pop()
            last = path[-1]
            covered = len(path) - 1
            remaining = nx.shortest_path_length(g, last, end)
            rate = Fraction(1) if covered + remaining == 0 else Fraction(covered, covered + remaining)
            best = max(best, rate)
            for nxt in g.successors(last):
                if nxt in valid and achieved[last] <= achieved[nxt]:
                    stack.append(path + [nxt])
    return best, end in valid
