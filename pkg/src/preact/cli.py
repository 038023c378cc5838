"""Command line entry point.

Exit codes: 0 success, 1 runtime or provider failure, 2 input or validation
error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Sequence

from .config import Config, ConfigError, load_config
from .dataset import SchemaError, load_corpus, read_pairs, target_action, transform, write_pairs
from .eval_e2e import (
    GraphError,
    draft_milestone_graph,
    load_use_case,
    parse_milestone_graph,
    run_simulation,
)
from .eval_turn import AlignmentError, EmbeddingSimilarity, evaluate_records, tf_cosine, write_judgments
from .orchestrator import (
    AgentConfig,
    ConversationAborted,
    LlmPort,
    ScriptedLlm,
    ToolRegistry,
    Transcript,
    TransportError,
    registry_from_specs,
    run_conversation,
    run_turn,
)
from .plan_core import PromptBundle, ToolDefinition

logger = logging.getLogger("preact")

EXIT_OK, EXIT_RUNTIME, EXIT_INPUT = 0, 1, 2
DEFAULT_INSTRUCTION = "You are a helpful assistant that uses tools to resolve the user's request."


class InputError(Exception):
    """Bad user input; maps to exit code 2."""


def _read_jsonl(path: str | Path) -> list[dict[str, Any]]:
    records = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if line.strip():
                    try:
                        records.append(json.loads(line))
                    except json.JSONDecodeError as exc:
                        raise InputError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
    except OSError as exc:
        raise InputError(str(exc)) from None
    return records


def _write_jsonl(records: Sequence[dict[str, Any]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def _emit_json(obj: dict[str, Any], out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_tools(path: str | None) -> tuple[tuple[ToolDefinition, ...], ToolRegistry]:
    if not path:
        return (), ToolRegistry()
    try:
        specs = json.loads(Path(path).read_text(encoding="utf-8"))
        registry = registry_from_specs(specs)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot load tools from {path}: {exc}") from None
    return registry.definitions, registry


def _instruction(path: str | None) -> str:
    if not path:
        return DEFAULT_INSTRUCTION
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(str(exc)) from None


def _jobs(requested: int, *ports: LlmPort) -> int:
    if requested > 1 and any(isinstance(p, ScriptedLlm) for p in ports):
        logger.warning("scripted providers replay in order; ignoring --jobs %d", requested)
        return 1
    return max(1, requested)


# --- transform ------------------------------------------------------------


def cmd_transform(args: argparse.Namespace, cfg: Config) -> int:
    errors: list[SchemaError] = []
    try:
        conversations = load_corpus(args.input, strict=not args.lenient, errors=errors)
    except OSError as exc:
        raise InputError(str(exc)) from None
    pairs = []
    for conv in conversations:
        pairs.extend(transform(conv, args.stage))
    write_pairs(pairs, args.output)
    if args.gt:
        _write_jsonl([{"id": str(i), "action": target_action(p).to_dict()} for i, p in enumerate(pairs, 1)], args.gt)
    for err in errors:
        print(f"skipped {err}", file=sys.stderr)
    print(f"{len(conversations)} conversations -> {len(pairs)} {args.stage} pairs", file=sys.stderr)
    return EXIT_OK


# --- run / chat -------------------------------------------------------------


def _agent(args: argparse.Namespace, cfg: Config, llm: LlmPort) -> AgentConfig:
    tools, registry = _load_tools(args.tools)
    return AgentConfig(
        instruction=_instruction(args.instruction),
        tools=tools,
        llm=llm,
        registry=registry,
        mode=args.mode or cfg.mode,
        max_iterations=args.max_iter or cfg.max_iterations,
        temperature=cfg.temperature,
    )


def _predict(records: list[dict[str, Any]], llm: LlmPort, cfg: Config, jobs: int) -> list[dict[str, Any]]:
    def one(item: tuple[int, dict[str, Any]]) -> dict[str, Any]:
        idx, rec = item
        raw = llm.complete("agent", [("user", rec["input"])], cfg.temperature)
        return {"id": str(idx), "raw": raw, "mode": rec.get("stage", "react")}

    items = list(enumerate(records, start=1))
    if jobs == 1:
        return [one(i) for i in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, items))


def cmd_run(args: argparse.Namespace, cfg: Config) -> int:
    llm = cfg.provider(args.provider)
    records = _read_jsonl(args.input)
    jobs = _jobs(args.jobs, llm)
    if args.predict:
        if any("input" not in r for r in records):
            raise InputError("--predict expects training-pair records with an 'input' field")
        _write_jsonl(_predict(records, llm, cfg, jobs), args.out)
        return EXIT_OK

    agent = _agent(args, cfg, llm)
    items = []
    for pos, rec in enumerate(records, start=1):
        turns = rec.get("turns") or ([rec["user"]] if "user" in rec else None)
        if not turns or not all(isinstance(t, str) for t in turns):
            raise InputError(f"record {pos} needs 'user' (string) or 'turns' (list of strings)")
        items.append((str(rec.get("id", pos)), turns))

    transcript_dir = Path(args.transcript) if args.transcript else None
    if transcript_dir:
        transcript_dir.mkdir(parents=True, exist_ok=True)

    def one(item: tuple[str, list[str]]) -> tuple[dict[str, Any], bool]:
        id_, turns = item
        transcript = Transcript()
        failed = False
        try:
            results = run_conversation(turns, agent, transcript)
            error = None
        except ConversationAborted as exc:
            results, error, failed = exc.results, exc.reason, True
        if transcript_dir:
            transcript.write(transcript_dir / f"{id_}.jsonl")
        return {"id": id_, "turns": [r.to_dict() for r in results], "error": error}, failed

    if jobs == 1:
        outcomes = [one(i) for i in items]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(one, items))
    _write_jsonl([o for o, _ in outcomes], args.out)
    return EXIT_RUNTIME if any(f for _, f in outcomes) else EXIT_OK


def cmd_chat(args: argparse.Namespace, cfg: Config) -> int:
    agent = _agent(args, cfg, cfg.provider(args.provider))
    transcript = Transcript()
    history: list[tuple[str, str]] = []
    turn = 0
    try:
        while True:
            try:
                line = input("You: ")
            except EOFError:
                break
            if line.strip() in ("/quit", "/exit"):
                break
            if not line.strip():
                continue
            turn += 1
            history.append(("user", line))
            bundle = PromptBundle(agent.instruction, agent.tools, tuple(history), mode=agent.mode)
            result = run_turn(
                bundle,
                agent.llm,
                agent.registry,
                agent.max_iterations,
                temperature=agent.temperature,
                transcript=transcript,
                turn=turn,
            )
            for call, obs in result.context.entries:
                print(f"  [{call.tool_name}] {obs.payload}")
            answer = result.final_answer or "(no response)"
            print(f"Agent: {answer}")
            history.append(("assistant", answer))
    finally:
        if args.transcript:
            transcript.write(args.transcript)
    return EXIT_OK


# --- evaluation -----------------------------------------------------------


def _similarity(args: argparse.Namespace, cfg: Config):
    if args.sim == "fallback":
        return tf_cosine
    if not cfg.similarity or not cfg.similarity.get("endpoint"):
        raise ConfigError("--sim endpoint needs a 'similarity' section with an endpoint in the config")
    return EmbeddingSimilarity(
        cfg.similarity["endpoint"], cfg.similarity.get("model", ""), cfg.similarity.get("auth_env")
    )


def cmd_eval_turn(args: argparse.Namespace, cfg: Config) -> int:
    preds, gts = _read_jsonl(args.pred), _read_jsonl(args.gt)
    try:
        report, judgments = evaluate_records(preds, gts, _similarity(args, cfg))
    except (KeyError, ValueError) as exc:
        if isinstance(exc, AlignmentError):
            raise InputError(f"misaligned files: {exc}") from None
        raise InputError(f"bad record: {exc}") from None
    if args.judgments:
        write_judgments(judgments, [str(g.get("id")) for g in gts], args.judgments)
    _emit_json(report.to_dict(), args.out)
    return EXIT_OK


def cmd_eval_e2e(args: argparse.Namespace, cfg: Config) -> int:
    try:
        use_case = load_use_case(args.use_case)
    except (OSError, ValueError, KeyError) as exc:
        raise InputError(f"cannot load use case {args.use_case}: {exc}") from None

    def port(ref: str | None, role: str) -> LlmPort:
        if ref:
            return cfg.provider(ref)
        fixture = use_case.scripted_fixture(role)
        if fixture is None:
            raise InputError(f"no --{role}-provider given and no scripted/{role}.json in the use case")
        return ScriptedLlm.from_file(fixture)

    agent_llm = port(args.agent_provider, "agent")
    user_llm = port(args.user_provider, "user")
    judge_llm = port(args.judge_provider, "judge")
    report = run_simulation(
        use_case,
        agent_llm,
        user_llm,
        judge_llm,
        args.runs if args.runs is not None else cfg.n_runs,
        mode=args.mode or cfg.mode,
        max_turns=args.max_turns,
        max_iterations=args.max_iter or cfg.max_iterations,
        artifacts_dir=args.artifacts,
        jobs=_jobs(args.jobs, agent_llm, user_llm, judge_llm),
    )
    _emit_json(report.to_dict(), args.out)
    return EXIT_OK


def cmd_graph(args: argparse.Namespace, cfg: Config) -> int:
    tools: tuple[ToolDefinition, ...] = ()
    if args.tools:
        tools, _ = _load_tools(args.tools)
    if args.action == "validate":
        try:
            text = Path(args.file).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(str(exc)) from None
        try:
            graph = parse_milestone_graph(text, [t.name for t in tools] if args.tools else None)
        except GraphError as exc:
            print(f"invalid graph: {exc}", file=sys.stderr)
            return EXIT_INPUT
        print(
            f"ok: {len(graph.milestones)} milestones, start={','.join(graph.start)}, end={graph.end}, "
            f"longest path {graph.longest_path_length()}"
        )
        return EXIT_OK

    if not args.provider:
        raise InputError("graph draft needs --provider")
    try:
        workflow = Path(args.file).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(str(exc)) from None
    draft = draft_milestone_graph(workflow, tools, cfg.provider(args.provider))
    if args.out:
        Path(args.out).write_text(draft.yaml_text, encoding="utf-8")
    else:
        sys.stdout.write(draft.yaml_text)
    report = {"schema_version": "1.0", "valid": draft.valid, "errors": list(draft.errors)}
    print(json.dumps(report), file=sys.stderr)
    return EXIT_OK


# --- wiring ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="preact", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="YAML config with providers and defaults")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="turn a conversation corpus into training pairs")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--stage", choices=["react", "preact"], default="react")
    p.add_argument("--gt", help="also write ground-truth next actions, one per pair")
    p.add_argument("--lenient", action="store_true", help="skip invalid records instead of failing")
    p.set_defaults(func=cmd_transform)

    def agent_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--provider", required=True, help="provider id from the config, or scripted:<fixture>")
        p.add_argument("--mode", choices=["react", "preact"])
        p.add_argument("--tools", help="tools.json with definitions and stub responses")
        p.add_argument("--instruction", help="file holding the agent instruction")
        p.add_argument("--max-iter", type=int)

    p = sub.add_parser("run", help="run the agent over a JSONL batch")
    p.add_argument("input")
    agent_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--transcript", help="directory for per-item transcript JSONL files")
    p.add_argument("--predict", action="store_true", help="one completion per training-pair input (Level-1)")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("chat", help="interactive session for debugging an agent")
    agent_flags(p)
    p.add_argument("--transcript", help="transcript JSONL file")
    p.set_defaults(func=cmd_chat)

    p = sub.add_parser("eval-turn", help="Level-1 metrics over aligned prediction/ground-truth files")
    p.add_argument("pred")
    p.add_argument("gt")
    p.add_argument("--sim", choices=["fallback", "endpoint"], default="fallback")
    p.add_argument("--out")
    p.add_argument("--judgments", help="per-turn judgment JSONL")
    p.set_defaults(func=cmd_eval_turn)

    p = sub.add_parser("eval-e2e", help="simulate conversations and score milestones")
    p.add_argument("use_case")
    p.add_argument("--runs", type=int)
    p.add_argument("--agent-provider")
    p.add_argument("--user-provider")
    p.add_argument("--judge-provider")
    p.add_argument("--mode", choices=["react", "preact"])
    p.add_argument("--max-iter", type=int)
    p.add_argument("--max-turns", type=int, default=30)
    p.add_argument("--artifacts", help="directory for per-run transcripts and judgments")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval_e2e)

    p = sub.add_parser("graph", help="validate or draft a milestone graph")
    p.add_argument("action", choices=["validate", "draft"])
    p.add_argument("file", help="milestones.yaml to validate, or workflow text to draft from")
    p.add_argument("--tools")
    p.add_argument("--provider")
    p.add_argument("--out")
    p.set_defaults(func=cmd_graph)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except (InputError, ConfigError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (TransportError, ConversationAborted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
