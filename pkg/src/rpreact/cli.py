"""Operator surface: run benchmarks, replay scripted fixtures, build reports.

Configuration comes from one JSON document mirroring RunConfig; every
field can be overridden by a flag, and flags win. Exit status is 0 unless
a config or backend-level error occurs; wrong answers are still exit 0.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from rpreact import evaluation, orchestrator
from rpreact.evaluation import RunRecord, read_records_jsonl, rows_from_accuracy_table
from rpreact.llm_backend import (
    Backend,
    BackendError,
    HttpBackend,
    ScriptedBackend,
    ScriptedTranscript,
    TranscriptMiss,
)
from rpreact.orchestrator import AgentConfig, run_approach, trajectory_step_dicts
from rpreact.toolkit import DataPaths, ToolEnvironment
from rpreact.toolkit.codeexec import SubprocessCodeWorker

ALL_DOMAINS = ("flights", "coffee", "airbnb", "yelp", "scirex", "agenda")


@dataclass
class RunConfig:
    approach: str = orchestrator.RP_REACT
    endpoint: str = ""
    model: str = "scripted"
    api_key_env: str = "RPREACT_API_KEY"
    domains: list[str] = field(default_factory=lambda: list(ALL_DOMAINS))
    difficulty: str = "both"
    limit: int | None = None
    rpa_search_limit: int = 10
    pea_step_limit: int = 10
    react_step_limit: int = 20
    max_reflections: int = 3
    temperature: float = 0.6
    top_p: float = 1.0
    threshold_t: int = 100
    seed: int | None = None
    out: str = "out"
    concurrency: int = 1
    scripted: str | None = None
    dataset: str = ""
    tables: dict[str, str] = field(default_factory=dict)
    graphs: dict[str, str] = field(default_factory=dict)
    corpora: dict[str, str] = field(default_factory=dict)
    worker_cmd: list[str] | None = None

    @classmethod
    def from_json(cls, path: str | Path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    def agent_config(self) -> AgentConfig:
        return AgentConfig(
            approach=self.approach,
            rpa_search_limit=self.rpa_search_limit,
            pea_step_limit=self.pea_step_limit,
            react_step_limit=self.react_step_limit,
            max_reflections=self.max_reflections,
            temperature=self.temperature,
            top_p=self.top_p,
            context_threshold_t=self.threshold_t,
        )

    def data_paths(self) -> DataPaths:
        return DataPaths(
            tables={k: Path(v) for k, v in self.tables.items()},
            graphs={k: Path(v) for k, v in self.graphs.items()},
            corpora={k: Path(v) for k, v in self.corpora.items()},
        )

    def validate_paths(self) -> None:
        if not self.dataset or not Path(self.dataset).exists():
            raise FileNotFoundError(f"dataset path missing: {self.dataset!r}")
        if self.scripted and not Path(self.scripted).exists():
            raise FileNotFoundError(f"scripted transcript missing: {self.scripted!r}")
        self.data_paths().validate()


def _load_dataset(path: str | Path) -> list[dict]:
    questions = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                questions.append(json.loads(line))
    return questions


def _load_scripted(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _backend_for(config: RunConfig, scripted_doc: dict | None, qid: str) -> Backend:
    if scripted_doc is not None:
        transcripts = scripted_doc.get("transcripts", {})
        turns = transcripts.get(qid) or transcripts.get("*") or {}
        transcript = ScriptedTranscript.from_role_lists(
            turns,
            strict=bool(scripted_doc.get("strict", True)),
            defaults=scripted_doc.get("defaults", {}),
        )
        return ScriptedBackend(transcript)
    if not config.endpoint:
        raise BackendError("no endpoint configured and no scripted transcript given")
    return HttpBackend(config.endpoint, config.model, api_key_env=config.api_key_env)


def _run_one(
    question: dict,
    config: RunConfig,
    agent_config: AgentConfig,
    scripted_doc: dict | None,
) -> tuple[orchestrator.Trajectory, RunRecord]:
    worker = None
    if config.worker_cmd:
        worker = SubprocessCodeWorker(config.worker_cmd)
    environment = ToolEnvironment(config.data_paths(), worker=worker)
    backend = _backend_for(config, scripted_doc, question["qid"])
    try:
        trajectory = run_approach(
            question["question"],
            agent_config,
            environment,
            backend,
            qid=question["qid"],
            domain=question.get("domain"),
        )
    finally:
        if worker is not None:
            worker.close()
    predicted = trajectory.final_answer or ""
    record = RunRecord(
        qid=question["qid"],
        approach=config.approach,
        model=config.model,
        domain=question.get("domain", ""),
        difficulty=question.get("difficulty", ""),
        predicted=predicted,
        gold=question.get("answer", ""),
        correct=evaluation.is_correct(predicted, question.get("answer", "")),
        steps_used=len(trajectory.steps),
        termination=trajectory.termination or "",
    )
    return trajectory, record


def cmd_run(config: RunConfig) -> int:
    config.validate_paths()
    agent_config = config.agent_config()
    scripted_doc = _load_scripted(config.scripted) if config.scripted else None
    questions = _load_dataset(config.dataset)
    questions = [q for q in questions if q.get("domain") in config.domains]
    if config.difficulty != "both":
        questions = [q for q in questions if q.get("difficulty") == config.difficulty]
    if config.seed is not None:
        random.Random(config.seed).shuffle(questions)
    if config.limit is not None:
        questions = questions[: config.limit]

    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    results: dict[str, tuple[orchestrator.Trajectory, RunRecord]] = {}
    failures: dict[str, str] = {}
    lock = threading.Lock()

    def work(question: dict) -> None:
        try:
            trajectory, record = _run_one(question, config, agent_config, scripted_doc)
            with lock:
                results[question["qid"]] = (trajectory, record)
        except Exception as exc:
            with lock:
                failures[question["qid"]] = f"{type(exc).__name__}: {exc}"

    if config.concurrency > 1:
        with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
            list(pool.map(work, questions))
    else:
        for question in questions:
            work(question)

    # single writer keeps the log humanly ordered regardless of concurrency
    with open(out_dir / "steps.jsonl", "w", encoding="utf-8") as steps_fh, open(
        out_dir / "records.jsonl", "w", encoding="utf-8"
    ) as records_fh:
        for question in questions:
            qid = question["qid"]
            if qid not in results:
                continue
            trajectory, record = results[qid]
            for step in trajectory_step_dicts(trajectory):
                steps_fh.write(json.dumps(step) + "\n")
            records_fh.write(json.dumps(evaluation.record_to_dict(record)) + "\n")

    per_domain: dict[str, list[RunRecord]] = {}
    for _, record in results.values():
        per_domain.setdefault(record.domain, []).append(record)
    for domain in sorted(per_domain):
        records = per_domain[domain]
        correct = sum(1 for r in records if r.correct)
        print(f"{domain}: {correct}/{len(records)} correct")
    for qid, error in sorted(failures.items()):
        print(f"failed {qid}: {error}", file=sys.stderr)
    # individual failures are recorded, not fatal; an unreachable backend
    # (no trajectory survived) is
    all_backend_error = bool(results) and all(
        record.termination == "backend_error" for _, record in results.values()
    )
    if failures or all_backend_error:
        return 1
    return 0


def cmd_report(
    record_paths: list[Path] | None,
    accuracies_path: Path | None,
    out_dir: Path,
) -> int:
    if accuracies_path is not None:
        with open(accuracies_path, encoding="utf-8") as fh:
            fixture = json.load(fh)
        rows = rows_from_accuracy_table(
            fixture["accuracy"],
            approaches=fixture.get("approaches_core"),
            models=fixture.get("models_core"),
        )
    else:
        records, skipped = read_records_jsonl(record_paths or [])
        if skipped:
            print(f"warning: skipped {skipped} corrupt log lines", file=sys.stderr)
        rows = evaluation.aggregate_records(records)
    written = evaluation.write_reports(rows, out_dir)
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_replay(config: RunConfig, qid: str) -> int:
    config.validate_paths()
    if not config.scripted:
        print("replay requires --scripted", file=sys.stderr)
        return 2
    scripted_doc = _load_scripted(config.scripted)
    scripted_doc["strict"] = True
    questions = [q for q in _load_dataset(config.dataset) if q["qid"] == qid]
    if not questions:
        print(f"qid not in dataset: {qid}", file=sys.stderr)
        return 2
    try:
        trajectory, record = _run_one(questions[0], config, config.agent_config(), scripted_doc)
    except TranscriptMiss as exc:
        print(f"transcript does not cover trajectory: {exc}", file=sys.stderr)
        return 2
    if trajectory.termination == orchestrator.BACKEND_ERROR:
        print(f"transcript does not cover trajectory: {trajectory.error}", file=sys.stderr)
        return 2
    for step in trajectory_step_dicts(trajectory):
        print(json.dumps(step))
    print(
        f"{qid}: termination={trajectory.termination} predicted={record.predicted!r} "
        f"correct={record.correct}"
    )
    return 0


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file mirroring RunConfig")
    parser.add_argument("--approach", choices=list(orchestrator.APPROACHES))
    parser.add_argument("--model")
    parser.add_argument("--endpoint")
    parser.add_argument("--domains", help="comma-separated subset")
    parser.add_argument("--difficulty", choices=["easy", "hard", "both"])
    parser.add_argument("--limit", type=int)
    parser.add_argument("--rpa-search-limit", type=int, dest="rpa_search_limit")
    parser.add_argument("--pea-step-limit", type=int, dest="pea_step_limit")
    parser.add_argument("--react-step-limit", type=int, dest="react_step_limit")
    parser.add_argument("--max-reflections", type=int, dest="max_reflections")
    parser.add_argument("--threshold-t", type=int, dest="threshold_t")
    parser.add_argument("--temperature", type=float)
    parser.add_argument("--top-p", type=float, dest="top_p")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out")
    parser.add_argument("--concurrency", type=int)
    parser.add_argument("--scripted", help="scripted transcript JSON for replayable runs")
    parser.add_argument("--dataset")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.from_json(args.config) if args.config else RunConfig()
    overrides = [
        "approach", "model", "endpoint", "difficulty", "limit",
        "rpa_search_limit", "pea_step_limit", "react_step_limit",
        "max_reflections", "threshold_t", "temperature", "top_p",
        "seed", "out", "concurrency", "scripted", "dataset",
    ]
    for name in overrides:
        value = getattr(args, name, None)
        if value is not None:
            setattr(config, name, value)
    if getattr(args, "domains", None):
        config.domains = [d.strip() for d in args.domains.split(",") if d.strip()]
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rpreact")
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="execute trajectories over a dataset")
    _add_run_flags(run_parser)

    report_parser = sub.add_parser("report", help="build metric reports")
    report_parser.add_argument("--records", nargs="*", help="RunRecord JSONL files")
    report_parser.add_argument("--accuracies", help="accuracy fixture JSON")
    report_parser.add_argument("--out", default="results")

    replay_parser = sub.add_parser("replay", help="re-execute one scripted trajectory")
    _add_run_flags(replay_parser)
    replay_parser.add_argument("--qid", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(_config_from_args(args))
        if args.command == "report":
            record_paths = [Path(p) for p in args.records] if args.records else None
            accuracies = Path(args.accuracies) if args.accuracies else None
            if record_paths is None and accuracies is None:
                print("report needs --records or --accuracies", file=sys.stderr)
                return 2
            return cmd_report(record_paths, accuracies, Path(args.out))
        if args.command == "replay":
            return cmd_replay(_config_from_args(args), args.qid)
    except (FileNotFoundError, ValueError, BackendError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
