"""Benchmark harness: replay a question bank through the pipelines and
models, score every answer, and persist a resumable report.

Layout under the run directory:
    config.json        run configuration snapshot (has timestamps)
    records.jsonl      scored EvalRecords, canonical order, no timestamps
    failures.jsonl     cells whose pipeline run failed
    summary.json       ScoreStats per (metric, pipeline, model)
    plots/<metric>.csv one row per record, box-plot ready
    transcripts.jsonl  every LLM call, tagged with its cell
    records.partial.jsonl  append-only progress log for resuming
"""

from __future__ import annotations

import csv
import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .agents import Outcome
from .errors import BenchAbortedError, EmptyBankError, OutOfRangeError, UnknownKeyError
from .evalkit import (
    METRIC_NAMES,
    EvalRecord,
    answer_correctness,
    bleu,
    check_score,
    describe_stats,
)
from .llm import ChatClient

CellKey = tuple[str, str, str]  # (question_id, pipeline, model)


@dataclass(frozen=True)
class QaItem:
    question_id: str
    question: str
    ground_truth: str
    topic_tags: tuple[str, ...] = ()
    source_refs: tuple[str, ...] = ()


def load_bank(path: str | Path) -> list[QaItem]:
    items = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            d = json.loads(line)
            items.append(
                QaItem(
                    question_id=d["question_id"],
                    question=d["question"],
                    ground_truth=d["ground_truth"],
                    topic_tags=tuple(d.get("topic_tags", [])),
                    source_refs=tuple(d.get("source_refs", [])),
                )
            )
    if not items:
        raise EmptyBankError(f"no questions in {path}")
    ids = [i.question_id for i in items]
    if len(set(ids)) != len(ids):
        raise EmptyBankError("duplicate question_id in bank")
    for item in items:
        if not item.ground_truth.strip():
            raise EmptyBankError(f"{item.question_id}: empty ground truth")
    return items


@dataclass
class BenchmarkReport:
    run_id: str
    config: dict
    records: list[EvalRecord]
    failures: list[dict]
    summary: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    def record_by_key(self, key: CellKey) -> EvalRecord | None:
        for rec in self.records:
            if rec.key() == key:
                return rec
        return None


def _atomic_write(path: Path, data: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(data, encoding="utf-8")
    tmp.replace(path)


def _record_line(rec: EvalRecord) -> str:
    return json.dumps(rec.to_dict(), ensure_ascii=False, sort_keys=True)


def summarize(records: list[EvalRecord]) -> dict:
    """ScoreStats per (metric, pipeline, model) cell with >= 2 scores."""
    cells: dict[tuple[str, str, str], list[float]] = {}
    for rec in records:
        for metric, value in rec.scores.items():
            cells.setdefault((metric, rec.pipeline, rec.model_id), []).append(value)
    out = []
    for (metric, pipeline, model), scores in sorted(cells.items()):
        entry = {"metric": metric, "pipeline": pipeline, "model": model, "n": len(scores)}
        if len(scores) >= 2:
            entry["stats"] = describe_stats(scores).to_dict()
        out.append(entry)
    return {"cells": out}


class BenchmarkRunner:
    def __init__(
        self,
        engine,
        out_dir: str | Path,
        run_id: str | None = None,
        parallelism: int = 4,
        judge_model: str | None = None,
    ):
        self.engine = engine
        self.out_dir = Path(out_dir)
        self.run_id = run_id or self.out_dir.name
        self.parallelism = max(1, parallelism)
        self.judge_model = judge_model or engine.config.judge_model
        self._lock = threading.Lock()

    # resuming ------------------------------------------------------------

    def _load_done(self) -> tuple[dict[CellKey, EvalRecord], dict[CellKey, dict]]:
        records: dict[CellKey, EvalRecord] = {}
        failures: dict[CellKey, dict] = {}
        final = self.out_dir / "records.jsonl"
        if final.exists():
            for line in final.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    rec = EvalRecord.from_dict(json.loads(line))
                    records[rec.key()] = rec
        final_failures = self.out_dir / "failures.jsonl"
        if final_failures.exists():
            for line in final_failures.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    d = json.loads(line)
                    failures[(d["question_id"], d["pipeline"], d["model_id"])] = d
        partial = self.out_dir / "records.partial.jsonl"
        if partial.exists():
            for line in partial.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                try:
                    entry = json.loads(line)
                except json.JSONDecodeError:
                    continue  # torn write from an interrupted run
                if entry["kind"] == "record":
                    rec = EvalRecord.from_dict(entry["data"])
                    records[rec.key()] = rec
                else:
                    d = entry["data"]
                    failures[(d["question_id"], d["pipeline"], d["model_id"])] = d
        return records, failures

    def _append_partial(self, kind: str, data: dict) -> None:
        line = json.dumps({"kind": kind, "data": data}, ensure_ascii=False, sort_keys=True)
        with self._lock:
            with open(self.out_dir / "records.partial.jsonl", "a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    # scoring ---------------------------------------------------------------

    def _score_cell(self, item: QaItem, pipeline: str, model: str, transcripts: list) -> EvalRecord | dict:
        run = self.engine.ask(item.question, pipeline=pipeline, model_id=model)
        cell = {"question_id": item.question_id, "pipeline": pipeline, "model_id": model}
        with self._lock:
            for entry in run.transcript:
                transcripts.append({**cell, **entry.to_dict()})
        if run.outcome is Outcome.FAILED:
            return {**cell, "error": run.error or "pipeline failed"}
        candidate = run.final_answer
        judge_backend, judge_cfg = self.engine.config.build_backend(self.judge_model)
        judge = ChatClient(judge_backend, judge_cfg)
        weights = self.engine.config.correctness
        report = answer_correctness(
            candidate,
            item.ground_truth,
            self.engine.embedder,
            judge,
            w_factual=float(weights.get("w_factual", 0.75)),
            w_semantic=float(weights.get("w_semantic", 0.25)),
        )
        with self._lock:
            for entry in judge.transcript:
                transcripts.append({**cell, **entry.to_dict()})
        scores = {
            "bleu": bleu(candidate, [item.ground_truth]),
            "answer_similarity": report.similarity,
            "answer_correctness": report.score,
        }
        return EvalRecord(
            question_id=item.question_id,
            question=item.question,
            ground_truth=item.ground_truth,
            candidate=candidate,
            pipeline=pipeline,
            model_id=model,
            scores=scores,
            details={
                "outcome": run.outcome.value,
                "cited_articles": run.cited_articles,
                "factual": report.breakdown.to_dict(),
            },
        )

    # main loop ----------------------------------------------------------------

    def run(self, bank: list[QaItem], pipelines: list[str], models: list[str]) -> BenchmarkReport:
        if not bank:
            raise EmptyBankError("empty question bank")
        started = time.time()
        self.out_dir.mkdir(parents=True, exist_ok=True)
        (self.out_dir / "plots").mkdir(exist_ok=True)
        records, failures = self._load_done()
        cells: list[tuple[QaItem, str, str]] = [
            (item, pipeline, model) for item in bank for pipeline in pipelines for model in models
        ]
        total = len(cells)
        pending = [c for c in cells if (c[0].question_id, c[1], c[2]) not in records
                   and (c[0].question_id, c[1], c[2]) not in failures]
        transcripts: list[dict] = []

        def execute(cell):
            item, pipeline, model = cell
            try:
                outcome = self._score_cell(item, pipeline, model, transcripts)
            except Exception as exc:  # per-cell isolation; interrupts still propagate
                outcome = {
                    "question_id": item.question_id,
                    "pipeline": pipeline,
                    "model_id": model,
                    "error": f"{type(exc).__name__}: {exc}",
                }
            key = (item.question_id, pipeline, model)
            if isinstance(outcome, EvalRecord):
                records[key] = outcome
                self._append_partial("record", outcome.to_dict())
            else:
                failures[key] = outcome
                self._append_partial("failure", outcome)
            if len(failures) * 2 > total:
                raise BenchAbortedError(
                    f"{len(failures)}/{total} cells failed; first errors: "
                    + "; ".join(f["error"] for f in list(failures.values())[:3])
                )

        if self.parallelism == 1:
            for cell in pending:
                execute(cell)
        else:
            with ThreadPoolExecutor(max_workers=self.parallelism) as pool:
                for future in [pool.submit(execute, c) for c in pending]:
                    future.result()

        report = BenchmarkReport(
            run_id=self.run_id,
            config={
                "run_id": self.run_id,
                "pipelines": list(pipelines),
                "models": list(models),
                "judge_model": self.judge_model,
                "questions": [i.question_id for i in bank],
                "retrieval_k": getattr(self.engine, "k", None),
                "started_at": started,
                "finished_at": time.time(),
            },
            records=[records[k] for k in sorted(records)],
            failures=[failures[k] for k in sorted(failures)],
            timing={"wall_seconds": time.time() - started},
        )
        report.summary = summarize(report.records)
        self._persist(report, transcripts)
        return report

    def _persist(self, report: BenchmarkReport, transcripts: list[dict]) -> None:
        out = self.out_dir
        _atomic_write(out / "records.jsonl", "".join(_record_line(r) + "\n" for r in report.records))
        _atomic_write(
            out / "failures.jsonl",
            "".join(json.dumps(f, ensure_ascii=False, sort_keys=True) + "\n" for f in report.failures),
        )
        _atomic_write(out / "config.json", json.dumps(report.config, ensure_ascii=False, indent=2))
        _atomic_write(
            out / "summary.json",
            json.dumps({**report.summary, "run_id": report.run_id,
                        "records": len(report.records), "failures": len(report.failures),
                        "timing": report.timing}, ensure_ascii=False, indent=2),
        )
        if transcripts:
            with open(out / "transcripts.jsonl", "a", encoding="utf-8") as fh:
                for entry in transcripts:
                    fh.write(json.dumps(entry, ensure_ascii=False, sort_keys=True) + "\n")
        write_plots(self.out_dir, report.records)


def write_plots(out_dir: str | Path, records: list[EvalRecord]) -> None:
    """One CSV per metric, one row per record carrying it."""
    plots = Path(out_dir) / "plots"
    plots.mkdir(parents=True, exist_ok=True)
    for metric in METRIC_NAMES:
        rows = [
            (r.question_id, r.pipeline, r.model_id, repr(r.scores[metric]))
            for r in records
            if metric in r.scores
        ]
        if not rows:
            continue
        lines = ["question_id,pipeline,model,score"]
        lines += [",".join(row) for row in sorted(rows)]
        _atomic_write(plots / f"{metric}.csv", "\n".join(lines) + "\n")


def run_benchmark(
    bank: list[QaItem],
    engine,
    pipelines: list[str],
    models: list[str],
    out_dir: str | Path,
    run_id: str | None = None,
    parallelism: int = 4,
    judge_model: str | None = None,
) -> BenchmarkReport:
    runner = BenchmarkRunner(engine, out_dir, run_id=run_id, parallelism=parallelism, judge_model=judge_model)
    return runner.run(bank, pipelines, models)


# human scores ----------------------------------------------------------------


def load_report(run_dir: str | Path) -> BenchmarkReport:
    run_dir = Path(run_dir)
    records = []
    for line in (run_dir / "records.jsonl").read_text(encoding="utf-8").splitlines():
        if line.strip():
            records.append(EvalRecord.from_dict(json.loads(line)))
    failures = []
    failures_path = run_dir / "failures.jsonl"
    if failures_path.exists():
        for line in failures_path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                failures.append(json.loads(line))
    config = {}
    config_path = run_dir / "config.json"
    if config_path.exists():
        config = json.loads(config_path.read_text(encoding="utf-8"))
    summary = {}
    summary_path = run_dir / "summary.json"
    if summary_path.exists():
        summary = json.loads(summary_path.read_text(encoding="utf-8"))
    return BenchmarkReport(
        run_id=config.get("run_id", run_dir.name),
        config=config,
        records=records,
        failures=failures,
        summary=summary,
    )


def merge_human_scores(run_dir: str | Path, scores_file: str | Path, average_raters: bool = True) -> BenchmarkReport:
    """Fold the expert precision/quality CSV into a persisted run.

    CSV header: question_id,pipeline,model,precision,quality. Several rows
    for one (question, pipeline, model) key are treated as distinct raters
    and averaged when average_raters is set.
    """
    run_dir = Path(run_dir)
    report = load_report(run_dir)
    by_key = {rec.key(): rec for rec in report.records}
    staged: dict[CellKey, list[tuple[float, float]]] = {}

    with open(scores_file, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"question_id", "pipeline", "model", "precision", "quality"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise UnknownKeyError(f"scores file must have columns {sorted(required)}")
        for row_number, row in enumerate(reader, start=2):
            key = (row["question_id"], row["pipeline"], row["model"])
            if key not in by_key:
                raise UnknownKeyError(f"line {row_number}: no record for {key}")
            try:
                precision = float(row["precision"])
                quality = float(row["quality"])
            except ValueError as exc:
                raise OutOfRangeError(f"line {row_number}: {exc}") from exc
            for name, value in (("subj_precision", precision), ("subj_quality", quality)):
                check_score(name, value)
            staged.setdefault(key, []).append((precision, quality))

    for key, values in staged.items():
        if len(values) > 1 and not average_raters:
            raise UnknownKeyError(f"duplicate rows for {key} with rater averaging disabled")
        precision = sum(v[0] for v in values) / len(values)
        quality = sum(v[1] for v in values) / len(values)
        by_key[key].scores["subj_precision"] = precision
        by_key[key].scores["subj_quality"] = quality

    report.summary = summarize(report.records)
    _atomic_write(run_dir / "records.jsonl", "".join(_record_line(r) + "\n" for r in report.records))
    summary_payload = {**report.summary, "run_id": report.run_id,
                       "records": len(report.records), "failures": len(report.failures)}
    _atomic_write(run_dir / "summary.json", json.dumps(summary_payload, ensure_ascii=False, indent=2))
    write_plots(run_dir, report.records)
    return report


def summary_csv(report: BenchmarkReport) -> str:
    """Flatten the summary to CSV (one row per metric x pipeline x model)."""
    fields = ["metric", "pipeline", "model", "n", "mean", "median", "std", "var", "min", "max", "range", "cv_percent"]
    lines = [",".join(fields)]
    for cell in report.summary.get("cells", []):
        stats = cell.get("stats", {})
        row = [str(cell["metric"]), str(cell["pipeline"]), str(cell["model"]), str(cell["n"])]
        row += ["" if stats.get(f) is None else repr(stats[f]) for f in fields[4:]]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
