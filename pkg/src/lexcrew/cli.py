"""Command-line client: every subcommand is a thin wrapper over the core
package (or, for `ask --server`, over a running HTTP service)."""

from __future__ import annotations

import json
import sys

import click

from .bench import load_bank, load_report, merge_human_scores, run_benchmark, summary_csv
from .config import AppConfig
from .corpus import ChunkStrategy, load_document, read_chunks_jsonl, split_document, write_chunks_jsonl
from .engine import QaEngine
from .errors import LexcrewError
from .index import VectorIndex, build_index, search_topk


@click.group()
def main():
    """Q&A over article-structured labor legislation."""


def _load_config(path: str | None) -> AppConfig:
    return AppConfig.load(path)


def _engine(index_path: str, config_path: str | None, agents_index_path: str | None = None) -> QaEngine:
    cfg = _load_config(config_path)
    index = VectorIndex.load(index_path)
    agents_index = VectorIndex.load(agents_index_path) if agents_index_path else None
    return QaEngine(index, cfg.build_embedder(), cfg, agents_index=agents_index)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--strategy", type=click.Choice(["article", "window"]), default="article", show_default=True)
@click.option("--chunk-size", default=512, show_default=True)
@click.option("--overlap", default=256, show_default=True)
@click.option("--delimiter", default="Art.", show_default=True)
@click.option("--doc-id", default=None, help="Defaults to the input file stem.")
@click.option("--out", "out_path", required=True, type=click.Path())
def ingest(input_path, strategy, chunk_size, overlap, delimiter, doc_id, out_path):
    """Segment a statute text file into retrievable chunks (JSON Lines)."""
    doc = load_document(input_path, doc_id)
    chunks = split_document(
        doc,
        ChunkStrategy(strategy),
        chunk_size=chunk_size,
        overlap=overlap,
        delimiter=delimiter,
    )
    write_chunks_jsonl(chunks, out_path)
    click.echo(f"wrote {len(chunks)} chunks to {out_path}")


@main.group()
def index():
    """Build and query the vector index."""


@index.command("build")
@click.option("--chunks", "chunks_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_name", required=True, type=click.Path())
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
def index_build(chunks_path, out_name, config_path):
    """Embed chunks and persist <out>.idx.json / <out>.idx.f32."""
    cfg = _load_config(config_path)
    chunks = read_chunks_jsonl(chunks_path)
    idx = build_index(chunks, cfg.build_embedder())
    idx.save(out_name)
    click.echo(f"indexed {len(idx)} chunks (dim {idx.dim}) at {out_name}.idx.*")


@index.command("query")
@click.option("--index", "index_path", required=True, type=click.Path())
@click.option("--text", required=True)
@click.option("--k", default=20, show_default=True)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True, help="Emit hits as a JSON array.")
def index_query(index_path, text, k, config_path, as_json):
    """Top-k most similar chunks for a query."""
    cfg = _load_config(config_path)
    idx = VectorIndex.load(index_path)
    result = search_topk(idx, cfg.build_embedder().embed_query(text), k=k)
    if as_json:
        click.echo(json.dumps([{"chunk_id": h.chunk_id, "score": h.score} for h in result.hits], ensure_ascii=False))
        return
    for hit in result.hits:
        preview = " ".join(idx.text_of(hit.chunk_id).split())[:90]
        click.echo(f"{hit.score:+.4f}  {hit.chunk_id}  {preview}")


@main.command()
@click.option("--pipeline", type=click.Choice(["agents", "rag"]), default="agents", show_default=True)
@click.option("--index", "index_path", default=None, type=click.Path(), help="Run locally against this index.")
@click.option("--agents-index", "agents_index_path", default=None, type=click.Path(),
              help="Separate (e.g. window-chunked) index for the agents pipeline; defaults to --index.")
@click.option("--server", "server_url", default=None, help="POST to a running service instead.")
@click.option("--question", required=True)
@click.option("--model", "model_id", default=None)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True, help="Print the full run record as JSON.")
def ask(pipeline, index_path, agents_index_path, server_url, question, model_id, config_path, as_json):
    """Answer one question through the chosen pipeline."""
    if server_url:
        import httpx

        resp = httpx.post(
            server_url.rstrip("/") + "/api/ask",
            json={"question": question, "pipeline": pipeline, "model_id": model_id},
            timeout=120,
        )
        if resp.status_code not in (200, 422):
            raise click.ClickException(f"server returned {resp.status_code}: {resp.text[:300]}")
        body = resp.json()
        if as_json:
            run = httpx.get(server_url.rstrip("/") + f"/api/runs/{body['run_id']}", timeout=30)
            click.echo(json.dumps(run.json(), ensure_ascii=False, indent=2))
            return
        click.echo(body["answer"])
        for cited in body["cited_articles"]:
            click.echo(f"  [{cited['article_label']}] {cited['chunk_id']}")
        return
    if not index_path:
        raise click.ClickException("either --index or --server is required")
    engine = _engine(index_path, config_path, agents_index_path)
    run = engine.ask(question, pipeline=pipeline, model_id=model_id)
    if as_json:
        click.echo(json.dumps(run.to_dict(), ensure_ascii=False, indent=2))
        return
    click.echo(run.final_answer)
    for chunk_id in run.cited_articles:
        click.echo(f"  [cited] {chunk_id}")
    if run.outcome.value == "Failed":
        raise click.ClickException(run.error or "pipeline failed")


@main.group()
def bench():
    """Benchmark the pipelines over a question bank."""


@bench.command("run")
@click.option("--bank", "bank_path", required=True, type=click.Path(exists=True))
@click.option("--pipelines", default="agents,rag", show_default=True)
@click.option("--models", default=None, help="Comma-separated model ids; defaults to the configured default.")
@click.option("--index", "index_path", required=True, type=click.Path())
@click.option("--agents-index", "agents_index_path", default=None, type=click.Path(),
              help="Separate index for the agents pipeline; defaults to --index.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--parallelism", default=4, show_default=True)
@click.option("--run-id", default=None)
def bench_run(bank_path, pipelines, models, index_path, agents_index_path, out_dir, config_path, parallelism, run_id):
    """Execute every (question, pipeline, model) cell and persist a report."""
    engine = _engine(index_path, config_path, agents_index_path)
    bank = load_bank(bank_path)
    model_list = models.split(",") if models else [engine.config.resolve_model(None)]
    report = run_benchmark(
        bank,
        engine,
        pipelines.split(","),
        model_list,
        out_dir,
        run_id=run_id,
        parallelism=parallelism,
    )
    click.echo(f"run {report.run_id}: {len(report.records)} records, {len(report.failures)} failures -> {out_dir}")


@bench.command("merge-human")
@click.option("--run", "run_dir", required=True, type=click.Path(exists=True))
@click.option("--scores", "scores_path", required=True, type=click.Path(exists=True))
def bench_merge_human(run_dir, scores_path):
    """Merge expert precision/quality scores into a persisted run."""
    report = merge_human_scores(run_dir, scores_path)
    click.echo(f"merged subjective scores into {len(report.records)} records")


@bench.command("report")
@click.option("--run", "run_dir", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
def bench_report(run_dir, fmt):
    """Print the per-cell summary statistics."""
    report = load_report(run_dir)
    if fmt == "csv":
        click.echo(summary_csv(report), nl=False)
    else:
        click.echo(json.dumps(report.summary, ensure_ascii=False, indent=2))


@main.command()
@click.option("--index", "index_path", default=None, type=click.Path())
@click.option("--agents-index", "agents_index_path", default=None, type=click.Path(),
              help="Separate index for the agents pipeline; defaults to --index.")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=None, type=int, help="Defaults to the configured port (8080).")
@click.option("--static-dir", default=None, type=click.Path(), help="Serve a built UI from this directory.")
def serve(index_path, agents_index_path, config_path, host, port, static_dir):
    """Start the HTTP service (degraded mode when no index is given)."""
    import uvicorn

    from .service import create_app

    cfg = _load_config(config_path)
    engine = None
    if index_path:
        engine = _engine(index_path, config_path, agents_index_path)
    app = create_app(
        engine,
        cors_origins=cfg.server.get("cors_origins"),
        static_dir=static_dir or cfg.server.get("static_dir"),
    )
    uvicorn.run(app, host=host, port=port or int(cfg.server.get("port", 8080)))


def entrypoint():
    try:
        main(standalone_mode=True)
    except LexcrewError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    entrypoint()
