"""Command-line interface.

Thin wrappers over the core package: build commands (ingest, relations,
dump) produce the store offline; query/qa/bench commands load it through
the same AppContext the HTTP service uses. Exit codes: 0 success, 1 user
error, 2 internal error. ``--json`` keeps all output machine-parseable.
"""

from __future__ import annotations

import json
import sys

import click

from ..errors import ChronomapError, ConfigError, DumpParseError, IngestError, QuerySyntaxError
from ..evalkit import (
    OutcomeLog,
    build_report,
    generate_benchmark,
    load_benchmark,
    render_report,
    run_benchmark,
    save_benchmark,
    save_report,
)
from ..kgstore import Store
from ..qapipeline import answer_descriptive, answer_factual
from ..query import evaluate, parse, to_results_json, validate_against_schema
from .config import AppConfig
from .context import AppContext, build_store_from_config, load_or_build_store, make_gateways

USER_ERRORS = (ConfigError, IngestError, QuerySyntaxError, DumpParseError, click.UsageError)


@click.group(name="chronomap")
@click.option(
    "--config",
    "config_path",
    envvar="CHRONOMAP_CONFIG",
    type=str,
    required=True,
    help="Path to the application config JSON.",
)
@click.pass_context
def cli(ctx: click.Context, config_path: str):
    """Spatio-temporal map QA: build the store, query it, run QA and benchmarks."""
    ctx.obj = {"config_path": config_path}


def _config(ctx: click.Context) -> AppConfig:
    return AppConfig.load(ctx.obj["config_path"])


def _context(ctx: click.Context) -> AppContext:
    return AppContext.from_config(_config(ctx))


@cli.command()
@click.option("--out", "out_path", type=str, default=None, help="Dump path (default: data.store_dump).")
@click.pass_context
def ingest(ctx: click.Context, out_path: str | None):
    """Ingest feature files into property triples and dump the store."""
    cfg = _config(ctx)
    out_path = out_path or cfg.store_dump
    if not out_path:
        raise ConfigError("no output path: pass --out or set data.store_dump")
    store = build_store_from_config(cfg, with_relations=False)
    store.seal()
    store.dump(out_path)
    click.echo(f"ingested {len(store)} triples -> {out_path}")


@cli.command()
@click.option("--out", "out_path", type=str, default=None, help="Dump path (default: data.store_dump).")
@click.pass_context
def relations(ctx: click.Context, out_path: str | None):
    """Precompute spatial and temporal relation edges into the store dump."""
    from ..relations import precompute

    cfg = _config(ctx)
    out_path = out_path or cfg.store_dump
    if not out_path:
        raise ConfigError("no output path: pass --out or set data.store_dump")
    from pathlib import Path

    if Path(out_path).exists():
        store = Store.load(out_path)
    else:
        store = build_store_from_config(cfg, with_relations=False)
    added = precompute(store, cfg.relations, provenance_path=cfg.provenance)
    store.seal()
    store.dump(out_path)
    click.echo(f"materialized {added} relation triples -> {out_path}")


@cli.command()
@click.option("--out", "out_path", type=str, default="-", help="Output file, or - for stdout.")
@click.pass_context
def dump(ctx: click.Context, out_path: str):
    """Write the built store as N-Triples."""
    import tempfile
    from pathlib import Path

    store = load_or_build_store(_config(ctx))
    if out_path == "-":
        with tempfile.TemporaryDirectory() as tmp:
            target = Path(tmp) / "store.nt"
            store.dump(target)
            click.echo(target.read_text(encoding="utf-8"), nl=False)
    else:
        store.dump(out_path)
        click.echo(f"dumped {len(store)} triples -> {out_path}")


@cli.command()
@click.argument("source", type=str)
@click.option("--json", "as_json", is_flag=True, help="Print SPARQL 1.1 JSON results.")
@click.pass_context
def query(ctx: click.Context, source: str, as_json: bool):
    """Evaluate a query from a file or stdin (-)."""
    app = _context(ctx)
    text = sys.stdin.read() if source == "-" else open(source, encoding="utf-8").read()
    parsed = parse(text)
    violations = validate_against_schema(parsed, app.store.schema)
    if violations:
        raise QuerySyntaxError("; ".join(violations), 1, 1)
    result = evaluate(parsed, app.store)
    if as_json:
        click.echo(json.dumps(to_results_json(result, app.store), indent=2, sort_keys=True))
    elif isinstance(result, bool):
        click.echo("true" if result else "false")
    else:
        click.echo("\t".join(result.variables))
        for row in result.rows:
            click.echo("\t".join("" if t is None else str(t.value) for t in row))


@cli.group()
def qa():
    """Question answering."""


@qa.command()
@click.argument("question", type=str)
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def factual(ctx: click.Context, question: str, as_json: bool):
    """Answer a factual question."""
    app = _context(ctx)
    result = answer_factual(question, app.bundle, app.gateways, app.store, app.config.qa)
    if as_json:
        click.echo(json.dumps(result.to_dict(app.store), indent=2, sort_keys=True))
    else:
        click.echo(result.answer_text if result.delivered else f"failed at {result.failed_stage}: {result.failure_reason}")
    if not result.delivered:
        sys.exit(1)


@qa.command()
@click.argument("question", type=str)
@click.option("--map-image", is_flag=True)
@click.option("--search", is_flag=True)
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def descriptive(ctx: click.Context, question: str, map_image: bool, search: bool, as_json: bool):
    """Answer a descriptive question."""
    app = _context(ctx)
    result = answer_descriptive(
        question,
        app.bundle,
        app.gateways,
        app.store,
        app.config.qa,
        use_map_image=map_image,
        use_search=search,
    )
    if as_json:
        click.echo(json.dumps(result.to_dict(app.store), indent=2, sort_keys=True))
    else:
        click.echo(result.answer_text if result.delivered else f"failed at {result.failed_stage}: {result.failure_reason}")
    if not result.delivered:
        sys.exit(1)


@cli.group()
def bench():
    """Benchmark generation, execution, and reporting."""


@bench.command()
@click.option("--out", "out_path", type=str, required=True)
@click.option("--yesno", type=int, default=45, show_default=True)
@click.option("--numeric", type=int, default=45, show_default=True)
@click.option("--overview", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--paraphrase", is_flag=True, help="Paraphrase question surfaces via the composer gateway.")
@click.pass_context
def generate(ctx: click.Context, out_path: str, yesno: int, numeric: int, overview: int, seed: int, paraphrase: bool):
    """Generate a benchmark file from the store."""
    app = _context(ctx)
    gateway = app.gateways.composer if paraphrase else None
    items, warnings = generate_benchmark(
        app.store,
        {"yesno": yesno, "numeric": numeric, "overview": overview},
        gateway=gateway,
        seed=seed,
    )
    save_benchmark(items, out_path)
    for warning in warnings:
        click.echo(f"warning: {warning}", err=True)
    click.echo(f"wrote {len(items)} items -> {out_path}")


@bench.command()
@click.option("--items", "items_path", type=str, required=True)
@click.option("--out", "out_path", type=str, required=True, help="Outcome log (JSON lines).")
@click.option("--report", "report_path", type=str, default=None)
@click.option("--no-sparql-check", is_flag=True)
@click.option("--map-image", is_flag=True)
@click.option("--search", is_flag=True)
@click.pass_context
def run(ctx: click.Context, items_path: str, out_path: str, report_path: str | None, no_sparql_check: bool, map_image: bool, search: bool):
    """Run a benchmark and write the outcome log."""
    app = _context(ctx)
    items = load_benchmark(items_path)
    log, descriptive_rows = run_benchmark(
        items,
        app.bundle,
        app.gateways,
        app.store,
        app.config.qa,
        check_sparql=not no_sparql_check,
        use_map_image=map_image,
        use_search=search,
    )
    log.save(out_path)
    if descriptive_rows:
        desc_path = out_path + ".descriptive.json"
        with open(desc_path, "w", encoding="utf-8") as fh:
            json.dump(descriptive_rows, fh, indent=1, sort_keys=True, ensure_ascii=False)
        click.echo(f"wrote descriptive rows -> {desc_path}")
    if report_path:
        report = build_report(log, descriptive_rows or None, label="bench")
        save_report(report, report_path)
        click.echo(f"wrote report -> {report_path}")
    click.echo(f"ran {len(items)} items -> {out_path}")


@bench.command()
@click.option("--log", "log_path", type=str, required=True)
@click.option("--descriptive", "desc_path", type=str, default=None)
@click.option("--out", "out_path", type=str, required=True)
@click.option("--text", is_flag=True, help="Also print the rendered table.")
@click.option("--label", type=str, default="run")
@click.pass_context
def report(ctx: click.Context, log_path: str, desc_path: str | None, out_path: str, text: bool, label: str):
    """Aggregate an outcome log into a report document."""
    log = OutcomeLog.load(log_path)
    descriptive_rows = None
    if desc_path:
        descriptive_rows = json.loads(open(desc_path, encoding="utf-8").read())
    doc = build_report(log, descriptive_rows, label=label)
    save_report(doc, out_path)
    if text:
        click.echo(render_report(doc), nl=False)
    click.echo(f"wrote report -> {out_path}")


@cli.command()
@click.option("--host", type=str, default=None)
@click.option("--port", type=int, default=None)
@click.pass_context
def serve(ctx: click.Context, host: str | None, port: int | None):
    """Serve the HTTP API over the built store."""
    import uvicorn

    from .app import create_app

    app_ctx = _context(ctx)
    server_cfg = app_ctx.config.server
    uvicorn.run(
        create_app(app_ctx),
        host=host or server_cfg.host,
        port=port or server_cfg.port,
        log_level="info",
    )


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except SystemExit as exc:  # raised by sys.exit in subcommands
        code = exc.code
        return int(code) if isinstance(code, int) else 1
    except USER_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except FileNotFoundError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except ChronomapError as exc:
        click.echo(f"internal error: {exc}", err=True)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        click.echo(f"internal error: {exc}", err=True)
        return 2


def entrypoint() -> None:
    sys.exit(main())
