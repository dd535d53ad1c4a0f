"""Command-line interface.

Exit codes: 0 success, 1 user error (bad arguments, missing files,
unknown ids), 2 internal/upstream error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import ROLES, load_config
from .engine import Engine, UnknownContract
from .errors import ContractQaError
from . import cms, evalharness, fixtures


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="TOML config file; defaults apply when omitted.")
@click.pass_context
def cli(ctx, config_path):
    """Contract question answering: ingestion, serving, and evaluation."""
    ctx.obj = load_config(config_path)


def _engine(config, index_dir=None, db_path=None) -> Engine:
    if index_dir:
        config.paths.index_dir = index_dir
    if db_path:
        config.paths.db_path = db_path
    return Engine(config)


@cli.command()
@click.option("--manifest", required=True, type=click.Path(), help="Ingestion manifest (JSON).")
@click.option("--index", "index_dir", default=None, type=click.Path(), help="Index directory.")
@click.option("--db", "db_path", default=None, type=click.Path(), help="CMS database path.")
@click.pass_obj
def ingest(config, manifest, index_dir, db_path):
    """Parse, embed, and index the documents listed in a manifest."""
    engine = _engine(config, index_dir, db_path)
    documents, chunks = engine.ingest(manifest)
    click.echo(json.dumps({"documents": documents, "chunks": chunks}))


@cli.command()
@click.option("--question", required=True)
@click.option("--role", type=click.Choice(ROLES), default="contract_manager")
@click.option("--session", "session_id", default=None, help="Existing session id to continue.")
@click.option("--index", "index_dir", default=None, type=click.Path())
@click.option("--db", "db_path", default=None, type=click.Path())
@click.pass_obj
def ask(config, question, role, session_id, index_dir, db_path):
    """Ask one question and print the answer."""
    engine = _engine(config, index_dir, db_path)
    if session_id is None:
        session_id = engine.create_session(role).id
    answer = engine.ask(session_id, question)
    click.echo(answer.text)
    if answer.cited_contracts:
        click.echo("contracts: " + ", ".join(answer.cited_contracts))
    if answer.sources:
        click.echo("sources: " + ", ".join(answer.sources))
    click.echo(f"session: {session_id}", err=True)


@cli.command()
@click.option("--port", default=8000, type=int, help="0 binds an ephemeral port.")
@click.option("--host", default="127.0.0.1")
@click.option("--ui", "ui_dir", default=None, type=click.Path(),
              help="Serve this static bundle (the chat UI) alongside the API.")
@click.option("--index", "index_dir", default=None, type=click.Path())
@click.option("--db", "db_path", default=None, type=click.Path())
@click.pass_obj
def serve(config, port, host, ui_dir, index_dir, db_path):
    """Run the HTTP service."""
    from .service import serve as run_server

    engine = _engine(config, index_dir, db_path)
    run_server(engine, host=host, port=port, ui_dir=ui_dir)


@cli.command()
@click.option("--contracts", required=True, type=click.Path(), help="Contract rows (CSV).")
@click.option("--amendments", default=None, type=click.Path())
@click.option("--db", "db_path", default=None, type=click.Path())
@click.pass_obj
def seed(config, contracts, amendments, db_path):
    """Create and populate the CMS database from CSV fixtures."""
    path = db_path or config.paths.db_path
    count = cms.seed(path, contracts, amendments)
    click.echo(json.dumps({"db": str(path), "contracts": count}))


@cli.command("eval")
@click.option("--questions", required=True, type=click.Path(), help="Benchmark questions (JSON).")
@click.option("--trials", default=None, type=int)
@click.option("--out", "out_path", required=True, type=click.Path(), help="Markdown report path.")
@click.option("--json-out", "json_path", default=None, type=click.Path(),
              help="JSON twin report path (default: alongside --out).")
@click.option("--index", "index_dir", default=None, type=click.Path())
@click.option("--db", "db_path", default=None, type=click.Path())
@click.pass_obj
def eval_command(config, questions, trials, out_path, json_path, index_dir, db_path):
    """Run the benchmark questions and write the two-table report."""
    engine = _engine(config, index_dir, db_path)
    question_set = evalharness.load_questions(questions)
    report = evalharness.run_benchmark(
        question_set, engine, trials=trials or config.eval.trials
    )
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report.to_markdown(), encoding="utf-8")
    twin = Path(json_path) if json_path else out.with_suffix(".json")
    twin.write_text(report.to_json(), encoding="utf-8")
    click.echo(json.dumps({
        "questions": len(question_set),
        "trials": report.trials,
        "fully_correct": report.fully_correct(),
        "report": str(out),
        "json": str(twin),
    }))


@cli.command()
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--contracts", "n_contracts", default=75, type=int)
@click.option("--seed", "seed_value", default=42, type=int)
def fixtures_command(out_dir, n_contracts, seed_value):
    """Generate the synthetic fixture corpus (texts, CSVs, manifest, questions)."""
    fixture_set = fixtures.build_fixtures(out_dir, n_contracts=n_contracts, seed=seed_value)
    click.echo(json.dumps({
        "root": str(fixture_set.root),
        "contracts": len(fixture_set.records),
        "manifest": str(fixture_set.manifest_path),
        "questions": str(fixture_set.questions_path),
    }))


_USER_ERRORS = (FileNotFoundError, ValueError, KeyError, UnknownContract,
                json.JSONDecodeError)


def main():
    try:
        cli(standalone_mode=False)
    except click.exceptions.Abort:
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except _USER_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except ContractQaError as exc:
        click.echo(f"internal error: {exc}", err=True)
        sys.exit(2)
    except Exception as exc:  # anything unexpected
        click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
