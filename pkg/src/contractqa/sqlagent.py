"""Natural-language-to-SQL agent with validation and one repair round.

Entity recognition happens inside the generation prompt: the model is asked
to map mentions to schema elements as a structured preamble, which is parsed
back for the audit log rather than run as a separate NER pass.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .cms import DEFAULT_MAX_ROWS, DEFAULT_TIMEOUT_MS, CmsStore, SchemaDescription, Table
from .errors import LlmRefusal, SqlExecutionError, ValidationFailed
from .prompts import QUESTION_PREFIX, SQL_TASK_MARKER
from .providers import ChatProvider
from .sqlguard import ValidationVerdict, validate_sql

_FENCE_RE = re.compile(r"```(?:sql)?\s*\n(.*?)```", re.DOTALL | re.IGNORECASE)
_BARE_SQL_RE = re.compile(r"\b(?:select|with)\b.*", re.DOTALL | re.IGNORECASE)
_ENTITY_RE = re.compile(r"^ENTITY:\s*(.+?)\s*->\s*(.+?)\s*$", re.MULTILINE)

_audit_lock = threading.Lock()


@dataclass
class SqlCandidate:
    question: str
    sql: str
    entities: list[tuple[str, str]] = field(default_factory=list)
    attempt: int = 1


def _generation_messages(question: str, schema: SchemaDescription,
                         failed_sql: str | None = None, error: str | None = None) -> list[dict]:
    system = (
        "You translate user questions about contracts into SQL queries over "
        "this schema.\nSchema:\n" + schema.rendered_text
    )
    parts = []
    if failed_sql is not None:
        parts.append("The previous statement failed.")
        parts.append(f"Failed SQL: {failed_sql}")
        parts.append(f"Database error: {error}")
    parts.append(f"{QUESTION_PREFIX}{question}")
    parts.append(
        "First list the entities you recognize, one per line, in the form:\n"
        "ENTITY: <mention> -> <table.column>\n"
        f"{SQL_TASK_MARKER} answering the question, inside a ```sql code "
        "fence. Never modify data."
    )
    return [
        {"role": "system", "content": system},
        {"role": "user", "content": "\n".join(parts)},
    ]


def _extract_sql(text: str) -> str | None:
    m = _FENCE_RE.search(text)
    raw = m.group(1) if m else None
    if raw is None:
        m = _BARE_SQL_RE.search(text)
        raw = m.group(0) if m else None
    if raw is None:
        return None
    sql = raw.strip().rstrip(";").strip()
    return sql or None


def generate_sql(question: str, schema: SchemaDescription, llm: ChatProvider,
                 attempt: int = 1, failed_sql: str | None = None,
                 error: str | None = None) -> SqlCandidate:
    """Ask the model for exactly one SELECT; extract it plus the entity map."""
    if not schema.tables:
        raise LlmRefusal("schema is empty; nothing to query")
    response = llm.complete(_generation_messages(question, schema, failed_sql, error))
    sql = _extract_sql(response)
    if sql is None:
        raise LlmRefusal(f"no SQL statement in model response: {response[:200]!r}")
    entities = [(m.group(1), m.group(2)) for m in _ENTITY_RE.finditer(response)]
    return SqlCandidate(question=question, sql=sql, entities=entities, attempt=attempt)


def _audit(audit_path: str | Path | None, question: str, candidate: SqlCandidate | None,
           verdict: ValidationVerdict | None, rows: int | None, outcome: str) -> None:
    if audit_path is None:
        return
    line = json.dumps(
        {
            "ts": datetime.now(timezone.utc).isoformat(),
            "question": question,
            "sql": candidate.sql if candidate else None,
            "entities": candidate.entities if candidate else [],
            "verdict": verdict.to_dict() if verdict else None,
            "rows": rows,
            "attempt": candidate.attempt if candidate else None,
            "outcome": outcome,
        },
        ensure_ascii=False,
    )
    path = Path(audit_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with _audit_lock, path.open("a", encoding="utf-8") as fh:
        fh.write(line + "\n")


def run(question: str, schema: SchemaDescription, llm: ChatProvider, store: CmsStore,
        max_rows: int = DEFAULT_MAX_ROWS, timeout_ms: int = DEFAULT_TIMEOUT_MS,
        audit_path: str | Path | None = None) -> tuple[Table, SqlCandidate]:
    """Generate, validate, and execute; one repair round on execution failure.

    Validation failures never touch the database. A second execution failure
    surfaces the error to the caller.
    """
    candidate = generate_sql(question, schema, llm)
    verdict = validate_sql(candidate.sql)
    if not verdict.ok:
        _audit(audit_path, question, candidate, verdict, None, "rejected")
        raise ValidationFailed(verdict)
    try:
        table = store.execute_readonly(candidate.sql, max_rows=max_rows, timeout_ms=timeout_ms)
    except SqlExecutionError as exc:
        candidate = generate_sql(
            question, schema, llm, attempt=2, failed_sql=candidate.sql, error=str(exc)
        )
        verdict = validate_sql(candidate.sql)
        if not verdict.ok:
            _audit(audit_path, question, candidate, verdict, None, "rejected")
            raise ValidationFailed(verdict)
        try:
            table = store.execute_readonly(candidate.sql, max_rows=max_rows, timeout_ms=timeout_ms)
        except SqlExecutionError as exc2:
            _audit(audit_path, question, candidate, verdict, None, f"error: {exc2}")
            raise
    _audit(audit_path, question, candidate, verdict, len(table.rows), "ok")
    return table, candidate
