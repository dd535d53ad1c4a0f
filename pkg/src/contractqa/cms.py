"""Contract-management store: an embedded SQLite database.

The store is written only by migration and seeding tools; at serving time
every connection is opened read-only AND forced to ``query_only``, so even
a statement that slipped past the validator could not change data.
Currency is integer cents; never floats.
"""

from __future__ import annotations

import csv
import sqlite3
import time
from dataclasses import dataclass, field
from datetime import date
from decimal import Decimal
from importlib import resources
from pathlib import Path

from .errors import ConnectionFailed, QueryTimeout, SqlExecutionError
from .ingest import OCS_PATTERN, slugify

SITUATIONS = ("active", "closed", "suspended")

DEFAULT_MAX_ROWS = 200
DEFAULT_TIMEOUT_MS = 5000

# Bookkeeping tables hidden from schema introspection (not part of the domain).
_INTERNAL_TABLES = {"schema_migrations"}


@dataclass
class ContractRecord:
    ocs: str
    object: str
    supplier: str
    manager: str
    total_value: Decimal
    start_date: date
    end_date: date
    situation: str
    procurement_mode: str

    def __post_init__(self):
        if not OCS_PATTERN.fullmatch(self.ocs):
            raise ValueError(f"bad OCS id: {self.ocs!r}")
        if self.start_date > self.end_date:
            raise ValueError(f"{self.ocs}: start_date after end_date")
        if self.total_value < 0:
            raise ValueError(f"{self.ocs}: negative total_value")
        if self.situation not in SITUATIONS:
            raise ValueError(f"{self.ocs}: bad situation {self.situation!r}")

    @property
    def total_value_cents(self) -> int:
        return int(self.total_value * 100)


@dataclass
class Table:
    """Tabular query result: column names plus rows in query order."""

    columns: list[str]
    rows: list[tuple]

    def __len__(self) -> int:
        return len(self.rows)


@dataclass
class TableInfo:
    name: str
    columns: list[tuple[str, str]]  # (name, declared type)
    sample_rows: list[tuple] = field(default_factory=list)

    @property
    def sample_count(self) -> int:
        return len(self.sample_rows)


@dataclass
class SchemaDescription:
    tables: list[TableInfo]
    rendered_text: str


def migrate(db_path: str | Path) -> int:
    """Apply pending migration scripts; returns the schema version."""
    db_path = Path(db_path)
    db_path.parent.mkdir(parents=True, exist_ok=True)
    scripts = sorted(
        (r.name, r.read_text(encoding="utf-8"))
        for r in resources.files("contractqa.migrations").iterdir()
        if r.name.endswith(".sql")
    )
    with sqlite3.connect(db_path) as conn:
        conn.execute(
            "CREATE TABLE IF NOT EXISTS schema_migrations ("
            "version INTEGER PRIMARY KEY, applied_at TEXT NOT NULL)"
        )
        row = conn.execute("SELECT MAX(version) FROM schema_migrations").fetchone()
        current = row[0] or 0
        for name, sql in scripts:
            version = int(name.split("_", 1)[0])
            if version > current:
                conn.executescript(sql)
                conn.execute(
                    "INSERT INTO schema_migrations (version, applied_at) VALUES (?, datetime('now'))",
                    (version,),
                )
                current = version
    return current


def _readonly_connection(db_path: Path) -> sqlite3.Connection:
    conn = sqlite3.connect(f"file:{db_path}?mode=ro", uri=True)
    conn.execute("PRAGMA query_only = ON")
    return conn


class CmsStore:
    """Read-only serving surface over the contracts database."""

    def __init__(self, db_path: str | Path, sample_rows: int = 3):
        self.db_path = Path(db_path)
        self.sample_rows = sample_rows
        self.execute_count = 0  # instrumentation for refusal-purity checks

    def introspect_schema(self) -> SchemaDescription:
        """Live schema, deterministically ordered (table name, column ordinal),
        with up to ``sample_rows`` example rows per table for prompting."""
        if not self.db_path.exists():
            raise ConnectionFailed(f"database not found: {self.db_path}")
        try:
            conn = _readonly_connection(self.db_path)
        except sqlite3.Error as exc:
            raise ConnectionFailed(f"cannot open {self.db_path}: {exc}")
        try:
            names = [
                r[0]
                for r in conn.execute(
                    "SELECT name FROM sqlite_master WHERE type = 'table' "
                    "AND name NOT LIKE 'sqlite_%' ORDER BY name"
                )
            ]
            tables = []
            for name in names:
                if name in _INTERNAL_TABLES:
                    continue
                cols = [
                    (r[1], r[2] or "TEXT")
                    for r in conn.execute(f"PRAGMA table_info({_quote_ident(name)})")
                ]
                samples = []
                if self.sample_rows > 0:
                    samples = [
                        tuple(row)
                        for row in conn.execute(
                            f"SELECT * FROM {_quote_ident(name)} ORDER BY 1 LIMIT ?",
                            (self.sample_rows,),
                        )
                    ]
                tables.append(TableInfo(name=name, columns=cols, sample_rows=samples))
        finally:
            conn.close()
        return SchemaDescription(tables=tables, rendered_text=_render_schema(tables))

    def execute_readonly(
        self,
        sql: str,
        max_rows: int = DEFAULT_MAX_ROWS,
        timeout_ms: int = DEFAULT_TIMEOUT_MS,
    ) -> Table:
        """Run an already-validated SELECT inside a read-only connection.

        Results are capped at ``max_rows``; the statement is aborted once
        ``timeout_ms`` elapses.
        """
        if max_rows < 1:
            raise ValueError("max_rows must be >= 1")
        self.execute_count += 1
        if not self.db_path.exists():
            raise SqlExecutionError(f"database not found: {self.db_path}")
        conn = _readonly_connection(self.db_path)
        deadline = time.monotonic() + timeout_ms / 1000.0
        timed_out = {"hit": False}

        def guard():
            if time.monotonic() > deadline:
                timed_out["hit"] = True
                return 1  # abort
            return 0

        conn.set_progress_handler(guard, 200)
        try:
            cursor = conn.execute(sql)
            rows = cursor.fetchmany(max_rows)
            columns = [d[0] for d in cursor.description] if cursor.description else []
            return Table(columns=columns, rows=[tuple(r) for r in rows])
        except sqlite3.OperationalError as exc:
            if timed_out["hit"]:
                raise QueryTimeout(f"query exceeded {timeout_ms} ms")
            raise SqlExecutionError(str(exc))
        except sqlite3.Error as exc:
            raise SqlExecutionError(str(exc))
        finally:
            conn.close()

    def contract_exists(self, ocs: str) -> bool:
        table = self.execute_readonly(
            f"SELECT 1 FROM contracts WHERE ocs = '{ocs.replace(chr(39), chr(39) * 2)}' LIMIT 1"
        )
        return len(table.rows) > 0

    def contract_id_for_source(self, source: str) -> str | None:
        """CMS-side lookup used when a document carries no OCS id: matches the
        seeded source slug against the file name."""
        table = self.execute_readonly("SELECT ocs, supplier FROM contracts ORDER BY ocs")
        for ocs, supplier in table.rows:
            if slugify(f"{supplier}-{ocs}") in source:
                return ocs
        return None


def _quote_ident(name: str) -> str:
    return '"' + name.replace('"', '""') + '"'


def _render_schema(tables: list[TableInfo]) -> str:
    if not tables:
        return "(no tables)"
    lines = []
    for info in tables:
        cols = ", ".join(f"{n} {t}" for n, t in info.columns)
        lines.append(f"TABLE {info.name} ({cols})")
        for row in info.sample_rows:
            lines.append("  sample: " + " | ".join(str(v) for v in row))
    return "\n".join(lines)


# -- seeding -------------------------------------------------------------------


def parse_contract_row(row: dict) -> ContractRecord:
    return ContractRecord(
        ocs=row["ocs"],
        object=row["object"],
        supplier=row["supplier"],
        manager=row["manager"],
        total_value=Decimal(row["total_value"]),
        start_date=date.fromisoformat(row["start_date"]),
        end_date=date.fromisoformat(row["end_date"]),
        situation=row["situation"],
        procurement_mode=row["procurement_mode"],
    )


def seed(
    db_path: str | Path,
    contracts_csv: str | Path,
    amendments_csv: str | Path | None = None,
) -> int:
    """Create/migrate the database and load contract fixtures from CSV.

    Managers are derived from the contract rows. Returns the number of
    contracts loaded. Seeding replaces existing rows wholesale; it is a
    tooling operation, never a serving-time one.
    """
    db_path = Path(db_path)
    migrate(db_path)
    with open(contracts_csv, newline="", encoding="utf-8") as fh:
        records = [parse_contract_row(row) for row in csv.DictReader(fh)]
    with sqlite3.connect(db_path) as conn:
        conn.execute("DELETE FROM amendments")
        conn.execute("DELETE FROM contracts")
        conn.execute("DELETE FROM managers")
        conn.executemany(
            "INSERT INTO contracts (ocs, object, supplier, manager, total_value_cents,"
            " start_date, end_date, situation, procurement_mode)"
            " VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)",
            [
                (
                    r.ocs, r.object, r.supplier, r.manager, r.total_value_cents,
                    r.start_date.isoformat(), r.end_date.isoformat(), r.situation,
                    r.procurement_mode,
                )
                for r in records
            ],
        )
        managers = sorted({r.manager for r in records})
        conn.executemany(
            "INSERT INTO managers (name, unit, email) VALUES (?, ?, ?)",
            [
                (name, "Contract Management Support Unit", f"{slugify(name)}@example.org")
                for name in managers
            ],
        )
        if amendments_csv is not None:
            with open(amendments_csv, newline="", encoding="utf-8") as fh:
                rows = list(csv.DictReader(fh))
            conn.executemany(
                "INSERT INTO amendments (ocs, seq, description, signed_date, value_delta_cents)"
                " VALUES (?, ?, ?, ?, ?)",
                [
                    (
                        row["ocs"], int(row["seq"]), row["description"],
                        row["signed_date"], int(row["value_delta_cents"]),
                    )
                    for row in rows
                ],
            )
    return len(records)
