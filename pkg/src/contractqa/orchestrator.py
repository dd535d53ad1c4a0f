"""Router workflow: classify the question, fan out to the retrieval and SQL
agents, assemble the role-aware prompt, generate the answer, and decide
whether a chart helps.

Out-of-domain questions never touch the index or the database: they get a
fixed refusal-context prompt. In-domain questions run both agents (either
may fail or come back empty) and the answer is composed from whatever
arrived; when text and database rows disagree on numbers or dates, the
prompt instructs the model to prefer the database.
"""

from __future__ import annotations

import json
import re
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import sqlagent
from .cms import CmsStore, Table
from .config import AppConfig, ROLES
from .errors import ContextOverflow, ContractQaError
from .index import MetadataFilter, RetrievalResult, VectorIndex
from .ingest import find_contract_ids
from .prompts import (
    BASE_INSTRUCTIONS,
    EXCERPTS_HEADER,
    QUESTION_PREFIX,
    SQL_RESULT_HEADER,
    classify_prompt,
    refusal_prompt,
    render_table,
)
from .providers import ChatProvider, EmbeddingProvider

_IN_OUT_RE = re.compile(r"\b(IN|OUT)\b")


@dataclass
class ChatSession:
    id: str
    role: str
    history: list[tuple[str, str]] = field(default_factory=list)  # append-only
    created_at: str = ""


class SessionStore:
    """In-memory sessions with optional JSON-lines persistence.

    Turns within one session are serialized by a per-session lock; distinct
    sessions are fully independent.
    """

    def __init__(self, persist_path: str | Path | None = None):
        self._sessions: dict[str, ChatSession] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._store_lock = threading.Lock()
        self._persist_path = Path(persist_path) if persist_path else None
        if self._persist_path and self._persist_path.exists():
            self._replay()

    def _replay(self) -> None:
        for line in self._persist_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            event = json.loads(line)
            if event["event"] == "create":
                session = ChatSession(id=event["id"], role=event["role"],
                                      created_at=event["created_at"])
                self._sessions[session.id] = session
                self._locks[session.id] = threading.Lock()
            elif event["event"] == "turn":
                self._sessions[event["id"]].history.append(
                    (event["question"], event["answer"])
                )

    def _persist(self, event: dict) -> None:
        if self._persist_path is None:
            return
        self._persist_path.parent.mkdir(parents=True, exist_ok=True)
        with self._persist_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")

    def create(self, role: str) -> ChatSession:
        if role not in ROLES:
            raise ValueError(f"unknown role {role!r}; expected one of {ROLES}")
        session = ChatSession(
            id=uuid.uuid4().hex,
            role=role,
            created_at=datetime.now(timezone.utc).isoformat(),
        )
        with self._store_lock:
            self._sessions[session.id] = session
            self._locks[session.id] = threading.Lock()
        self._persist({"event": "create", "id": session.id, "role": role,
                       "created_at": session.created_at})
        return session

    def get(self, session_id: str) -> ChatSession:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise KeyError(f"unknown session: {session_id}")

    def lock(self, session_id: str) -> threading.Lock:
        return self._locks[session_id]

    def record_turn(self, session: ChatSession, question: str, answer_text: str) -> None:
        session.history.append((question, answer_text))
        self._persist({"event": "turn", "id": session.id, "question": question,
                       "answer": answer_text})


@dataclass
class ChartSpec:
    kind: str  # bar | line | pie
    title: str
    x: list[str]
    y: list[float]
    y_label: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "title": self.title, "x": self.x,
                "y": self.y, "y_label": self.y_label}


@dataclass
class PromptBundle:
    system_context: str
    instructions: list[str]
    retrieved_chunks: list[RetrievalResult]
    sql_table: Table | None
    sql_text: str | None
    sql_note: str | None  # reason the SQL side is empty, if it is
    rag_note: str | None  # reason the retrieval side is empty, if it is
    history: list[tuple[str, str]]
    question: str
    omitted_chunks: int = 0


@dataclass
class AgentAnswer:
    text: str
    cited_contracts: list[str] = field(default_factory=list)
    sources: list[str] = field(default_factory=list)
    table: Table | None = None
    chart: ChartSpec | None = None
    out_of_domain: bool = False

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "cited_contracts": self.cited_contracts,
            "sources": self.sources,
            "table": (
                {"columns": self.table.columns, "rows": [list(r) for r in self.table.rows]}
                if self.table is not None
                else None
            ),
            "chart": self.chart.to_dict() if self.chart is not None else None,
            "out_of_domain": self.out_of_domain,
        }


def classify_domain(question: str, llm: ChatProvider) -> bool:
    """True when the question belongs to the contract-management domain.

    Unparseable responses default to in-domain: the grounded pipeline can
    only answer from its sources, so failing open is the safe direction.
    """
    response = llm.complete(classify_prompt(question))
    m = _IN_OUT_RE.search(response.upper())
    if m is None:
        return True
    return m.group(1) == "IN"


def derive_filters(question: str) -> list[MetadataFilter]:
    """One retrieval pass per OCS id named in the question; an unrestricted
    pass when none is named."""
    ids = find_contract_ids(question)
    if not ids:
        return [MetadataFilter()]
    return [MetadataFilter(contract=ocs) for ocs in ids]


def derive_filter(question: str) -> MetadataFilter:
    return derive_filters(question)[0]


def decide_chart(table: Table | None) -> ChartSpec | None:
    """Bar chart for label+number tables of 2 to 30 rows; otherwise nothing."""
    if table is None or not (2 <= len(table.rows) <= 30):
        return None
    label_col = None
    value_col = None
    for i in range(len(table.columns)):
        values = [row[i] for row in table.rows]
        if label_col is None and all(isinstance(v, str) for v in values):
            label_col = i
        elif value_col is None and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in values
        ):
            value_col = i
    if label_col is None or value_col is None:
        return None
    return ChartSpec(
        kind="bar",
        title=f"{table.columns[value_col]} by {table.columns[label_col]}",
        x=[str(row[label_col]) for row in table.rows],
        y=[float(row[value_col]) for row in table.rows],
        y_label=table.columns[value_col],
    )


def build_prompt(bundle: PromptBundle, budget_chars: int = 24000) -> list[dict]:
    """Deterministic message rendering under a character budget.

    Over budget, the lowest-scored excerpts are dropped first (the render
    notes how many); only a question that alone exceeds the budget is an
    error.
    """
    if len(bundle.question) > budget_chars:
        raise ContextOverflow(
            f"question of {len(bundle.question)} chars exceeds budget {budget_chars}"
        )
    chunks = list(bundle.retrieved_chunks)
    while True:
        messages = _render_messages(bundle, chunks)
        if _total_chars(messages) <= budget_chars or not chunks:
            return messages
        drop = min(range(len(chunks)), key=lambda i: (chunks[i].score, chunks[i].chunk.id))
        chunks.pop(drop)
        bundle.omitted_chunks += 1


def _total_chars(messages: list[dict]) -> int:
    return sum(len(m["content"]) for m in messages)


def _render_messages(bundle: PromptBundle, chunks: list[RetrievalResult]) -> list[dict]:
    context_lines = [EXCERPTS_HEADER]
    if chunks:
        for result in chunks:
            tag = f"[chunk {result.chunk.id}] (score {result.score:.4f}"
            tag += ", neighbor)" if result.neighbor else ")"
            context_lines.append(tag)
            context_lines.append(result.chunk.text)
            context_lines.append("")
    elif bundle.rag_note:
        context_lines.append(f"(no excerpts retrieved: {bundle.rag_note})")
    else:
        context_lines.append("(no excerpts retrieved)")
    if bundle.omitted_chunks:
        context_lines.append(
            f"(omitted {bundle.omitted_chunks} lower-ranked excerpts to fit the context budget)"
        )
    context_lines.append(SQL_RESULT_HEADER)
    if bundle.sql_table is not None:
        context_lines.append(f"SQL: {bundle.sql_text}")
        context_lines.append(render_table(bundle.sql_table.columns, bundle.sql_table.rows))
    elif bundle.sql_note:
        context_lines.append(f"(SQL agent unavailable: {bundle.sql_note})")
    else:
        context_lines.append("(SQL agent disabled)")

    messages = [
        {"role": "system", "content": bundle.system_context},
        {"role": "system", "content": "Instructions:\n" + "\n".join(f"- {i}" for i in bundle.instructions)},
        {"role": "system", "content": "\n".join(context_lines)},
    ]
    for question, answer in bundle.history:
        messages.append({"role": "user", "content": question})
        messages.append({"role": "assistant", "content": answer})
    messages.append({"role": "user", "content": f"{QUESTION_PREFIX}{bundle.question}"})
    return messages


@dataclass
class _AgentOutcome:
    value: object = None
    note: str | None = None


class Orchestrator:
    """Binds index, database, and providers into the answer workflow."""

    def __init__(self, index: VectorIndex, store: CmsStore,
                 embedder: EmbeddingProvider, chat: ChatProvider,
                 config: AppConfig, sessions: SessionStore | None = None):
        self.index = index
        self.store = store
        self.embedder = embedder
        self.chat = chat
        self.config = config
        self.sessions = sessions or SessionStore(config.paths.sessions_file)
        self._schema_cache = None

    # Schema introspection is cached: the store is never written at serving
    # time, so the schema cannot drift under us.
    def _schema(self):
        if self._schema_cache is None:
            self._schema_cache = self.store.introspect_schema()
        return self._schema_cache

    def _retrieve(self, question: str) -> list[RetrievalResult]:
        retrieval = self.config.retrieval
        vector = self.embedder.embed(question)
        main: list[RetrievalResult] = []
        neighbors: list[RetrievalResult] = []
        seen: set[str] = set()
        for flt in derive_filters(question):
            for result in self.index.query(
                vector, filter=flt, k=retrieval.k,
                expand_neighbors=retrieval.expand_neighbors,
            ):
                if result.chunk.id in seen:
                    continue
                seen.add(result.chunk.id)
                (neighbors if result.neighbor else main).append(result)
        main.sort(key=lambda r: (-r.score, r.chunk.id))
        neighbors.sort(key=lambda r: (-r.score, r.chunk.id))
        return main + neighbors

    def _run_sql(self, question: str):
        return sqlagent.run(
            question, self._schema(), self.chat, self.store,
            audit_path=self.config.paths.audit_log,
        )

    def _fan_out(self, question: str) -> tuple[_AgentOutcome, _AgentOutcome]:
        settings = self.config.orchestrator
        rag = _AgentOutcome(note="retrieval disabled")
        sql = _AgentOutcome(note="SQL agent disabled")

        def rag_task():
            return self._retrieve(question)

        def sql_task():
            return self._run_sql(question)

        if settings.concurrent_fanout:
            with ThreadPoolExecutor(max_workers=2) as pool:
                rag_future = pool.submit(rag_task) if settings.rag_enabled else None
                sql_future = pool.submit(sql_task) if settings.sql_enabled else None
                if rag_future is not None:
                    rag = _collect(rag_future, settings.agent_timeout_s)
                if sql_future is not None:
                    sql = _collect(sql_future, settings.agent_timeout_s)
        else:
            if settings.rag_enabled:
                rag = _collect_call(rag_task)
            if settings.sql_enabled:
                sql = _collect_call(sql_task)
        return rag, sql

    def answer(self, session: ChatSession, question: str) -> AgentAnswer:
        """Full turn: route, gather, compose, generate, record."""
        if not question.strip():
            raise ValueError("question must not be empty")
        with self.sessions.lock(session.id):
            if not classify_domain(question, self.chat):
                text = self.chat.complete(refusal_prompt(question))
                answer = AgentAnswer(text=text, out_of_domain=True)
            else:
                answer = self._answer_in_domain(session, question)
            self.sessions.record_turn(session, question, answer.text)
            return answer

    def _answer_in_domain(self, session: ChatSession, question: str) -> AgentAnswer:
        rag, sql = self._fan_out(question)
        chunks = rag.value if rag.value is not None else []
        table, sql_text = None, None
        if sql.value is not None:
            table, candidate = sql.value
            sql_text = candidate.sql
        bundle = PromptBundle(
            system_context=self.config.prompt.role_contexts[session.role],
            instructions=list(BASE_INSTRUCTIONS),
            retrieved_chunks=chunks,
            sql_table=table,
            sql_text=sql_text,
            sql_note=sql.note,
            rag_note=rag.note,
            history=session.history[-self.config.prompt.history_window :],
            question=question,
        )
        messages = build_prompt(bundle, budget_chars=self.config.prompt.budget_chars)
        text = self.chat.complete(messages)
        rendered = "\n".join(m["content"] for m in messages)
        sources = [r.chunk.id for r in chunks if f"[chunk {r.chunk.id}]" in rendered]
        return AgentAnswer(
            text=text,
            cited_contracts=find_contract_ids(text),
            sources=sources,
            table=table,
            chart=decide_chart(table),
            out_of_domain=False,
        )


def _collect(future, timeout_s: float) -> _AgentOutcome:
    try:
        return _AgentOutcome(value=future.result(timeout=timeout_s))
    except FutureTimeout:
        return _AgentOutcome(note=f"timed out after {timeout_s:.0f}s")
    except ContractQaError as exc:
        return _AgentOutcome(note=f"{type(exc).__name__}: {exc}")


def _collect_call(task) -> _AgentOutcome:
    try:
        return _AgentOutcome(value=task())
    except ContractQaError as exc:
        return _AgentOutcome(note=f"{type(exc).__name__}: {exc}")
