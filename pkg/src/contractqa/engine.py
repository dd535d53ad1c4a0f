"""Composition root: wires providers, index, database, and orchestrator."""

from __future__ import annotations

from pathlib import Path

from .cms import CmsStore
from .config import AppConfig
from .errors import ContractQaError
from .index import IndexEntry, VectorIndex
from .index.store import META_FILE
from .ingest import ingest_manifest
from .orchestrator import AgentAnswer, ChatSession, Orchestrator, SessionStore
from .providers import (
    ChatProvider,
    EmbeddingProvider,
    LocalEmbeddingProvider,
    RemoteChatProvider,
    RemoteEmbeddingProvider,
)
from .simchat import SimulatedChatProvider

_EMBED_BATCH = 64


class UnknownContract(ContractQaError):
    """Summary requested for an OCS id absent from the CMS."""


class Engine:
    def __init__(self, config: AppConfig,
                 embedder: EmbeddingProvider | None = None,
                 chat: ChatProvider | None = None,
                 index: VectorIndex | None = None,
                 store: CmsStore | None = None,
                 sessions: SessionStore | None = None):
        self.config = config
        self.embedder = embedder or _default_embedder(config)
        self.chat = chat or _default_chat(config)
        self.store = store or CmsStore(config.paths.db_path)
        self.index = index if index is not None else _open_index(config, self.embedder)
        if self.index.dimension != self.embedder.dimension:
            raise ContractQaError(
                f"index dimension {self.index.dimension} != provider "
                f"dimension {self.embedder.dimension}"
            )
        self.sessions = sessions or SessionStore(config.paths.sessions_file)
        self.orchestrator = Orchestrator(
            self.index, self.store, self.embedder, self.chat, config, self.sessions
        )

    # -- sessions ---------------------------------------------------------------

    def create_session(self, role: str) -> ChatSession:
        return self.sessions.create(role)

    def ask(self, session_id: str, question: str) -> AgentAnswer:
        session = self.sessions.get(session_id)
        return self.orchestrator.answer(session, question)

    # -- ingestion ----------------------------------------------------------------

    def ingest(self, manifest_path: str | Path) -> tuple[int, int]:
        """Parse, embed, and index every document in the manifest; returns
        (documents, chunks). The CMS provides a source-to-contract fallback
        for documents whose text carries no OCS id."""
        lookup = None
        if Path(self.config.paths.db_path).exists():
            lookup = self.store.contract_id_for_source
        docs, chunks = ingest_manifest(
            manifest_path,
            heading_patterns=self.config.ingest.heading_patterns,
            max_section_chars=self.config.ingest.max_section_chars,
            contract_lookup=lookup,
        )
        for i in range(0, len(chunks), _EMBED_BATCH):
            batch = chunks[i : i + _EMBED_BATCH]
            vectors = self.embedder.embed_batch([c.text for c in batch])
            self.index.upsert(
                [IndexEntry(chunk=c, vector=v) for c, v in zip(batch, vectors)]
            )
        return len(docs), len(chunks)

    # -- summaries ----------------------------------------------------------------

    def summary(self, ocs: str) -> AgentAnswer:
        """Answer the canned summary question for one contract."""
        if not self.store.contract_exists(ocs):
            raise UnknownContract(f"no contract {ocs} in the CMS")
        session = self.create_session("support_unit_manager")
        return self.ask(session.id, f"Show a summary of contract {ocs}.")


def _default_embedder(config: AppConfig) -> EmbeddingProvider:
    p = config.providers
    if p.mode == "remote":
        return RemoteEmbeddingProvider(p.embed_endpoint, p.embed_model, p.embed_dimension)
    return LocalEmbeddingProvider(p.embed_dimension)


def _default_chat(config: AppConfig) -> ChatProvider:
    p = config.providers
    if p.mode == "remote":
        return RemoteChatProvider(p.chat_endpoint, p.chat_model)
    return SimulatedChatProvider()


def _open_index(config: AppConfig, embedder: EmbeddingProvider) -> VectorIndex:
    directory = Path(config.paths.index_dir)
    if (directory / META_FILE).exists():
        return VectorIndex.load(directory)
    return VectorIndex(
        dimension=embedder.dimension,
        metric=config.retrieval.metric,
        provider_name=embedder.name,
        directory=directory,
    )
