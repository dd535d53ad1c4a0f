"""Configuration: dataclass defaults, optionally overlaid from a TOML file."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .ingest import DEFAULT_HEADING_PATTERNS, MAX_SECTION_CHARS

ROLES = ("contract_manager", "support", "support_unit_manager")

# The support_unit_manager context is the product's canonical role text; the
# other two are authored analogues (flagged in config.sample.toml).
DEFAULT_ROLE_CONTEXTS = {
    "contract_manager": (
        "You are an assistant for contract managers, answering operational "
        "questions about specific administrative contracts with precise "
        "references to their clauses and records."
    ),
    "support": (
        "You are an assistant for the contract-management support team, "
        "helping locate contract records, clauses, suppliers, and "
        "procurement details."
    ),
    "support_unit_manager": (
        "You are an assistant specialized in answering questions about "
        "administrative contracts, who provides management and summarized "
        "information about the contracts."
    ),
}


@dataclass
class ProviderSettings:
    mode: str = "sim"  # "sim" (offline deterministic) or "remote"
    chat_endpoint: str = "https://api.openai.com/v1"
    chat_model: str = "gpt-4-turbo"
    embed_endpoint: str = "https://api.openai.com/v1"
    embed_model: str = "text-embedding-ada-002"
    embed_dimension: int = 256


@dataclass
class RetrievalSettings:
    k: int = 4
    expand_neighbors: bool = True
    metric: str = "cosine"


@dataclass
class PromptSettings:
    history_window: int = 6
    budget_chars: int = 24000  # ~6k tokens at 4 chars/token
    role_contexts: dict = field(default_factory=lambda: dict(DEFAULT_ROLE_CONTEXTS))


@dataclass
class OrchestratorSettings:
    agent_timeout_s: float = 30.0
    concurrent_fanout: bool = True
    sql_enabled: bool = True
    rag_enabled: bool = True


@dataclass
class IngestSettings:
    heading_patterns: list = field(default_factory=lambda: list(DEFAULT_HEADING_PATTERNS))
    max_section_chars: int = MAX_SECTION_CHARS


@dataclass
class PathSettings:
    index_dir: str = "var/index"
    db_path: str = "var/cms.db"
    audit_log: str | None = "var/audit.jsonl"
    sessions_file: str | None = None


@dataclass
class EvalSettings:
    trials: int = 10


@dataclass
class AppConfig:
    providers: ProviderSettings = field(default_factory=ProviderSettings)
    retrieval: RetrievalSettings = field(default_factory=RetrievalSettings)
    prompt: PromptSettings = field(default_factory=PromptSettings)
    orchestrator: OrchestratorSettings = field(default_factory=OrchestratorSettings)
    ingest: IngestSettings = field(default_factory=IngestSettings)
    paths: PathSettings = field(default_factory=PathSettings)
    eval: EvalSettings = field(default_factory=EvalSettings)


def _overlay(settings, mapping: dict) -> None:
    known = {f.name for f in fields(settings)}
    for key, value in mapping.items():
        if key not in known:
            raise ValueError(f"unknown config key: {key}")
        if key == "role_contexts":
            merged = dict(DEFAULT_ROLE_CONTEXTS)
            merged.update(value)
            value = merged
        setattr(settings, key, value)


def load_config(path: str | Path | None = None) -> AppConfig:
    """Defaults, with sections from ``path`` (TOML) overlaid when given."""
    config = AppConfig()
    if path is None:
        return config
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    for section, mapping in data.items():
        if not hasattr(config, section):
            raise ValueError(f"unknown config section: {section}")
        _overlay(getattr(config, section), mapping)
    if config.providers.mode not in ("sim", "remote"):
        raise ValueError(f"providers.mode must be 'sim' or 'remote', got {config.providers.mode!r}")
    return config
