"""Contract document ingestion: clause-aware parsing and chunking.

Contracts follow a standardized textual structure organized into titled
clauses ("CLÁUSULA PRIMEIRA - OBJETO", ...). Splitting at clause headings
keeps each chunk semantically whole, which is what makes retrieval precise;
fixed-size windows would cut clauses mid-sentence.

Parsing is lossless: section bodies concatenated in order reproduce the
input text byte for byte. Chunk ids are deterministic, so re-ingesting the
same file always yields the same ids.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EmptyDocument

# Clause headings in the default (Portuguese) convention, plus a fallback for
# documents that mark sections with stand-alone uppercase lines.
DEFAULT_HEADING_PATTERNS = [
    r"^CL[ÁA]USULA\s+[^\n]+$",
    r"^[A-ZÁÂÃÀÇÉÊÍÓÔÕÚÜ][A-ZÁÂÃÀÇÉÊÍÓÔÕÚÜ0-9 \-–—:.,()/ºª]{5,}$",
]

# Contract identifier "nnn/yyyy", optionally prefixed with "OCS". The
# lookarounds keep date fragments ("12/05/2023") and dotted law numbers
# ("14.133/2021") from matching.
_OCS_CORE = r"(\d{1,5})/(\d{4})"
_OCS_BARE_RE = re.compile(r"(?<![\d./])" + _OCS_CORE + r"(?![\d/])")
_OCS_PREFIXED_RE = re.compile(
    r"OCS\s*(?:n[ºo°.]?\s*)?0*" + _OCS_CORE + r"(?![\d/])", re.IGNORECASE
)

OCS_PATTERN = _OCS_BARE_RE  # exported for callers that scan answers/questions

_HEADER_LINE_RE = re.compile(r"^\[contract: [^\]\n]* \| clause: [^\]\n]*\]\n?")

# Sections longer than this are split at paragraph boundaries before
# embedding (provider input limits); ~1500 tokens at 4 chars/token.
MAX_SECTION_CHARS = 6000


@dataclass
class Section:
    """A clause-delimited segment of a contract document."""

    index: int
    title: str  # heading line text; empty for the preamble
    body: str  # includes the heading line; never empty


@dataclass
class ContractDocument:
    source: str
    contract_id: str | None
    raw_text: str
    sections: list[Section] = field(default_factory=list)


@dataclass
class ChunkMetadata:
    source: str
    contract: str  # OCS id or ""
    clause: str  # clause title or ""
    section_index: int
    part_index: int = 0
    neighbor_prev: str | None = None
    neighbor_next: str | None = None

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "contract": self.contract,
            "clause": self.clause,
            "section_index": self.section_index,
            "part_index": self.part_index,
            "neighbor_prev": self.neighbor_prev,
            "neighbor_next": self.neighbor_next,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChunkMetadata":
        return cls(**d)


@dataclass
class Chunk:
    """Unit of embedding and retrieval: one clause (or clause part)."""

    id: str
    text: str  # header line + section body
    metadata: ChunkMetadata

    @property
    def body(self) -> str:
        return strip_header(self.text)

    def to_dict(self) -> dict:
        return {"id": self.id, "text": self.text, "metadata": self.metadata.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "Chunk":
        return cls(id=d["id"], text=d["text"], metadata=ChunkMetadata.from_dict(d["metadata"]))


def strip_header(text: str) -> str:
    """Remove the injected provenance header line, if present."""
    return _HEADER_LINE_RE.sub("", text, count=1)


def normalize_ocs(number: str, year: str) -> str:
    return f"{int(number)}/{year}"


def extract_contract_id(raw_text: str) -> str | None:
    """First OCS identifier in the text, normalized to "nnn/yyyy".

    An explicitly "OCS"-prefixed id wins over a bare one anywhere earlier,
    since bare matches are more likely to be incidental numbers.
    """
    m = _OCS_PREFIXED_RE.search(raw_text)
    if m is None:
        m = _OCS_BARE_RE.search(raw_text)
    if m is None:
        return None
    return normalize_ocs(m.group(1), m.group(2))


def find_contract_ids(text: str) -> list[str]:
    """All distinct OCS ids in the text, in order of first appearance."""
    seen: list[str] = []
    for m in _OCS_BARE_RE.finditer(text):
        ocs = normalize_ocs(m.group(1), m.group(2))
        if ocs not in seen:
            seen.append(ocs)
    return seen


def parse_document(
    raw_text: str,
    source: str,
    heading_patterns: list[str] | None = None,
    contract_id: str | None = None,
) -> ContractDocument:
    """Split raw contract text into clause-delimited sections.

    Every line matching a heading pattern starts a new section titled with
    that line; text before the first heading becomes an untitled preamble.
    Section bodies (heading line included) concatenate back to ``raw_text``
    exactly. A document without headings yields a single untitled section.

    ``contract_id`` overrides extraction from the text (e.g. from a
    manifest); otherwise the first OCS id found in the text is used.
    """
    if not raw_text.strip():
        raise EmptyDocument(f"document {source!r} is blank")
    patterns = heading_patterns if heading_patterns is not None else DEFAULT_HEADING_PATTERNS
    if not patterns:
        raise ValueError("heading_patterns must not be empty")

    starts: dict[int, str] = {}
    for pat in patterns:
        for m in re.finditer(pat, raw_text, re.MULTILINE):
            starts.setdefault(m.start(), m.group(0))
    heading_positions = sorted(starts)

    sections: list[Section] = []
    if not heading_positions:
        sections.append(Section(index=0, title="", body=raw_text))
    else:
        first = heading_positions[0]
        preamble = raw_text[:first]
        bounds = heading_positions + [len(raw_text)]
        if preamble and preamble.strip():
            sections.append(Section(index=0, title="", body=preamble))
        carry = preamble if preamble and not preamble.strip() else ""
        for i, start in enumerate(heading_positions):
            body = raw_text[start : bounds[i + 1]]
            if carry:
                body = carry + body  # whitespace-only preamble folds into the first clause
                carry = ""
            sections.append(Section(index=len(sections), title=starts[start], body=body))

    doc_id = contract_id if contract_id is not None else extract_contract_id(raw_text)
    return ContractDocument(source=source, contract_id=doc_id, raw_text=raw_text, sections=sections)


def _split_paragraphs(body: str, max_chars: int) -> list[str]:
    """Greedy paragraph packing; pieces keep their trailing separators so the
    parts concatenate back to ``body`` exactly."""
    pieces = re.split(r"(?<=\n\n)", body)
    parts: list[str] = []
    current = ""
    for piece in pieces:
        if current and len(current) + len(piece) > max_chars:
            parts.append(current)
            current = piece
        else:
            current += piece
    if current:
        parts.append(current)
    return parts


def _chunk_id(source: str, section_index: int, part_index: int, multipart: bool) -> str:
    base = f"{source}::s{section_index:03d}"
    return f"{base}::p{part_index:02d}" if multipart else base


def chunk_document(doc: ContractDocument, max_section_chars: int = MAX_SECTION_CHARS) -> list[Chunk]:
    """One chunk per section, with provenance header and neighbor links.

    Overlap between clauses is realized at retrieval time by pulling
    neighbor chunks, so no text is duplicated here. Sections longer than
    ``max_section_chars`` are split at paragraph boundaries into parts that
    share the clause metadata and are neighbor-linked in sequence.
    """
    chunks: list[Chunk] = []
    for section in doc.sections:
        parts = (
            _split_paragraphs(section.body, max_section_chars)
            if len(section.body) > max_section_chars
            else [section.body]
        )
        multipart = len(parts) > 1
        for p, part_body in enumerate(parts):
            header = ""
            if doc.contract_id:
                header = f"[contract: {doc.contract_id} | clause: {section.title}]\n"
            chunks.append(
                Chunk(
                    id=_chunk_id(doc.source, section.index, p, multipart),
                    text=header + part_body,
                    metadata=ChunkMetadata(
                        source=doc.source,
                        contract=doc.contract_id or "",
                        clause=section.title,
                        section_index=section.index,
                        part_index=p,
                    ),
                )
            )
    for i, chunk in enumerate(chunks):
        if i > 0:
            chunk.metadata.neighbor_prev = chunks[i - 1].id
        if i < len(chunks) - 1:
            chunk.metadata.neighbor_next = chunks[i + 1].id
    return chunks


@dataclass
class ManifestEntry:
    source: str
    text_file: str
    contract_id: str | None = None


def load_manifest(path: str | Path) -> list[ManifestEntry]:
    """Read an ingestion manifest: a JSON array or one JSON object per line,
    each ``{"source": ..., "text_file": ..., "contract_id": optional}``."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"manifest not found: {path}")
    raw = path.read_text(encoding="utf-8").strip()
    if not raw:
        return []
    if raw.startswith("["):
        records = json.loads(raw)
    else:
        records = [json.loads(line) for line in raw.splitlines() if line.strip()]
    entries = []
    for rec in records:
        entries.append(
            ManifestEntry(
                source=rec["source"],
                text_file=rec["text_file"],
                contract_id=rec.get("contract_id"),
            )
        )
    return entries


def ingest_manifest(
    manifest_path: str | Path,
    heading_patterns: list[str] | None = None,
    max_section_chars: int = MAX_SECTION_CHARS,
    contract_lookup=None,
) -> tuple[list[ContractDocument], list[Chunk]]:
    """Parse and chunk every document named in a manifest.

    ``text_file`` paths are resolved relative to the manifest. The contract
    id comes from the manifest override when given, then from the text, then
    from ``contract_lookup(source)`` (e.g. a CMS join) when provided.
    """
    manifest_path = Path(manifest_path)
    docs: list[ContractDocument] = []
    all_chunks: list[Chunk] = []
    for entry in load_manifest(manifest_path):
        text_path = Path(entry.text_file)
        if not text_path.is_absolute():
            text_path = manifest_path.parent / text_path
        if not text_path.exists():
            raise FileNotFoundError(f"text file not found: {text_path}")
        raw = text_path.read_text(encoding="utf-8")
        doc = parse_document(
            raw, source=entry.source, heading_patterns=heading_patterns,
            contract_id=entry.contract_id,
        )
        if doc.contract_id is None and contract_lookup is not None:
            looked_up = contract_lookup(entry.source)
            if looked_up:
                doc = ContractDocument(
                    source=doc.source, contract_id=looked_up,
                    raw_text=doc.raw_text, sections=doc.sections,
                )
        docs.append(doc)
        all_chunks.extend(chunk_document(doc, max_section_chars=max_section_chars))
    return docs, all_chunks


def slugify(text: str) -> str:
    """ASCII file-name-safe slug, used for deterministic fixture sources."""
    norm = unicodedata.normalize("NFKD", text).encode("ascii", "ignore").decode()
    return re.sub(r"[^a-z0-9]+", "-", norm.lower()).strip("-")
