"""Metadata-filtered vector store with exact top-k similarity search.

Search is a linear scan: at desk scale (well under 10^5 chunks) nothing
approximate is needed, and exactness makes the brute-force oracle in the
test suite a strict equality check rather than a tolerance game.

Filtering happens BEFORE similarity: a query about one contract is scored
only against that contract's chunks, so a lexically similar clause from
another contract can never displace the right one.

Persistence is an append-compacted file of length-prefixed records
(chunk JSON + little-endian float32 vector) plus a small JSON meta file.
Writers take a lock and publish a new snapshot atomically; readers only
ever see complete snapshots.
"""

from __future__ import annotations

import json
import os
import struct
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DimensionMismatch
from ..ingest import Chunk
from . import kernels

META_FILE = "index.meta"
ENTRIES_FILE = "entries.bin"

METRICS = ("cosine", "euclidean", "manhattan")

_RECORD_HEADER = struct.Struct("<II")  # json byte length, vector element count


@dataclass(frozen=True)
class MetadataFilter:
    """Conjunctive chunk-metadata predicate; an empty filter matches all.

    ``contract`` and ``source`` match exactly, ``clause`` matches as a
    case-insensitive substring of the clause title.
    """

    contract: str | None = None
    source: str | None = None
    clause: str | None = None

    def is_empty(self) -> bool:
        return self.contract is None and self.source is None and self.clause is None

    def matches(self, metadata) -> bool:
        if self.contract is not None and metadata.contract != self.contract:
            return False
        if self.source is not None and metadata.source != self.source:
            return False
        if self.clause is not None and self.clause.lower() not in metadata.clause.lower():
            return False
        return True


@dataclass
class IndexEntry:
    chunk: Chunk
    vector: np.ndarray


@dataclass
class RetrievalResult:
    chunk: Chunk
    score: float
    neighbor: bool = False  # pulled in as a neighbor, not counted toward k


@dataclass
class UpsertResult:
    inserted: int = 0
    replaced: int = 0


@dataclass
class _Snapshot:
    ids: tuple
    chunks: tuple
    matrix: np.ndarray  # (n, d) float64
    norms: np.ndarray  # (n,) float64
    positions: dict = field(default_factory=dict)


def _coerce_vector(values, dimension: int) -> np.ndarray:
    vec = np.asarray(values, dtype=np.float32)
    if vec.ndim != 1 or vec.shape[0] != dimension:
        raise DimensionMismatch(
            f"vector has dimension {vec.shape[0] if vec.ndim == 1 else vec.shape}, "
            f"index expects {dimension}"
        )
    if not np.all(np.isfinite(vec)):
        raise ValueError("vector entries must be finite")
    return vec


class VectorIndex:
    """In-memory index over (chunk, vector) entries, optionally persisted.

    One entry per chunk id; upsert replaces. Vectors are stored as float32
    (the wire/disk format) and widened to float64 for scoring.
    """

    def __init__(self, dimension: int, metric: str = "cosine",
                 provider_name: str = "local", directory: str | Path | None = None):
        if metric not in METRICS:
            raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
        self.dimension = int(dimension)
        self.metric = metric
        self.provider_name = provider_name
        self.directory = Path(directory) if directory is not None else None
        self.query_count = 0  # instrumentation for the refusal-purity checks
        self._lock = threading.Lock()
        self._entries: dict[str, tuple[Chunk, np.ndarray]] = {}
        self._snapshot: _Snapshot | None = None
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)
            self._write_meta()

    # -- construction ---------------------------------------------------------

    @classmethod
    def load(cls, directory: str | Path) -> "VectorIndex":
        directory = Path(directory)
        meta_path = directory / META_FILE
        if not meta_path.exists():
            raise FileNotFoundError(f"no index at {directory}: missing {META_FILE}")
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        index = cls(
            dimension=meta["dimension"],
            metric=meta["metric"],
            provider_name=meta["provider"],
            directory=directory,
        )
        entries_path = directory / ENTRIES_FILE
        if entries_path.exists():
            with entries_path.open("rb") as fh:
                for chunk, vec in _read_records(fh, index.dimension):
                    index._entries[chunk.id] = (chunk, vec)  # later records win
        return index

    def _write_meta(self) -> None:
        meta = {
            "dimension": self.dimension,
            "metric": self.metric,
            "provider": self.provider_name,
        }
        path = self.directory / META_FILE
        path.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")

    # -- writes ---------------------------------------------------------------

    def upsert(self, entries: list[IndexEntry]) -> UpsertResult:
        """Insert or replace entries by chunk id; durable before returning."""
        result = UpsertResult()
        with self._lock:
            coerced = []
            for entry in entries:
                vec = _coerce_vector(entry.vector, self.dimension)
                coerced.append((entry.chunk, vec))
            for chunk, vec in coerced:
                if chunk.id in self._entries:
                    result.replaced += 1
                else:
                    result.inserted += 1
                self._entries[chunk.id] = (chunk, vec)
            if self.directory is not None and coerced:
                self._append_records(coerced)
            self._snapshot = None
        return result

    def _append_records(self, records) -> None:
        path = self.directory / ENTRIES_FILE
        with path.open("ab") as fh:
            for chunk, vec in records:
                _write_record(fh, chunk, vec)
            fh.flush()
            os.fsync(fh.fileno())

    def compact(self) -> None:
        """Rewrite the entries file with one record per live id."""
        if self.directory is None:
            return
        with self._lock:
            tmp = self.directory / (ENTRIES_FILE + ".tmp")
            with tmp.open("wb") as fh:
                for chunk, vec in self._entries.values():
                    _write_record(fh, chunk, vec)
                fh.flush()
                os.fsync(fh.fileno())
            tmp.replace(self.directory / ENTRIES_FILE)

    # -- reads ----------------------------------------------------------------

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, chunk_id: str) -> Chunk | None:
        entry = self._entries.get(chunk_id)
        return entry[0] if entry else None

    def _current_snapshot(self) -> _Snapshot:
        snap = self._snapshot
        if snap is not None:
            return snap
        with self._lock:
            if self._snapshot is None:
                ids = tuple(sorted(self._entries))
                chunks = tuple(self._entries[i][0] for i in ids)
                if ids:
                    matrix = np.stack(
                        [self._entries[i][1] for i in ids]
                    ).astype(np.float64)
                else:
                    matrix = np.zeros((0, self.dimension), dtype=np.float64)
                norms = np.sqrt(np.einsum("ij,ij->i", matrix, matrix))
                self._snapshot = _Snapshot(
                    ids=ids, chunks=chunks, matrix=matrix, norms=norms,
                    positions={cid: pos for pos, cid in enumerate(ids)},
                )
            return self._snapshot

    def _scores(self, matrix, norms, query) -> np.ndarray:
        if self.metric == "cosine":
            return kernels.cosine_scores(matrix, norms, query)
        if self.metric == "euclidean":
            return kernels.neg_euclidean_scores(matrix, query)
        return kernels.neg_manhattan_scores(matrix, query)

    def query(
        self,
        vector,
        filter: MetadataFilter | None = None,
        k: int = 4,
        expand_neighbors: bool = False,
    ) -> list[RetrievalResult]:
        """Top-k entries by similarity among those passing the filter.

        Ties break by chunk id ascending. With ``expand_neighbors`` each
        hit's neighbor chunks are appended after the main results,
        deduplicated, flagged, and not counted toward k; this realizes
        clause-level overlap at retrieval time.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        self.query_count += 1
        flt = filter or MetadataFilter()
        query = _coerce_vector(vector, self.dimension).astype(np.float64)
        snap = self._current_snapshot()
        if not snap.ids:
            return []

        if flt.is_empty():
            candidates = np.arange(len(snap.ids))
            matrix, norms = snap.matrix, snap.norms
        else:
            mask = [flt.matches(c.metadata) for c in snap.chunks]
            candidates = np.nonzero(mask)[0]
            if candidates.size == 0:
                return []
            matrix = np.ascontiguousarray(snap.matrix[candidates])
            norms = snap.norms[candidates]

        scores = self._scores(matrix, norms, query)
        order = sorted(range(len(candidates)), key=lambda i: (-scores[i], snap.ids[candidates[i]]))
        top = order[:k]

        results = [
            RetrievalResult(chunk=snap.chunks[candidates[i]], score=float(scores[i]))
            for i in top
        ]
        if expand_neighbors:
            seen = {r.chunk.id for r in results}
            for r in list(results):
                for nid in (r.chunk.metadata.neighbor_prev, r.chunk.metadata.neighbor_next):
                    if nid is None or nid in seen:
                        continue
                    pos = snap.positions.get(nid)
                    if pos is None:
                        continue
                    row = snap.matrix[pos]
                    nscore = self._scores(
                        row.reshape(1, -1), snap.norms[pos : pos + 1], query
                    )[0]
                    results.append(
                        RetrievalResult(chunk=snap.chunks[pos], score=float(nscore), neighbor=True)
                    )
                    seen.add(nid)
        return results


def _write_record(fh, chunk: Chunk, vec: np.ndarray) -> None:
    payload = json.dumps(chunk.to_dict(), ensure_ascii=False).encode("utf-8")
    fh.write(_RECORD_HEADER.pack(len(payload), vec.shape[0]))
    fh.write(payload)
    fh.write(vec.astype("<f4").tobytes())


def _read_records(fh, dimension: int):
    while True:
        header = fh.read(_RECORD_HEADER.size)
        if not header:
            return
        if len(header) < _RECORD_HEADER.size:
            raise IOError("truncated index record header")
        json_len, vec_len = _RECORD_HEADER.unpack(header)
        payload = fh.read(json_len)
        raw = fh.read(vec_len * 4)
        if len(payload) < json_len or len(raw) < vec_len * 4:
            raise IOError("truncated index record")
        if vec_len != dimension:
            raise DimensionMismatch(
                f"stored vector has dimension {vec_len}, index expects {dimension}"
            )
        chunk = Chunk.from_dict(json.loads(payload.decode("utf-8")))
        vec = np.frombuffer(raw, dtype="<f4").astype(np.float32)
        yield chunk, vec
