"""Vector index: similarity kernels and the metadata-filtered store."""

from .store import IndexEntry, MetadataFilter, RetrievalResult, UpsertResult, VectorIndex

__all__ = [
    "IndexEntry",
    "MetadataFilter",
    "RetrievalResult",
    "UpsertResult",
    "VectorIndex",
]
