"""Question answering over contract documents and contract-management data.

Combines clause-aware retrieval over contract texts with guarded
natural-language-to-SQL over a contracts database, orchestrated by a
router workflow and exposed as an HTTP service and CLI.
"""

__version__ = "0.1.0"
