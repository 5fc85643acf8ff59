"""Attributed retrieval-augmented answering over local document collections.

The heavy lifting happens in the compiled ``_attrag`` extension. Every
function returns plain Python data (dicts, lists, strings) in the same JSON
shapes the HTTP API uses.
"""

from ._attrag import (
    AttragError,
    Service,
    SparseIndex,
    annotate_answer,
    chunk_document,
    normalize_relative_dates,
    parse_document,
    parse_structured_answer,
    rrf_fuse,
    segment_sentences,
)

__all__ = [
    "AttragError",
    "Service",
    "SparseIndex",
    "annotate_answer",
    "chunk_document",
    "normalize_relative_dates",
    "parse_document",
    "parse_structured_answer",
    "rrf_fuse",
    "segment_sentences",
]
