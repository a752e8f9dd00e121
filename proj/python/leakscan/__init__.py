"""Corpus duplication audit and leakage-controlled evaluation."""

from ._leakscan import (
    IoError,
    ValidationError,
    __version__,
    audit,
    extract_context,
    jaccard_multiset,
    jaccard_set,
    run_pipeline,
    sha256_file,
    synth,
    tokenize,
)

__all__ = [
    "IoError",
    "ValidationError",
    "__version__",
    "audit",
    "extract_context",
    "jaccard_multiset",
    "jaccard_set",
    "run_pipeline",
    "sha256_file",
    "synth",
    "tokenize",
]
