"""Homograph disambiguation toolkit (Python bindings)."""

from ._hgd import (
    ArgumentError,
    ConfigError,
    Dataset,
    DegenerateVectorError,
    DimensionError,
    EmbeddingRecord,
    EmbeddingStore,
    EncodingError,
    Error,
    FitError,
    FormatError,
    HomographRecord,
    InsufficientDataError,
    LookupError,
    ParseError,
    SplitError,
    compare_embeddings,
    compare_models,
    compute_metrics,
    cosine,
    cosine_analysis,
    mean_pairwise_cosine,
    parse_dataset,
    phoneme_count_distribution,
    read_store,
    run_cli,
    sentence_length_histogram,
    split,
    synthetic_dataset,
    synthetic_store,
    validate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
