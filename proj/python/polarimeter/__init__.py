"""Stance labeling and polarization analysis for tweet corpora."""

from ._core import (
    ConfigError,
    ParseError,
    Snapshot,
    StageError,
    UrlError,
    bin_of,
    compute_valence,
    cosine,
    default_keywords,
    normalize_handle,
    normalize_hashtag,
    normalize_url,
    parse_tweet,
    run_pipeline,
    run_stage,
    stage_names,
    synth,
)

__all__ = [
    "ConfigError",
    "ParseError",
    "Snapshot",
    "StageError",
    "UrlError",
    "bin_of",
    "compute_valence",
    "cosine",
    "default_keywords",
    "normalize_handle",
    "normalize_hashtag",
    "normalize_url",
    "parse_tweet",
    "run_pipeline",
    "run_stage",
    "stage_names",
    "synth",
]
