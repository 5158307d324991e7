"""Socially-aware conference session recommendation and its offline evaluation."""

from .community import RecommendationSet, Recommendation, Stream, resolve_conflicts, run_sarve
from .domain import Dataset, Thresholds, load, parse, serialize, validate_dataset

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "Recommendation",
    "RecommendationSet",
    "Stream",
    "Thresholds",
    "load",
    "parse",
    "resolve_conflicts",
    "run_sarve",
    "serialize",
    "validate_dataset",
]
