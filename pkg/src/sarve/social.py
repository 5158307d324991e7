"""Contact-based tie strength and presenter degree centrality."""

from __future__ import annotations

import math
import statistics
from collections.abc import Iterable
from dataclasses import dataclass
from fractions import Fraction

from .domain import ContactLog
from .similarity import decimal_threshold


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class TieStrength:
    presenter: str
    participant: str
    value: float
    exact: Fraction


@dataclass(frozen=True)
class CentralityScore:
    presenter: str
    degree: int


def tie_value(frequency: int, duration_min: int, T_total: int) -> Fraction:
    if T_total <= 0:
        raise ConfigurationError(f"time frame must be positive, got {T_total}")
    return Fraction(frequency) * Fraction(duration_min) / Fraction(T_total)


def tie_strength(log: ContactLog, p: str, x: str) -> TieStrength:
    """Contact frequency times contact duration over the time frame.

    A pair without a log entry has zero tie strength.
    """
    entry = log.get(p, x)
    if entry is None:
        exact = tie_value(0, 0, log.T_total)
    else:
        exact = tie_value(entry.frequency, entry.duration_min, log.T_total)
    return TieStrength(p, x, float(exact), exact)


def passes_beta(tie: TieStrength, beta: float) -> bool:
    return tie.exact >= decimal_threshold(beta)


def degree_centrality(log: ContactLog, p: str) -> CentralityScore:
    linked = {x for (presenter, x), c in log.entries.items() if presenter == p and c.is_link}
    return CentralityScore(p, len(linked))


def degree_table(log: ContactLog, presenters: Iterable[str]) -> dict[str, int]:
    """Degrees of all ``presenters`` in one pass over the log."""
    linked: dict[str, set[str]] = {p: set() for p in presenters}
    for (p, x), c in log.entries.items():
        if c.is_link and p in linked:
            linked[p].add(x)
    return {p: len(xs) for p, xs in linked.items()}


def passes_popularity(score: CentralityScore, threshold: int | None) -> bool:
    """``threshold=None`` means the popularity gate is switched off."""
    return threshold is not None and score.degree >= threshold


def resolve_degree_threshold(setting: int | str, degrees: Iterable[int]) -> int | None:
    """Turn a threshold setting into a concrete degree (``None`` = gate off)."""
    if setting == "off":
        return None
    if setting == "median":
        values = list(degrees)
        if not values:
            return None
        return math.ceil(statistics.median(values))
    return int(setting)
