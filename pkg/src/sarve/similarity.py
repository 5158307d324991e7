"""User-based collaborative filtering between presenters and participants."""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass, field
from fractions import Fraction

from .domain import RatingMatrix

log = logging.getLogger(__name__)

MIN_OVERLAP = 2


@dataclass(frozen=True)
class SimilarityScore:
    presenter: str
    participant: str
    value: float | None  # None: not enough co-rated evidence, or a flat centered vector
    co_rated_count: int
    # exact form: value == num / sqrt(den_sq)
    num: int = field(default=0, compare=False, repr=False)
    den_sq: int = field(default=1, compare=False, repr=False)

    @property
    def defined(self) -> bool:
        return self.value is not None


def pearson(matrix: RatingMatrix, c: str, d: str, min_overlap: int = MIN_OVERLAP) -> SimilarityScore:
    """Pearson correlation of ``c`` and ``d`` over the items both have rated.

    Each person is centered on their mean over *all* their ratings, not just
    the co-rated ones. The arithmetic is done on integers scaled by the row
    sizes, so a zero-variance vector is detected exactly.
    """
    row_c = matrix.row(c)
    row_d = matrix.row(d)
    common = sorted(row_c.keys() & row_d.keys())
    n = len(common)
    if n < min_overlap or n == 0:
        return SimilarityScore(c, d, None, n)
    # n_c * (r - mean_c) is an integer for integer ratings
    n_c, s_c = len(row_c), sum(row_c.values())
    n_d, s_d = len(row_d), sum(row_d.values())
    a = [n_c * row_c[i] - s_c for i in common]
    b = [n_d * row_d[i] - s_d for i in common]
    num = sum(x * y for x, y in zip(a, b))
    den_a = sum(x * x for x in a)
    den_b = sum(y * y for y in b)
    if den_a == 0 or den_b == 0:
        return SimilarityScore(c, d, None, n)
    value = _ratio_over_root(num, den_a * den_b)
    if not -1.0 <= value <= 1.0:
        log.debug("clamping similarity %r for (%s, %s)", value, c, d)
        value = max(-1.0, min(1.0, value))
    return SimilarityScore(c, d, value, n, num, den_a * den_b)


def _ratio_over_root(num: int, den: int) -> float:
    # Float of num / sqrt(den) that depends only on the exact value, so equal
    # correlations from different rating vectors compare equal.
    root = math.isqrt(den)
    if root * root == den:
        return num / root
    return math.copysign(math.sqrt(Fraction(num * num, den)), num)


def rank_key(score: SimilarityScore):
    return (-score.value, -score.co_rated_count, score.participant)


def k_most_similar(
    matrix: RatingMatrix, target: str, candidates: Iterable[str], k: int, min_overlap: int = MIN_OVERLAP
) -> list[SimilarityScore]:
    """The ``k`` candidates most similar to ``target``; undefined scores are skipped.

    Ties: higher co-rated count first, then candidate id ascending.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    scores = [pearson(matrix, target, x, min_overlap) for x in set(candidates)]
    defined = sorted((s for s in scores if s.defined), key=rank_key)
    return defined[:k]


def decimal_threshold(threshold: float) -> Fraction:
    """The threshold as the decimal the user wrote: 0.8 means 4/5, not the nearest double."""
    return Fraction(repr(float(threshold)))


def passes_gamma(score: SimilarityScore, gamma: float) -> bool:
    """``value >= gamma``, decided exactly so boundary scores are never lost to rounding."""
    if score.value is None:
        return False
    t = decimal_threshold(gamma)
    num, den_sq = score.num, score.den_sq
    if t >= 0:
        return num >= 0 and num * num >= t * t * den_sq
    return num >= 0 or num * num <= t * t * den_sq
