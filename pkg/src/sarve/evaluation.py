"""Offline evaluation: train/test split, confusion counts, P/R/F and threshold sweeps."""

from __future__ import annotations

import math
import random
from collections.abc import Callable, Hashable, Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Any

from .community import (
    RecommendationSet,
    Stream,
    run_pearson_only,
    run_popularity_only,
    run_sarve,
)
from .context import match_context
from .domain import Dataset, DatasetError, Thresholds, validate_dataset
from .similarity import passes_gamma, pearson
from .social import passes_beta, tie_strength

UNIVERSE_NOTE = "decision universe = every (participant, session) pair"
TRUTH_MODES = ("labels", "paper")
AXES = {"gamma": Stream.CONTEXT, "beta": Stream.RELATIONS}


class SplitError(DatasetError):
    pass


# -- split --------------------------------------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")


def _quotas(sizes: dict[Hashable, int], fraction: float, lo: Callable[[int], int], hi: Callable[[int], int]):
    """Per-group train counts whose total is as close to ``fraction`` of all records as the bounds allow."""
    target = round(fraction * sum(sizes.values()))
    quota, remainder = {}, {}
    for g, n in sizes.items():
        raw = fraction * n
        quota[g] = min(max(math.floor(raw), lo(n)), hi(n))
        remainder[g] = raw - math.floor(raw)
    missing = target - sum(quota.values())
    if missing > 0:
        for g in sorted(sizes, key=lambda g: (-remainder[g], g)):
            if missing == 0:
                break
            if quota[g] < hi(sizes[g]):
                quota[g] += 1
                missing -= 1
    elif missing < 0:
        for g in sorted(sizes, key=lambda g: (remainder[g], g)):
            if missing == 0:
                break
            if quota[g] > lo(sizes[g]):
                quota[g] -= 1
                missing += 1
    return quota


def _stratify(records, group_of, fraction, rng, lo, hi):
    groups: dict[str, list] = {}
    for rec in records:
        groups.setdefault(group_of(rec), []).append(rec)
    quota = _quotas({g: len(v) for g, v in groups.items()}, fraction, lo, hi)
    train, test = [], []
    for g in sorted(groups):
        members = groups[g]
        rng.shuffle(members)
        train.extend(members[: quota[g]])
        test.extend(members[quota[g] :])
    return tuple(train), tuple(test)


def split(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Stratified record-level split.

    Ratings are stratified per person so everybody keeps at least one
    rating on each side; contacts are stratified per participant. The
    training half carries no relevance labels, the test half carries all of
    them.
    """
    ratings = sorted(dataset.ratings, key=lambda r: (r.person, r.item))
    counts: dict[str, int] = {}
    for r in ratings:
        counts[r.person] = counts.get(r.person, 0) + 1
    for person in sorted(counts):
        if counts[person] < 2:
            raise SplitError(f"person {person!r} has {counts[person]} rating(s); need at least 2 to stratify")
    rng = random.Random(spec.seed)
    r_train, r_test = _stratify(
        ratings, lambda r: r.person, spec.train_fraction, rng, lo=lambda n: 1, hi=lambda n: n - 1
    )
    contacts = sorted(dataset.contacts, key=lambda c: (c.participant, c.presenter))
    c_train, c_test = _stratify(
        contacts, lambda c: c.participant, spec.train_fraction, rng, lo=lambda n: 0, hi=lambda n: n
    )
    train = dataset.replace(ratings=r_train, contacts=c_train, relevance=())
    test = dataset.replace(ratings=r_test, contacts=c_test)
    return train, test


# -- confusion counts and metrics ---------------------------------------------


@dataclass(frozen=True)
class ConfusionCounts:
    e: int  # true positives
    f: int  # false positives
    g: int  # false negatives
    h: int  # true negatives

    @property
    def total(self) -> int:
        return self.e + self.f + self.g + self.h


@dataclass(frozen=True)
class MetricPoint:
    threshold_value: float | None
    precision: float | None
    recall: float | None
    f_measure: float | None
    counts: ConfusionCounts | None = None


def decision_universe(dataset: Dataset) -> set[tuple[str, str]]:
    return {(p, s.session_id) for p in dataset.participants for s in dataset.sessions}


def score(
    recs: RecommendationSet | Iterable[tuple[str, str]],
    relevant: Iterable[tuple[str, str]],
    universe: Iterable[tuple[str, str]],
    stream: Stream | str | None = None,
) -> ConfusionCounts:
    recommended = recs.pairs(stream) if isinstance(recs, RecommendationSet) else set(recs)
    relevant = set(relevant)
    universe = set(universe)
    stray = (recommended | relevant) - universe
    if stray:
        raise ValueError(f"{len(stray)} pairs fall outside the decision universe, e.g. {min(stray)}")
    e = len(recommended & relevant)
    f = len(recommended - relevant)
    g = len(relevant - recommended)
    return ConfusionCounts(e, f, g, len(universe) - e - f - g)


def _ratio(num: float, den: float) -> float | None:
    return num / den if den else None


def metrics(c: ConfusionCounts, threshold_value: float | None = None) -> MetricPoint:
    """Precision, recall and their harmonic mean; ``None`` where a denominator is zero."""
    p = _ratio(c.e, c.e + c.f)
    r = _ratio(c.e, c.e + c.g)
    f = None
    if p is not None and r is not None:
        f = _ratio(2 * p * r, p + r)
    return MetricPoint(threshold_value, p, r, f, c)


def f_measure(precision: float, recall: float) -> float | None:
    return _ratio(2 * precision * recall, precision + recall)


# -- ground truth -------------------------------------------------------------


def paper_truth(dataset: Dataset, thresholds: Thresholds) -> set[tuple[str, str]]:
    """Sessions backed by similar ratings AND a strong tie, within context.

    Circular when scored against the same gates; offered for comparison only.
    """
    matrix, log = dataset.rating_matrix, dataset.contact_log
    out = set()
    for i in dataset.participants:
        windows = dataset.profile(i)
        for j in dataset.presenters:
            sim = pearson(matrix, j, i)
            if not passes_gamma(sim, thresholds.gamma):
                continue
            if not passes_beta(tie_strength(log, j, i), thresholds.beta):
                continue
            for s in dataset.sessions_by_presenter.get(j, ()):
                if match_context(windows, s, i).matched:
                    out.add((i, s.session_id))
    return out


def relevant_pairs(dataset: Dataset, thresholds: Thresholds, truth: str = "labels") -> set[tuple[str, str]]:
    if truth == "labels":
        return set(dataset.relevance)
    if truth == "paper":
        return paper_truth(dataset, thresholds)
    raise ValueError(f"unknown truth mode {truth!r}; expected one of {TRUTH_MODES}")


# -- sweeps -------------------------------------------------------------------


def _with_axis(thresholds: Thresholds, axis: str, value: float) -> Thresholds:
    return replace(thresholds, **{axis: value})


def _sweep_point(args):
    dataset, thresholds, stream, method = args
    runner = {"sarve": run_sarve, "pearson-only": run_pearson_only, "popularity-only": run_popularity_only}[method]
    if method == "sarve":
        recs = runner(dataset, thresholds, validate=False)
    else:
        recs = runner(dataset, thresholds)
    return recs.pairs(stream)


def sweep(
    dataset: Dataset,
    axis: str,
    grid: Sequence[float],
    thresholds: Thresholds,
    split_spec: SplitSpec | None = None,
    truth: str = "labels",
    method: str = "sarve",
    workers: int = 1,
) -> list[MetricPoint]:
    """One metric point per gridpoint of ``axis``, other thresholds held fixed.

    With ``split_spec`` the recommender sees only the training records.
    Along the ascending grid the recommended set must shrink whenever that
    is guaranteed (the gamma axis, or beta with the popularity gate off);
    a violation raises ``AssertionError``.
    """
    if axis not in AXES:
        raise ValueError(f"axis must be one of {sorted(AXES)}, got {axis!r}")
    grid = list(grid)
    if grid != sorted(grid):
        raise ValueError("grid must be sorted ascending")
    report = validate_dataset(dataset)
    if not report.ok:
        raise DatasetError(f"refusing unvalidated dataset: {report.violations[0]}")
    stream = AXES[axis]
    relevant = relevant_pairs(dataset, thresholds, truth)
    universe = decision_universe(dataset)
    source = split(dataset, split_spec)[0] if split_spec is not None else dataset

    jobs = [(source, _with_axis(thresholds, axis, v), stream, method) for v in grid]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            recommended = list(pool.map(_sweep_point, jobs))
    else:
        recommended = [_sweep_point(job) for job in jobs]

    guaranteed = axis == "gamma" or thresholds.deg_cent_threshold == "off"
    if guaranteed and method == "sarve":
        for lo, hi, a, b in zip(grid, grid[1:], recommended, recommended[1:]):
            if not b <= a:
                raise AssertionError(f"recommended set grew between {axis}={lo} and {axis}={hi}")

    return [metrics(score(rec, relevant, universe), v) for v, rec in zip(grid, recommended)]


def run_baselines(dataset: Dataset, thresholds: Thresholds, workers: int = 1) -> dict[str, RecommendationSet]:
    return {
        "pearson-only": run_pearson_only(dataset, thresholds, workers),
        "popularity-only": run_popularity_only(dataset, thresholds, workers),
    }


# -- full evaluation report ---------------------------------------------------


@dataclass(frozen=True)
class EvalRow:
    method: str
    stream: str
    point: MetricPoint


def evaluate(
    dataset: Dataset,
    thresholds: Thresholds,
    split_spec: SplitSpec | None = None,
    truth: str = "labels",
    workers: int = 1,
) -> list[EvalRow]:
    """Score SARVE's streams and the two baselines against the same truth."""
    report = validate_dataset(dataset)
    if not report.ok:
        raise DatasetError(f"refusing unvalidated dataset: {report.violations[0]}")
    relevant = relevant_pairs(dataset, thresholds, truth)
    universe = decision_universe(dataset)
    source = split(dataset, split_spec)[0] if split_spec is not None else dataset
    recs = run_sarve(source, thresholds, workers)
    baselines = run_baselines(source, thresholds, workers)
    rows = [
        EvalRow("sarve", "context", metrics(score(recs, relevant, universe, Stream.CONTEXT))),
        EvalRow("sarve", "relations", metrics(score(recs, relevant, universe, Stream.RELATIONS))),
        EvalRow("sarve", "combined", metrics(score(recs, relevant, universe))),
        EvalRow("pearson-only", "context", metrics(score(baselines["pearson-only"], relevant, universe, Stream.CONTEXT))),
        EvalRow(
            "popularity-only",
            "relations",
            metrics(score(baselines["popularity-only"], relevant, universe, Stream.RELATIONS)),
        ),
    ]
    return rows


def fmt(value: Any) -> str:
    if value is None:
        return "undefined"
    if isinstance(value, float):
        return repr(value)
    return str(value)


METRIC_COLUMNS = ("threshold", "precision", "recall", "f_measure", "e", "f", "g", "h")


def metric_cells(point: MetricPoint) -> list[str]:
    c = point.counts
    counts = [c.e, c.f, c.g, c.h] if c is not None else [None] * 4
    return [fmt(v) for v in (point.threshold_value, point.precision, point.recall, point.f_measure, *counts)]


def format_sweep(points: Iterable[MetricPoint]) -> str:
    lines = ["\t".join(METRIC_COLUMNS)]
    lines += ["\t".join(metric_cells(p)) for p in points]
    return "\n".join(lines) + "\n"


def format_evaluation(rows: Iterable[EvalRow]) -> str:
    lines = ["method\tstream\t" + "\t".join(METRIC_COLUMNS[1:])]
    for row in rows:
        lines.append(f"{row.method}\t{row.stream}\t" + "\t".join(metric_cells(row.point)[1:]))
    return "\n".join(lines) + "\n"
