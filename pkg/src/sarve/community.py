"""Distributed community detection: the two SARVE recommendation streams.

Every participant is checked against every presenter. The context stream
admits a presenter's sessions when the rating similarity clears ``gamma``
and the participant's availability covers the session; the relations stream
does the same for tie strength clearing ``beta`` or the presenter clearing
the popularity (degree) threshold.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Mapping
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

from .context import match_context, relation_edges
from .domain import Dataset, DatasetError, Session, Thresholds, validate_dataset
from .similarity import k_most_similar, passes_gamma, pearson
from .social import (
    CentralityScore,
    degree_table,
    passes_beta,
    passes_popularity,
    resolve_degree_threshold,
    tie_strength,
)


class Stream(str, Enum):
    CONTEXT = "context"
    RELATIONS = "relations"


@dataclass(frozen=True)
class Recommendation:
    participant: str
    session: str
    presenter: str
    stream: Stream
    score: float
    rank: int = 0
    gate: str = ""  # predicate(s) that admitted it: "gamma", "beta", "popularity", "beta+popularity"
    popularity_only: bool = False
    degree: int = 0

    @property
    def key(self) -> tuple[str, str, Stream]:
        return (self.participant, self.session, self.stream)


@dataclass(frozen=True)
class RecommendationSet:
    context: Mapping[str, tuple[Recommendation, ...]]
    relations: Mapping[str, tuple[Recommendation, ...]]
    thresholds: Thresholds
    degree_threshold: int | None = None
    # context-matched pairs that failed their stream's gate
    weak: Mapping[str, int] = field(default_factory=lambda: {"context": 0, "relations": 0})

    def stream(self, stream: Stream | str) -> Mapping[str, tuple[Recommendation, ...]]:
        return self.context if Stream(stream) is Stream.CONTEXT else self.relations

    def records(self, stream: Stream | str | None = None) -> list[Recommendation]:
        streams = [Stream(stream)] if stream is not None else [Stream.CONTEXT, Stream.RELATIONS]
        out = []
        for s in streams:
            table = self.stream(s)
            for participant in sorted(table):
                out.extend(table[participant])
        return out

    def pairs(self, stream: Stream | str | None = None) -> set[tuple[str, str]]:
        return {(r.participant, r.session) for r in self.records(stream)}

    def __len__(self) -> int:
        return len(self.records())


def _context_sort_key(r: Recommendation):
    return (-r.score, r.session)


def _relations_sort_key(r: Recommendation):
    return (r.popularity_only, -r.score, -r.degree, r.session)


def _rank(recs: list[Recommendation], key, top_n: int) -> tuple[Recommendation, ...]:
    ordered = sorted(recs, key=key)[:top_n]
    return tuple(
        Recommendation(r.participant, r.session, r.presenter, r.stream, r.score, rank, r.gate, r.popularity_only, r.degree)
        for rank, r in enumerate(ordered, start=1)
    )


@dataclass(frozen=True)
class _Plan:
    """Everything a worker needs to process a slice of participants."""

    dataset: Dataset
    thresholds: Thresholds
    presenters: tuple[str, ...]
    degrees: Mapping[str, int]
    degree_threshold: int | None
    force_context: bool = False
    use_tie_gate: bool = True


def _participant_streams(plan: _Plan, i: str):
    ds, th = plan.dataset, plan.thresholds
    matrix, log = ds.rating_matrix, ds.contact_log
    windows = ds.profile(i)
    eligible = set(plan.presenters)
    if th.k_neighbors is not None:
        eligible = {s.participant for s in k_most_similar(matrix, i, plan.presenters, th.k_neighbors)}

    context, relations = [], []
    weak_context = weak_relations = 0
    for j in plan.presenters:
        if j == i:
            continue
        sessions = ds.sessions_by_presenter.get(j, ())
        if not sessions:
            continue
        matched = [s for s in sessions if plan.force_context or match_context(windows, s, i).matched]

        sim = pearson(matrix, j, i) if i in matrix and j in matrix else None
        if sim is not None and j in eligible and passes_gamma(sim, th.gamma):
            context.extend(Recommendation(i, s.session_id, j, Stream.CONTEXT, sim.value, gate="gamma") for s in matched)
        else:
            weak_context += len(matched)

        tie = tie_strength(log, j, i)
        centrality = CentralityScore(j, plan.degrees[j])
        by_tie = plan.use_tie_gate and passes_beta(tie, th.beta)
        by_popularity = passes_popularity(centrality, plan.degree_threshold)
        if by_tie or by_popularity:
            gate = "+".join(g for g, ok in (("beta", by_tie), ("popularity", by_popularity)) if ok)
            relations.extend(
                Recommendation(
                    i, s.session_id, j, Stream.RELATIONS, tie.value, gate=gate,
                    popularity_only=not by_tie, degree=centrality.degree,
                )
                for s in matched
            )
        else:
            weak_relations += len(matched)
    return (
        i,
        _rank(context, _context_sort_key, th.top_n),
        _rank(relations, _relations_sort_key, th.top_n),
        weak_context,
        weak_relations,
    )


def _process_chunk(plan: _Plan, participants: tuple[str, ...]):
    return [_participant_streams(plan, i) for i in participants]


def _chunks(seq: tuple[str, ...], n: int) -> list[tuple[str, ...]]:
    size = max(1, -(-len(seq) // n))
    return [seq[k : k + size] for k in range(0, len(seq), size)]


def _run(plan: _Plan, workers: int) -> RecommendationSet:
    participants = plan.dataset.participants
    if workers > 1 and len(participants) > 1:
        chunks = _chunks(participants, workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [row for part in pool.map(_process_chunk, [plan] * len(chunks), chunks) for row in part]
    else:
        results = _process_chunk(plan, participants)
    results.sort(key=lambda row: row[0])
    context = {i: ctx for i, ctx, _, _, _ in results if ctx}
    relations = {i: rel for i, _, rel, _, _ in results if rel}
    weak = {"context": sum(r[3] for r in results), "relations": sum(r[4] for r in results)}
    return RecommendationSet(context, relations, plan.thresholds, plan.degree_threshold, weak)


def _ensure_valid(dataset: Dataset) -> None:
    report = validate_dataset(dataset)
    if not report.ok:
        first = report.violations[0]
        raise DatasetError(f"refusing unvalidated dataset ({len(report.violations)} violations; first: {first})")


def _plan(dataset: Dataset, thresholds: Thresholds, **kwargs) -> _Plan:
    presenters = dataset.presenters
    degrees = degree_table(dataset.contact_log, presenters)
    setting = kwargs.pop("degree_setting", thresholds.deg_cent_threshold)
    threshold = resolve_degree_threshold(setting, degrees.values())
    return _Plan(dataset, thresholds, presenters, degrees, threshold, **kwargs)


def run_sarve(dataset: Dataset, thresholds: Thresholds, workers: int = 1, validate: bool = True) -> RecommendationSet:
    """Generate the context and relations streams for every participant.

    Output does not depend on ``workers``.
    """
    if validate:
        _ensure_valid(dataset)
    return _run(_plan(dataset, thresholds), workers)


def run_pearson_only(dataset: Dataset, thresholds: Thresholds, workers: int = 1) -> RecommendationSet:
    """Baseline: the similarity stream with contextual post-filtering switched off."""
    _ensure_valid(dataset)
    recs = _run(_plan(dataset, thresholds, force_context=True), workers)
    return replace(recs, relations={}, weak={"context": recs.weak["context"], "relations": 0})


def run_popularity_only(dataset: Dataset, thresholds: Thresholds, workers: int = 1) -> RecommendationSet:
    """Baseline: relations admitted by presenter degree alone (tie gate removed)."""
    _ensure_valid(dataset)
    setting = thresholds.deg_cent_threshold
    if setting == "off":
        setting = "median"
    recs = _run(_plan(dataset, thresholds, use_tie_gate=False, degree_setting=setting), workers)
    return replace(recs, context={}, weak={"context": 0, "relations": recs.weak["relations"]})


# -- conflict resolution ------------------------------------------------------


def combined_score(recs: Iterable[Recommendation]) -> float:
    """Strongest evidence across streams, each mapped onto [0, 1]."""
    best = 0.0
    for r in recs:
        if r.stream is Stream.CONTEXT:
            best = max(best, (r.score + 1.0) / 2.0)
        else:
            best = max(best, min(max(r.score, 0.0), 1.0))
    return best


@dataclass(frozen=True)
class ScheduledSession:
    session: str
    score: float
    conflict_with: tuple[str, ...] = ()


@dataclass(frozen=True)
class ScheduleProposal:
    kept: Mapping[str, tuple[ScheduledSession, ...]]
    dropped: Mapping[str, tuple[ScheduledSession, ...]]


def resolve_conflicts(recs: RecommendationSet, sessions: Mapping[str, Session] | Iterable[Session]) -> ScheduleProposal:
    """Greedy conflict-free schedule per participant.

    Sessions are taken in descending combined score (session id breaks
    ties); one that overlaps an already kept session in time, in any room,
    is dropped and annotated with the sessions it clashes with.
    """
    if not isinstance(sessions, Mapping):
        sessions = {s.session_id: s for s in sessions}
    by_participant: dict[str, dict[str, list[Recommendation]]] = {}
    for r in recs.records():
        by_participant.setdefault(r.participant, {}).setdefault(r.session, []).append(r)

    kept_all, dropped_all = {}, {}
    for participant in sorted(by_participant):
        scored = sorted(
            ((combined_score(rs), sid) for sid, rs in by_participant[participant].items()),
            key=lambda t: (-t[0], t[1]),
        )
        kept: list[ScheduledSession] = []
        dropped: list[ScheduledSession] = []
        for score, sid in scored:
            clash = tuple(k.session for k in kept if sessions[k.session].overlaps(sessions[sid]))
            if clash:
                dropped.append(ScheduledSession(sid, score, clash))
            else:
                kept.append(ScheduledSession(sid, score))
        kept_all[participant] = tuple(sorted(kept, key=lambda k: (sessions[k.session].start, k.session)))
        dropped_all[participant] = tuple(dropped)
    return ScheduleProposal(kept_all, dropped_all)


# -- canonical text forms -----------------------------------------------------

RECORD_HEADER = "participant\tsession\tstream\tscore\trank\tgate"


def format_records(records: Iterable[Recommendation]) -> str:
    lines = [
        f"{r.participant}\t{r.session}\t{r.stream.value}\t{r.score!r}\t{r.rank}\t{r.gate}"
        for r in records
    ]
    return "".join(line + "\n" for line in lines)


def format_stream(recs: RecommendationSet, stream: Stream | str) -> str:
    return format_records(recs.records(stream))


def serialize_recommendations(recs: RecommendationSet, provenance: Mapping | None = None) -> str:
    header = {
        "thresholds": recs.thresholds.to_dict(),
        "resolved_degree_threshold": recs.degree_threshold,
        "weak": dict(recs.weak),
    }
    if provenance:
        header["config"] = dict(provenance)
    text = "# " + json.dumps(header, sort_keys=True) + "\n" + RECORD_HEADER + "\n"
    return text + format_records(recs.records())


def explain(dataset: Dataset, recs: RecommendationSet) -> str:
    """Audit trail: every recommendation followed by its relation edges."""
    out = []
    for r in recs.records():
        session = dataset.session_index[r.session]
        out.append(f"{r.participant} -> {r.session} [{r.stream.value} #{r.rank} via {r.gate}, score {r.score!r}]\n")
        for edge in relation_edges(dataset, r.presenter, r.participant, session):
            out.append(f"    {edge}\n")
    return "".join(out)
