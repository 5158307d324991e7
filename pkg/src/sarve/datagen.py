"""Seeded synthetic conference datasets with realistic contact, rating and schedule marginals."""

from __future__ import annotations

import itertools
import random
from collections import Counter
from collections.abc import Iterable
from dataclasses import asdict, dataclass, field

from .context import match_context
from .domain import (
    Availability,
    Contact,
    Dataset,
    DatasetError,
    Meta,
    Person,
    Rating,
    Role,
    Session,
)
from .similarity import pearson


class CapacityError(DatasetError):
    pass


@dataclass(frozen=True)
class GeneratorSpec:
    n_presenters: int = 60
    n_participants: int = 78
    contacts_per_presenter: int = 5
    duration_range: tuple[int, int] = (5, 80)
    frequency_range: tuple[int, int] = (1, 7)
    rating_range: tuple[int, int] = (1, 5)
    T_total: int = 720
    rooms: tuple[str, ...] = ("RoomA", "RoomB")
    # long talks run 20 min, short ones 15; each gets 5 min of questions
    talk_lengths: tuple[int, ...] = (20, 15, 15)
    question_min: int = 5
    n_interest_clusters: int = 4
    n_items: int = 32
    rating_density: float = 0.6
    rating_noise: float = 0.6
    in_cluster_contact_bias: float = 0.8
    windows_per_participant: tuple[int, int] = (2, 4)
    window_length: tuple[int, int] = (120, 360)
    seed: int = 0

    def __post_init__(self):
        for name in ("duration_range", "frequency_range", "rating_range", "windows_per_participant", "window_length"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} is empty: {lo} > {hi}")
        if self.n_interest_clusters < 1:
            raise ValueError("n_interest_clusters must be >= 1")
        if self.n_presenters < 0 or self.n_participants < 0:
            raise ValueError("person counts must be non-negative")
        if self.contacts_per_presenter > self.n_participants:
            raise ValueError("contacts_per_presenter exceeds the number of participants")
        if not self.rooms:
            raise ValueError("at least one room is required")
        if not 0 < self.rating_density <= 1:
            raise ValueError("rating_density must lie in (0, 1]")
        if self.n_items < 2:
            raise ValueError("n_items must be >= 2")

    def to_dict(self) -> dict:
        return asdict(self)


def _pack_sessions(lengths: list[int], rooms: tuple[str, ...], T_total: int) -> list[tuple[str, int]]:
    """First-fit by start time: each session goes to the room that frees up first."""
    free_at = {room: 0 for room in rooms}
    placed = []
    for length in lengths:
        room = min(rooms, key=lambda r: (free_at[r], rooms.index(r)))
        start = free_at[room]
        if start + length > T_total:
            raise CapacityError(
                f"{len(lengths)} sessions ({sum(lengths)} min) do not fit in {len(rooms)} rooms x {T_total} min"
            )
        placed.append((room, start))
        free_at[room] = start + length
    return placed


def generate(spec: GeneratorSpec = GeneratorSpec()) -> Dataset:
    """Build a dataset with latent interest clusters as its ground truth.

    Each cluster has its own preference profile over the keyword items;
    members rate a random subset of items near that profile, so pairs in
    one cluster correlate and pairs across clusters do not. Relevance
    labels are the same-cluster presenters' sessions the participant is
    available for.
    """
    rng = random.Random(spec.seed)
    lo_r, hi_r = spec.rating_range
    width_p = len(str(max(spec.n_presenters, 1)))
    width_x = len(str(max(spec.n_participants, 1)))
    presenters = [f"P{k:0{width_p}d}" for k in range(1, spec.n_presenters + 1)]
    participants = [f"X{k:0{width_x}d}" for k in range(1, spec.n_participants + 1)]
    items = [f"kw{k:02d}" for k in range(1, spec.n_items + 1)]

    n_clusters = spec.n_interest_clusters
    cluster = {pid: k % n_clusters for k, pid in enumerate(presenters)}
    cluster.update({pid: k % n_clusters for k, pid in enumerate(participants)})
    profiles = [[rng.randint(lo_r, hi_r) for _ in items] for _ in range(n_clusters)]

    ratings = []
    per_person = max(2, round(spec.rating_density * len(items)))
    for pid in presenters + participants:
        profile = profiles[cluster[pid]]
        chosen = sorted(rng.sample(range(len(items)), per_person))
        for idx in chosen:
            value = round(profile[idx] + rng.gauss(0.0, spec.rating_noise))
            ratings.append(Rating(pid, items[idx], min(max(value, lo_r), hi_r)))

    contacts = []
    by_cluster = {k: [x for x in participants if cluster[x] == k] for k in range(n_clusters)}
    for p in presenters:
        own = by_cluster[cluster[p]]
        picked: list[str] = []
        while len(picked) < spec.contacts_per_presenter:
            pool = own if own and rng.random() < spec.in_cluster_contact_bias else participants
            pool = [x for x in pool if x not in picked] or [x for x in participants if x not in picked]
            picked.append(rng.choice(pool))
        for x in picked:
            contacts.append(
                Contact(p, x, rng.randint(*spec.duration_range), rng.randint(*spec.frequency_range))
            )

    lengths = [rng.choice(spec.talk_lengths) + spec.question_min for _ in presenters]
    slots = _pack_sessions(lengths, spec.rooms, spec.T_total)
    sessions = [
        Session(f"S{k:0{width_p}d}", p, room, start, length)
        for k, (p, (room, start), length) in enumerate(zip(presenters, slots, lengths), start=1)
    ]

    availability = []
    for p, s in zip(presenters, sessions):
        availability.append(Availability(p, s.room, s.start, s.end))
    for x in participants:
        for _ in range(rng.randint(*spec.windows_per_participant)):
            length = min(rng.randint(*spec.window_length), spec.T_total)
            start = rng.randrange(0, spec.T_total - length + 1, 5) if spec.T_total - length >= 5 else 0
            availability.append(Availability(x, rng.choice(spec.rooms), start, start + length))
    availability = sorted(set(availability), key=lambda a: (a.person, a.room, a.start, a.end))

    windows: dict[str, list] = {}
    for a in availability:
        windows.setdefault(a.person, []).append(a.window)
    relevance = [
        (x, s.session_id)
        for x in participants
        for s in sessions
        if cluster[s.presenter] == cluster[x] and match_context(windows.get(x, ()), s, x).matched
    ]

    persons = [Person(p, Role.PRESENTER) for p in presenters] + [Person(x, Role.PARTICIPANT) for x in participants]
    return Dataset(
        persons=tuple(persons),
        items=tuple(items),
        ratings=tuple(ratings),
        contacts=tuple(contacts),
        sessions=tuple(sessions),
        availability=tuple(availability),
        meta=Meta(spec.T_total, tuple(spec.rooms)),
        relevance=tuple(relevance),
    )


def provenance(spec: GeneratorSpec, tool_version: str) -> dict:
    return {"generator": spec.to_dict(), "seed": spec.seed, "tool_version": tool_version}


# -- summaries ----------------------------------------------------------------


@dataclass(frozen=True)
class DistributionSummary:
    durations: dict[int, int] = field(default_factory=dict)
    ratings: dict[int, int] = field(default_factory=dict)
    frequencies: dict[int, int] = field(default_factory=dict)

    def panels(self):
        return (
            ("contact_duration_min", self.durations),
            ("tagged_rating", self.ratings),
            ("contact_frequency", self.frequencies),
        )

    def to_text(self) -> str:
        lines = ["panel\tvalue\tcount"]
        for name, hist in self.panels():
            lines += [f"{name}\t{value}\t{count}" for value, count in sorted(hist.items())]
        return "\n".join(lines) + "\n"


def summarize(dataset: Dataset) -> DistributionSummary:
    """Histograms of contact durations, tagged ratings and contact frequencies."""
    return DistributionSummary(
        durations=dict(sorted(Counter(c.duration_min for c in dataset.contacts).items())),
        ratings=dict(sorted(Counter(r.value for r in dataset.ratings).items())),
        frequencies=dict(sorted(Counter(c.frequency for c in dataset.contacts).items())),
    )


def cluster_separation(dataset: Dataset, members: dict[str, int]) -> tuple[float, float]:
    """Mean pairwise similarity within and across the given clusters (defined pairs only)."""
    within, across = [], []
    matrix = dataset.rating_matrix
    for a, b in itertools.combinations(sorted(members), 2):
        value = pearson(matrix, a, b).value
        if value is None:
            continue
        (within if members[a] == members[b] else across).append(value)
    mean = lambda xs: sum(xs) / len(xs) if xs else float("nan")  # noqa: E731
    return mean(within), mean(across)


def latent_clusters(spec: GeneratorSpec, persons: Iterable[str] | None = None) -> dict[str, int]:
    """Recover the cluster assignment ``generate`` used (it is positional)."""
    width_p = len(str(max(spec.n_presenters, 1)))
    width_x = len(str(max(spec.n_participants, 1)))
    out = {f"P{k + 1:0{width_p}d}": k % spec.n_interest_clusters for k in range(spec.n_presenters)}
    out.update({f"X{k + 1:0{width_x}d}": k % spec.n_interest_clusters for k in range(spec.n_participants)})
    if persons is not None:
        wanted = set(persons)
        out = {k: v for k, v in out.items() if k in wanted}
    return out
