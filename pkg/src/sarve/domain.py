"""Core entities, the dataset container, schema validation and canonical I/O."""

from __future__ import annotations

import json
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any

SCHEMA_VERSION = 1
SECTIONS = ("persons", "items", "ratings", "contacts", "sessions", "availability", "meta")


class DatasetError(Exception):
    """Base class for dataset problems that stop processing."""


class DatasetParseError(DatasetError):
    """The dataset document is malformed; ``locus`` names where."""

    def __init__(self, message: str, locus: str):
        super().__init__(f"{locus}: {message}")
        self.locus = locus


class UndefinedMeanError(ValueError):
    pass


class Role(str, Enum):
    PARTICIPANT = "participant"
    PRESENTER = "presenter"


def normalize_room(room: str) -> str:
    return room.strip().casefold()


@dataclass(frozen=True)
class Person:
    id: str
    role: Role


@dataclass(frozen=True)
class Rating:
    person: str
    item: str
    value: int


@dataclass(frozen=True)
class Contact:
    presenter: str
    participant: str
    duration_min: int
    frequency: int

    @property
    def is_link(self) -> bool:
        return self.frequency >= 1 and self.duration_min > 0


@dataclass(frozen=True)
class Session:
    session_id: str
    presenter: str
    room: str
    start: int
    duration_min: int

    @property
    def end(self) -> int:
        return self.start + self.duration_min

    def overlaps(self, other: Session) -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class Window:
    room: str
    start: int
    end: int

    def contains(self, start: int, end: int) -> bool:
        return self.start <= start and end <= self.end


@dataclass(frozen=True)
class Availability:
    person: str
    room: str
    start: int
    end: int

    @property
    def window(self) -> Window:
        return Window(self.room, self.start, self.end)


@dataclass(frozen=True)
class Meta:
    T_total: int
    rooms: tuple[str, ...]
    schema_version: int = SCHEMA_VERSION


@dataclass(frozen=True)
class Thresholds:
    """Gate parameters for one recommendation run.

    ``deg_cent_threshold`` is an integer, ``"median"`` (resolved to the
    ceiling of the median presenter degree) or ``"off"`` (popularity gate
    disabled). ``k_neighbors=None`` lets every presenter into the context
    stream.
    """

    gamma: float = 0.6
    beta: float = 0.5
    deg_cent_threshold: int | str = "median"
    k_neighbors: int | None = None
    top_n: int = 10

    def __post_init__(self):
        for name in ("gamma", "beta"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValueError(f"{name} must be a finite number, got {value!r}")
        if not -1.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [-1, 1], got {self.gamma}")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        dct = self.deg_cent_threshold
        if isinstance(dct, str):
            if dct not in ("median", "off"):
                raise ValueError(f"deg_cent_threshold must be an integer, 'median' or 'off', got {dct!r}")
        elif isinstance(dct, bool) or not isinstance(dct, int) or dct < 0:
            raise ValueError(f"deg_cent_threshold must be a non-negative integer, got {dct!r}")
        if self.k_neighbors is not None and (not isinstance(self.k_neighbors, int) or self.k_neighbors < 1):
            raise ValueError(f"k_neighbors must be a positive integer, got {self.k_neighbors!r}")
        if isinstance(self.top_n, bool) or not isinstance(self.top_n, int) or self.top_n < 1:
            raise ValueError(f"top_n must be a positive integer, got {self.top_n!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "gamma": self.gamma,
            "beta": self.beta,
            "deg_cent_threshold": self.deg_cent_threshold,
            "k_neighbors": self.k_neighbors,
            "top_n": self.top_n,
        }


class RatingMatrix:
    """Sparse person x item rating table; absent cells are unrated."""

    def __init__(self, rows: Mapping[str, Mapping[str, int]], items: Iterable[str] = ()):
        self._rows = {person: dict(cells) for person, cells in rows.items()}
        cols = set(items)
        for cells in self._rows.values():
            cols.update(cells)
        self.items = tuple(sorted(cols))

    @classmethod
    def from_ratings(cls, persons: Iterable[str], ratings: Iterable[Rating], items: Iterable[str] = ()):
        rows: dict[str, dict[str, int]] = {p: {} for p in persons}
        for r in ratings:
            rows.setdefault(r.person, {})[r.item] = r.value
        return cls(rows, items)

    def __contains__(self, person: str) -> bool:
        return person in self._rows

    @property
    def persons(self) -> tuple[str, ...]:
        return tuple(self._rows)

    def row(self, person: str) -> dict[str, int]:
        try:
            return self._rows[person]
        except KeyError:
            raise KeyError(f"unknown person {person!r}") from None


def mean_rating(matrix: RatingMatrix, person: str) -> float:
    """Mean of the person's present ratings; absent cells do not count."""
    row = matrix.row(person)
    if not row:
        raise UndefinedMeanError(f"person {person!r} has no ratings")
    return math.fsum(row.values()) / len(row)


@dataclass(frozen=True)
class ContactLog:
    entries: Mapping[tuple[str, str], Contact]
    T_total: int

    @classmethod
    def from_contacts(cls, contacts: Iterable[Contact], T_total: int) -> ContactLog:
        return cls({(c.presenter, c.participant): c for c in contacts}, T_total)

    def get(self, presenter: str, participant: str) -> Contact | None:
        return self.entries.get((presenter, participant))


@dataclass(frozen=True)
class Dataset:
    persons: tuple[Person, ...]
    items: tuple[str, ...]
    ratings: tuple[Rating, ...]
    contacts: tuple[Contact, ...]
    sessions: tuple[Session, ...]
    availability: tuple[Availability, ...]
    meta: Meta
    # (participant, session_id) pairs marked relevant; ground truth for evaluation
    relevance: tuple[tuple[str, str], ...] = ()

    @cached_property
    def person_index(self) -> dict[str, Person]:
        return {p.id: p for p in self.persons}

    @cached_property
    def participants(self) -> tuple[str, ...]:
        return tuple(sorted(p.id for p in self.persons if p.role is Role.PARTICIPANT))

    @cached_property
    def presenters(self) -> tuple[str, ...]:
        return tuple(sorted(p.id for p in self.persons if p.role is Role.PRESENTER))

    @cached_property
    def rating_matrix(self) -> RatingMatrix:
        return RatingMatrix.from_ratings(sorted(self.person_index), self.ratings, self.items)

    @cached_property
    def contact_log(self) -> ContactLog:
        return ContactLog.from_contacts(self.contacts, self.meta.T_total)

    @cached_property
    def sessions_by_presenter(self) -> dict[str, tuple[Session, ...]]:
        out: dict[str, list[Session]] = {}
        for s in sorted(self.sessions, key=lambda s: s.session_id):
            out.setdefault(s.presenter, []).append(s)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def session_index(self) -> dict[str, Session]:
        return {s.session_id: s for s in self.sessions}

    @cached_property
    def profiles(self) -> dict[str, tuple[Window, ...]]:
        out: dict[str, list[Window]] = {}
        for a in self.availability:
            out.setdefault(a.person, []).append(a.window)
        return {k: tuple(sorted(v, key=lambda w: (w.room, w.start, w.end))) for k, v in out.items()}

    def profile(self, person: str) -> tuple[Window, ...]:
        return self.profiles.get(person, ())

    def replace(self, **changes) -> Dataset:
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return Dataset(**values)


# -- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    rule: str
    locus: str
    detail: str = ""

    def __str__(self) -> str:
        text = f"[{self.rule}] {self.locus}"
        return f"{text}: {self.detail}" if self.detail else text


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    # not fatal: the pipeline handles these (e.g. an unrated person gets undefined similarities)
    warnings: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def rules(self) -> set[str]:
        return {v.rule for v in self.violations}

    def __str__(self) -> str:
        if self.ok and not self.warnings:
            return "pass"
        lines = [str(v) for v in self.violations] + [f"warning {w}" for w in self.warnings]
        return "\n".join(lines)


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def validate_dataset(dataset: Dataset) -> ValidationReport:
    report = ValidationReport()
    bad = report.violations.append

    def v(rule, locus, detail=""):
        bad(Violation(rule, locus, detail))

    meta = dataset.meta
    T = meta.T_total
    t_ok = _is_int(T) and T > 0
    if not t_ok:
        v("T_total > 0", "meta.T_total", f"got {T!r}")
    if meta.schema_version != SCHEMA_VERSION:
        v("schema version", "meta.schema_version", f"expected {SCHEMA_VERSION}, got {meta.schema_version!r}")
    rooms = {normalize_room(r) for r in meta.rooms}
    if len(rooms) != len(meta.rooms):
        v("unique room", "meta.rooms", "duplicate room after normalization")

    seen: set[str] = set()
    roles: dict[str, Role] = {}
    for idx, p in enumerate(dataset.persons):
        locus = f"persons[{idx}]"
        if not p.id:
            v("non-empty id", locus)
        if p.id in seen:
            v("unique person id", locus, p.id)
        seen.add(p.id)
        roles[p.id] = p.role

    items = set(dataset.items)
    if len(items) != len(dataset.items):
        v("unique item", "items")

    rated: set[str] = set()
    cells: set[tuple[str, str]] = set()
    for idx, r in enumerate(dataset.ratings):
        locus = f"ratings[{idx}] ({r.person}, {r.item})"
        if r.person not in roles:
            v("person exists", locus, r.person)
        if r.item not in items:
            v("item declared", locus, r.item)
        if not _is_int(r.value) or not 1 <= r.value <= 5:
            v("rating ∈ [1,5]", locus, f"got {r.value!r}")
        if (r.person, r.item) in cells:
            v("one rating per cell", locus)
        cells.add((r.person, r.item))
        rated.add(r.person)
    for pid in sorted(roles):
        if pid not in rated:
            report.warnings.append(Violation("at least one rating per row", f"person {pid}"))

    pairs: set[tuple[str, str]] = set()
    for idx, c in enumerate(dataset.contacts):
        locus = f"contacts[{idx}] ({c.presenter}, {c.participant})"
        if c.presenter not in roles:
            v("person exists", locus, c.presenter)
        elif roles[c.presenter] is not Role.PRESENTER:
            v("contact presenter has presenter role", locus, c.presenter)
        if c.participant not in roles:
            v("person exists", locus, c.participant)
        if c.presenter == c.participant:
            v("no self contact", locus)
        if (c.presenter, c.participant) in pairs:
            v("one contact entry per pair", locus)
        pairs.add((c.presenter, c.participant))
        if not _is_int(c.duration_min) or c.duration_min < 0:
            v("duration ≥ 0", locus, f"got {c.duration_min!r}")
        elif t_ok and c.duration_min > T:
            v("duration ≤ T_total", locus, f"{c.duration_min} > {T}")
        if not _is_int(c.frequency) or c.frequency < 0:
            v("frequency ≥ 0 integer", locus, f"got {c.frequency!r}")
        elif _is_int(c.duration_min) and c.duration_min > 0 and c.frequency < 1:
            v("frequency ≥ 1 when duration > 0", locus)

    sids: set[str] = set()
    for idx, s in enumerate(dataset.sessions):
        locus = f"sessions[{idx}] ({s.session_id})"
        if not s.session_id:
            v("non-empty id", locus)
        if s.session_id in sids:
            v("unique session id", locus)
        sids.add(s.session_id)
        if s.presenter not in roles:
            v("person exists", locus, s.presenter)
        elif roles[s.presenter] is not Role.PRESENTER:
            v("session presenter has presenter role", locus, s.presenter)
        if normalize_room(s.room) not in rooms:
            v("room declared", locus, s.room)
        if not _is_int(s.start) or s.start < 0:
            v("start ≥ 0", locus, f"got {s.start!r}")
        if not _is_int(s.duration_min) or s.duration_min <= 0:
            v("duration_min > 0", locus, f"got {s.duration_min!r}")
        elif _is_int(s.start) and t_ok and s.end > T:
            v("start + duration_min ≤ T_total", locus, f"{s.end} > {T}")

    for idx, a in enumerate(dataset.availability):
        locus = f"availability[{idx}] ({a.person}, {a.room})"
        if a.person not in roles:
            v("person exists", locus, a.person)
        if normalize_room(a.room) not in rooms:
            v("room declared", locus, a.room)
        if not (_is_int(a.start) and _is_int(a.end)) or a.start >= a.end:
            v("window start < end", locus, f"[{a.start!r}, {a.end!r}]")
        elif a.start < 0 or (t_ok and a.end > T):
            v("window within [0, T_total]", locus, f"[{a.start}, {a.end}]")

    for idx, (pid, sid) in enumerate(dataset.relevance):
        locus = f"relevance[{idx}] ({pid}, {sid})"
        if pid not in roles:
            v("person exists", locus, pid)
        if sid not in sids:
            v("session exists", locus, sid)
    if len(set(dataset.relevance)) != len(dataset.relevance):
        v("unique relevance label", "relevance")
    return report


# -- canonical document -------------------------------------------------------


def to_document(dataset: Dataset) -> dict[str, Any]:
    """Plain-data form with every section in canonical record order."""
    return {
        "meta": {
            "T_total": dataset.meta.T_total,
            "rooms": sorted(dataset.meta.rooms),
            "schema_version": dataset.meta.schema_version,
        },
        "persons": [{"id": p.id, "role": p.role.value} for p in sorted(dataset.persons, key=lambda p: p.id)],
        "items": sorted(dataset.items),
        "ratings": [
            {"person": r.person, "item": r.item, "rating": r.value}
            for r in sorted(dataset.ratings, key=lambda r: (r.person, r.item))
        ],
        "contacts": [
            {
                "presenter": c.presenter,
                "participant": c.participant,
                "duration_min": c.duration_min,
                "frequency": c.frequency,
            }
            for c in sorted(dataset.contacts, key=lambda c: (c.presenter, c.participant))
        ],
        "sessions": [
            {
                "session_id": s.session_id,
                "presenter": s.presenter,
                "room": s.room,
                "start": s.start,
                "duration_min": s.duration_min,
            }
            for s in sorted(dataset.sessions, key=lambda s: s.session_id)
        ],
        "availability": [
            {"person": a.person, "room": a.room, "start": a.start, "end": a.end}
            for a in sorted(dataset.availability, key=lambda a: (a.person, a.room, a.start, a.end))
        ],
        "relevance": [{"participant": p, "session": s} for p, s in sorted(dataset.relevance)],
    }


def serialize(dataset: Dataset) -> str:
    return json.dumps(to_document(dataset), indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def _take(record: Any, key: str, locus: str, kind: type | tuple = (str,)) -> Any:
    if not isinstance(record, dict):
        raise DatasetParseError("expected an object", locus)
    if key not in record:
        raise DatasetParseError(f"missing field {key!r}", locus)
    value = record[key]
    if kind is not None and not isinstance(value, kind):
        raise DatasetParseError(f"field {key!r} has type {type(value).__name__}", locus)
    return value


_NUM = (int, float)


def from_document(doc: Any) -> Dataset:
    if not isinstance(doc, dict):
        raise DatasetParseError("top level must be an object", "document")
    for section in SECTIONS:
        if section not in doc:
            raise DatasetParseError(f"missing section {section!r}", "document")

    def records(section):
        value = doc[section]
        if not isinstance(value, list):
            raise DatasetParseError("section must be a list", section)
        return [(f"{section}[{i}]", rec) for i, rec in enumerate(value)]

    meta_doc = doc["meta"]
    rooms = _take(meta_doc, "rooms", "meta", list)
    if not all(isinstance(r, str) for r in rooms):
        raise DatasetParseError("rooms must be strings", "meta.rooms")
    meta = Meta(
        T_total=_take(meta_doc, "T_total", "meta", _NUM),
        rooms=tuple(rooms),
        schema_version=_take(meta_doc, "schema_version", "meta", int),
    )

    persons = []
    for locus, rec in records("persons"):
        role = _take(rec, "role", locus)
        try:
            persons.append(Person(_take(rec, "id", locus), Role(role)))
        except ValueError:
            raise DatasetParseError(f"unknown role {role!r}", locus) from None

    items = []
    for locus, rec in records("items"):
        if not isinstance(rec, str):
            raise DatasetParseError("item id must be a string", locus)
        items.append(rec)

    ratings = tuple(
        Rating(_take(rec, "person", locus), _take(rec, "item", locus), _take(rec, "rating", locus, _NUM))
        for locus, rec in records("ratings")
    )
    contacts = tuple(
        Contact(
            _take(rec, "presenter", locus),
            _take(rec, "participant", locus),
            _take(rec, "duration_min", locus, _NUM),
            _take(rec, "frequency", locus, _NUM),
        )
        for locus, rec in records("contacts")
    )
    sessions = tuple(
        Session(
            _take(rec, "session_id", locus),
            _take(rec, "presenter", locus),
            _take(rec, "room", locus),
            _take(rec, "start", locus, _NUM),
            _take(rec, "duration_min", locus, _NUM),
        )
        for locus, rec in records("sessions")
    )
    availability = tuple(
        Availability(
            _take(rec, "person", locus),
            _take(rec, "room", locus),
            _take(rec, "start", locus, _NUM),
            _take(rec, "end", locus, _NUM),
        )
        for locus, rec in records("availability")
    )
    relevance = []
    if "relevance" in doc:
        for locus, rec in records("relevance"):
            relevance.append((_take(rec, "participant", locus), _take(rec, "session", locus)))
    return Dataset(
        persons=tuple(persons),
        items=tuple(items),
        ratings=ratings,
        contacts=contacts,
        sessions=sessions,
        availability=availability,
        meta=meta,
        relevance=tuple(relevance),
    )


def parse(text: str) -> Dataset:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatasetParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return from_document(doc)


def load(path) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def dump(dataset: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize(dataset))
