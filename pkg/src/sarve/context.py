"""Contextual post-filtering and the relation edges used to explain a match."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass
from enum import Enum

from .domain import Dataset, Session, Window, normalize_room


@dataclass(frozen=True)
class MatchResult:
    participant: str
    session: str
    location_ok: bool
    time_ok: bool

    @property
    def matched(self) -> bool:
        return self.location_ok and self.time_ok


def match_context(windows: Iterable[Window], session: Session, participant: str = "") -> MatchResult:
    """Check a participant's availability windows against one session.

    Location holds if any window names the session's room; time holds if a
    window in that room covers the whole session.
    """
    room = normalize_room(session.room)
    in_room = [w for w in windows if normalize_room(w.room) == room]
    time_ok = any(w.contains(session.start, session.end) for w in in_room)
    return MatchResult(participant, session.session_id, bool(in_room), time_ok)


class RelationKind(str, Enum):
    SOCIAL = "A1"  # user - user
    COMMENT = "A2"  # user - comment - item
    CONTENT = "A3"  # item - content feature
    TAG_POST = "A4"  # user - tag - item


_ARITY = {RelationKind.SOCIAL: 2, RelationKind.COMMENT: 3, RelationKind.CONTENT: 2, RelationKind.TAG_POST: 3}


@dataclass(frozen=True)
class RelationEdge:
    kind: RelationKind
    endpoints: tuple[str, ...]

    def __post_init__(self):
        if len(self.endpoints) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind.value} edge needs {_ARITY[self.kind]} endpoints, got {self.endpoints}")

    def __str__(self) -> str:
        return f"{self.kind.value}(" + ", ".join(self.endpoints) + ")"


def relation_edges(dataset: Dataset, p: str, x: str, session: Session) -> list[RelationEdge]:
    """Materialize the typed relations linking presenter ``p``, participant ``x`` and ``session``.

    A1: a contact link between p and x.
    A4: (x, item, session) for every item both rated.
    A3: (session, item) for every keyword item the presenter rated.
    A2: (p, annotation, session), the location/time note attached to the session.
    """
    edges: list[RelationEdge] = []
    contact = dataset.contact_log.get(p, x)
    if contact is not None and contact.is_link:
        edges.append(RelationEdge(RelationKind.SOCIAL, (p, x)))
    matrix = dataset.rating_matrix
    row_p = matrix.row(p) if p in matrix else {}
    row_x = matrix.row(x) if x in matrix else {}
    for item in sorted(row_p.keys() & row_x.keys()):
        edges.append(RelationEdge(RelationKind.TAG_POST, (x, item, session.session_id)))
    for item in sorted(row_p):
        edges.append(RelationEdge(RelationKind.CONTENT, (session.session_id, item)))
    note = f"{session.room}@{session.start}-{session.end}"
    edges.append(RelationEdge(RelationKind.COMMENT, (p, note, session.session_id)))
    return edges
