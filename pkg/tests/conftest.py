import random

import pytest

from sarve.datagen import GeneratorSpec, generate
from sarve.domain import Availability, Contact, Dataset, Meta, Person, Rating, Role, Session


def make_dataset(
    presenters=(),
    participants=(),
    ratings=None,
    contacts=(),
    sessions=(),
    availability=(),
    T_total=720,
    rooms=("RoomA", "RoomB"),
    relevance=(),
    items=None,
):
    """Build a Dataset from compact literals.

    ``ratings`` maps person -> {item: rating}; ``contacts`` holds
    (presenter, participant, duration, frequency); ``sessions`` holds
    (session_id, presenter, room, start, duration); ``availability`` holds
    (person, room, start, end).
    """
    ratings = ratings or {}
    rating_records = tuple(Rating(p, i, v) for p, row in ratings.items() for i, v in row.items())
    if items is None:
        items = sorted({i for row in ratings.values() for i in row})
    return Dataset(
        persons=tuple(Person(p, Role.PRESENTER) for p in presenters)
        + tuple(Person(x, Role.PARTICIPANT) for x in participants),
        items=tuple(items),
        ratings=rating_records,
        contacts=tuple(Contact(*c) for c in contacts),
        sessions=tuple(Session(*s) for s in sessions),
        availability=tuple(Availability(*a) for a in availability),
        meta=Meta(T_total, tuple(rooms)),
        relevance=tuple(relevance),
    )


def random_instance(seed, max_participants=30, max_presenters=30, n_items=None, T_total=720):
    """Small random conference used by the oracle-equivalence tests."""
    rng = random.Random(seed)
    n_x = rng.randint(1, max_participants)
    n_p = rng.randint(1, max_presenters)
    n_items = n_items or rng.randint(3, 12)
    presenters = [f"p{k:02d}" for k in range(n_p)]
    participants = [f"x{k:02d}" for k in range(n_x)]
    items = [f"i{k:02d}" for k in range(n_items)]
    ratings = {}
    for person in presenters + participants:
        k = rng.randint(0, n_items)
        ratings[person] = {i: rng.randint(1, 5) for i in rng.sample(items, k)}
    contacts = []
    for p in presenters:
        for x in rng.sample(participants, rng.randint(0, min(6, n_x))):
            d = rng.choice([0, rng.randint(1, 80)])
            f = rng.randint(1, 7) if d > 0 else rng.choice([0, 1])
            contacts.append((p, x, d, f))
    sessions = []
    k = 0
    for p in presenters:
        for _ in range(rng.choice([0, 1, 1, 1, 2])):
            room = rng.choice(["RoomA", "RoomB"])
            dur = rng.choice([20, 25])
            start = rng.randrange(0, T_total - dur, 5)
            sessions.append((f"s{k:03d}", p, room, start, dur))
            k += 1
    availability = []
    for x in participants:
        for _ in range(rng.randint(0, 3)):
            a = rng.randrange(0, T_total - 60, 5)
            b = rng.randrange(a + 5, T_total + 1, 5)
            availability.append((x, rng.choice(["RoomA", "roomb "]), a, b))
    return make_dataset(
        presenters, participants, ratings, contacts, sessions, availability, T_total=T_total, items=items
    )


@pytest.fixture(scope="session")
def default_dataset():
    return generate(GeneratorSpec(seed=7))


@pytest.fixture(scope="session")
def small_generated():
    return generate(GeneratorSpec(n_presenters=12, n_participants=20, contacts_per_presenter=3, seed=11))


_ACCEPTANCE: dict[int, tuple[str, bool]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.failed):
        _ACCEPTANCE[number] = (title, report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed = _ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  [{number}] {title}")
