import random
import statistics
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sarve.domain import Contact, ContactLog
from sarve.social import (
    CentralityScore,
    ConfigurationError,
    TieStrength,
    degree_centrality,
    degree_table,
    passes_beta,
    passes_popularity,
    resolve_degree_threshold,
    tie_strength,
)

from .oracles import brute_degree


def _log(entries, T=720):
    return ContactLog.from_contacts([Contact(*e) for e in entries], T)


def test_tie_strength_worked_example():
    # five contacts over 60 minutes in a 660-minute frame; printed rounded as 0.45
    tie = tie_strength(_log([("p", "x", 60, 5)], T=660), "p", "x")
    assert tie.exact == Fraction(300, 660)
    assert tie.value == pytest.approx(0.454545454545, rel=1e-12)
    assert round(tie.value, 2) == 0.45


def test_tie_strength_maximum_of_default_ranges():
    # 80 minutes, 7 contacts, 720-minute frame; printed rounded as 0.8
    tie = tie_strength(_log([("p", "x", 80, 7)]), "p", "x")
    assert tie.exact == Fraction(560, 720)
    assert tie.value == pytest.approx(7 / 9, rel=1e-12)
    assert round(tie.value, 1) == 0.8


def test_zero_frequency_and_missing_entry_give_zero():
    log = _log([("p", "x", 45, 0)])
    assert tie_strength(log, "p", "x").value == 0.0
    assert tie_strength(log, "p", "nobody").value == 0.0


def test_non_positive_time_frame_is_a_configuration_error():
    with pytest.raises(ConfigurationError):
        tie_strength(_log([("p", "x", 10, 1)], T=0), "p", "x")


@given(st.integers(0, 50), st.integers(0, 80), st.integers(1, 2000))
def test_tie_strength_is_linear(freq, dur, T):
    base = tie_strength(_log([("p", "x", dur, freq)], T), "p", "x").value
    doubled_freq = tie_strength(_log([("p", "x", dur, 2 * freq)], T), "p", "x").value
    doubled_dur = tie_strength(_log([("p", "x", 2 * dur, freq)], T), "p", "x").value
    doubled_T = tie_strength(_log([("p", "x", dur, freq)], 2 * T), "p", "x").value
    assert doubled_freq == pytest.approx(2 * base, rel=1e-12)
    assert doubled_dur == pytest.approx(2 * base, rel=1e-12)
    assert doubled_T == pytest.approx(base / 2, rel=1e-12)


def _tie(value):
    return TieStrength("p", "x", value, Fraction(value))


def test_beta_gate():
    assert passes_beta(_tie(0.5), 0.5)
    assert not passes_beta(tie_strength(_log([("p", "x", 60, 5)], T=660), "p", "x"), 0.5)
    assert passes_beta(tie_strength(_log([("p", "x", 80, 7)]), "p", "x"), 0.5)
    # 36/720 is exactly 0.05, while the double nearest 0.05 is slightly larger
    assert passes_beta(tie_strength(_log([("p", "x", 36, 1)]), "p", "x"), 0.05)
    assert not passes_beta(tie_strength(_log([("p", "x", 35, 1)]), "p", "x"), 0.05)


@given(st.lists(st.floats(0, 2), min_size=1, max_size=20), st.floats(0, 2), st.floats(0, 2))
def test_beta_gated_set_shrinks(values, b1, b2):
    lo, hi = sorted((b1, b2))
    at_hi = {k for k, v in enumerate(values) if passes_beta(_tie(v), hi)}
    at_lo = {k for k, v in enumerate(values) if passes_beta(_tie(v), lo)}
    assert at_hi <= at_lo


def test_star_graph_center_is_most_central():
    nodes = ["1", "2", "3", "5", "6"]
    entries = [("4", n, 10, 1) for n in nodes] + [("1", "2", 5, 1), ("3", "5", 5, 2)]
    log = _log(entries)
    degrees = {p: degree_centrality(log, p).degree for p in ["1", "3", "4"]}
    assert degrees["4"] == 5
    assert max(degrees, key=degrees.get) == "4"


def test_isolated_presenter_has_zero_degree():
    assert degree_centrality(_log([("p", "x", 0, 0)]), "p").degree == 0
    assert degree_centrality(_log([]), "p").degree == 0


def test_default_log_gives_five_per_presenter(default_dataset):
    log = default_dataset.contact_log
    assert {degree_centrality(log, p).degree for p in default_dataset.presenters} == {5}


def test_degree_matches_brute_force_adjacency():
    rng = random.Random(5)
    for _ in range(300):
        entries = []
        for p in range(rng.randint(1, 6)):
            for x in rng.sample(range(20), rng.randint(0, 10)):
                d = rng.choice([0, rng.randint(1, 80)])
                entries.append((f"p{p}", f"x{x}", d, rng.randint(1, 7) if d else rng.randint(0, 1)))
        log = _log(entries)
        presenters = sorted({e[0] for e in entries})
        table = degree_table(log, presenters)
        for p in presenters:
            expected = brute_degree(entries, p)
            assert degree_centrality(log, p).degree == expected == table[p]


def test_popularity_gate():
    assert passes_popularity(CentralityScore("p", 5), 5)
    assert not passes_popularity(CentralityScore("p", 0), 1)
    assert not passes_popularity(CentralityScore("p", 99), None)


def test_median_threshold_admits_upper_half():
    degrees = {"a": 3, "b": 5, "c": 5, "d": 7}
    threshold = resolve_degree_threshold("median", degrees.values())
    assert threshold == statistics.median(degrees.values()) == 5
    passing = {p for p, d in degrees.items() if passes_popularity(CentralityScore(p, d), threshold)}
    assert passing == {"b", "c", "d"}


def test_threshold_settings():
    assert resolve_degree_threshold("off", [1, 2]) is None
    assert resolve_degree_threshold(4, [1, 2]) == 4
    assert resolve_degree_threshold("median", [1, 2]) == 2  # ceil(1.5)
    assert resolve_degree_threshold("median", []) is None


def test_envelope_of_default_ranges():
    best = max(
        tie_strength(_log([("p", "x", d, f)]), "p", "x").exact for d in range(5, 81) for f in range(1, 8)
    )
    assert best == Fraction(560, 720)
