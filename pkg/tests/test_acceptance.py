"""Exit criteria. Each test carries its criterion number; the run ends with one PASS/FAIL line per criterion."""

import random
import time
from collections import Counter
from fractions import Fraction

import pytest

from sarve.cli import main
from sarve.community import Stream, format_stream, run_sarve
from sarve.datagen import GeneratorSpec, generate
from sarve.domain import ContactLog, Contact, RatingMatrix, Thresholds, dump, serialize, validate_dataset
from sarve.evaluation import ConfusionCounts, decision_universe, metrics, score
from sarve.similarity import pearson
from sarve.social import tie_strength

from .conftest import random_instance
from .oracles import eq1_float, naive_sarve


def _counts_for(precision, recall):
    """Confusion counts whose P and R equal the given three-decimal values exactly."""
    p, r = Fraction(str(precision)), Fraction(str(recall))
    e = p.numerator * r.numerator
    scale = 1
    while True:
        e_s = e * scale
        f = e_s / p - e_s
        g = e_s / r - e_s
        if f.denominator == 1 and g.denominator == 1:
            return ConfusionCounts(e_s, int(f), int(g), 0)
        scale *= 10


@pytest.mark.acceptance(1, "F-measure oracle on two reference precision/recall rows")
def test_f_measure_oracle():
    start = time.perf_counter()
    for precision, recall, expected, printed in ((0.096, 0.810, 0.1717, 0.172), (0.013, 0.809, 0.0256, 0.026)):
        counts = _counts_for(precision, recall)
        point = metrics(counts)
        assert point.precision == pytest.approx(precision, abs=1e-12)
        assert point.recall == pytest.approx(recall, abs=1e-12)
        assert point.f_measure == pytest.approx(expected, abs=5e-4)
        assert round(point.f_measure, 3) == printed
    assert time.perf_counter() - start < 1.0


@pytest.mark.acceptance(2, "tie-strength oracle: 300/660 and 560/720 exact")
def test_tie_strength_oracle():
    log = ContactLog.from_contacts([Contact("p", "x", 60, 5)], 660)
    assert tie_strength(log, "p", "x").value == pytest.approx(0.4545454545454545, rel=1e-12)
    log = ContactLog.from_contacts([Contact("p", "x", 80, 7)], 720)
    assert tie_strength(log, "p", "x").value == pytest.approx(0.7777777777777777, rel=1e-12)
    assert tie_strength(log, "p", "x").exact == Fraction(7, 9)


@pytest.mark.acceptance(3, "Pearson symmetry, bounds and term-by-term agreement on 1000 random matrices")
def test_pearson_property_suite():
    start = time.perf_counter()
    rng = random.Random(2024)
    compared = 0
    for _ in range(1000):
        n_persons, n_items = rng.randint(2, 20), rng.randint(2, 15)
        items = [f"i{k}" for k in range(n_items)]
        rows = {
            f"u{k}": {i: rng.randint(1, 5) for i in rng.sample(items, rng.randint(1, n_items))}
            for k in range(n_persons)
        }
        m = RatingMatrix(rows, items)
        persons = sorted(rows)
        for _ in range(3):
            c, d = rng.sample(persons, 2)
            fwd, bwd = pearson(m, c, d), pearson(m, d, c)
            oracle = eq1_float(rows[c], rows[d])
            assert (fwd.value is None) == (bwd.value is None) == (oracle is None)
            if fwd.value is None:
                continue
            compared += 1
            assert -1 - 1e-9 <= fwd.value <= 1 + 1e-9
            assert abs(fwd.value - bwd.value) <= 1e-9
            assert abs(fwd.value - oracle) <= 1e-9
    assert compared >= 1000
    assert time.perf_counter() - start < 10.0


@pytest.mark.acceptance(4, "run_sarve equals the naive double loop on 200 random instances up to 30x30")
def test_algorithm_oracle_equivalence():
    start = time.perf_counter()
    rng = random.Random(77)
    for seed in range(200):
        ds = random_instance(seed, max_participants=30, max_presenters=30)
        assert validate_dataset(ds).ok
        gamma = rng.choice([-1.0, -0.3, 0.0, 0.5, 0.6, 0.8, 1.0])
        beta = rng.choice([0.0, 0.05, 0.25, 0.5, 0.8])
        degree = rng.choice(["median", "off", 0, 3])
        top_n = rng.choice([1, 2, 5, 10, 100])
        recs = run_sarve(ds, Thresholds(gamma=gamma, beta=beta, deg_cent_threshold=degree, top_n=top_n))
        ctx, rel = naive_sarve(ds, gamma, beta, None if degree == "off" else degree, top_n)
        assert recs.pairs(Stream.CONTEXT) == ctx, seed
        assert recs.pairs(Stream.RELATIONS) == rel, seed
    assert time.perf_counter() - start < 60.0


@pytest.mark.acceptance(5, "monotone shrinkage along ascending gamma and beta grids")
def test_monotone_shrinkage():
    start = time.perf_counter()
    gamma_grid = [0.6, 0.7, 0.8, 0.9, 1.0]
    beta_grid = [0.0, 0.1, 0.3, 0.5, 0.6, 0.7, 0.8]
    for seed in range(3):
        ds = generate(GeneratorSpec(seed=seed))
        relevant, universe = set(ds.relevance), decision_universe(ds)
        for axis, grid, stream, base in (
            ("gamma", gamma_grid, Stream.CONTEXT, Thresholds()),
            ("beta", beta_grid, Stream.RELATIONS, Thresholds(deg_cent_threshold="off")),
        ):
            previous, recalls = None, []
            for value in grid:
                th = Thresholds(**{**base.to_dict(), axis: value})
                pairs = run_sarve(ds, th).pairs(stream)
                assert previous is None or pairs <= previous, (seed, axis, value)
                previous = pairs
                recalls.append(metrics(score(pairs, relevant, universe)).recall)
            assert all(a >= b for a, b in zip(recalls, recalls[1:])), (seed, axis, recalls)
    assert time.perf_counter() - start < 30.0


@pytest.mark.acceptance(6, "deleting contacts / ratings leaves the other stream byte-identical")
def test_stream_independence():
    for seed in range(3):
        ds = generate(GeneratorSpec(seed=seed))
        th = Thresholds()
        full = run_sarve(ds, th)
        assert format_stream(run_sarve(ds.replace(contacts=()), th), "context") == format_stream(full, "context")
        assert format_stream(run_sarve(ds.replace(ratings=()), th), "relations") == format_stream(full, "relations")
        assert format_stream(full, "context") and format_stream(full, "relations")


@pytest.mark.acceptance(7, "default generator reproduces the target dataset shape")
def test_dataset_fidelity():
    ds = generate(GeneratorSpec(seed=0))
    assert len(ds.presenters) == 60 and len(ds.participants) == 78
    assert set(Counter(c.presenter for c in ds.contacts).values()) == {5}
    assert {c.duration_min for c in ds.contacts} <= set(range(5, 81))
    assert {c.frequency for c in ds.contacts} <= set(range(1, 8))
    assert {r.value for r in ds.ratings} <= set(range(1, 6))
    assert ds.meta.T_total == 720 and len(ds.meta.rooms) == 2
    assert validate_dataset(ds).ok
    assert serialize(generate(GeneratorSpec(seed=0))) == serialize(ds)


@pytest.mark.acceptance(8, "evaluate and sweep artifacts are byte-identical across runs and worker counts")
def test_end_to_end_determinism(tmp_path):
    start = time.perf_counter()
    data = tmp_path / "dataset.json"
    dump(generate(GeneratorSpec(seed=1)), data)
    commands = [
        ["evaluate", "--dataset", str(data), "--seed", "3"],
        ["sweep", "--dataset", str(data), "--axis", "gamma", "--grid", "0.6:1.0:0.1", "--emit-plot-data"],
        ["sweep", "--dataset", str(data), "--axis", "beta", "--grid", "0.5:0.8:0.1", "--deg-cent-threshold", "off"],
    ]
    snapshots = []
    for run, workers in enumerate(["1", "1", "4"]):
        out = tmp_path / f"run{run}"
        for cmd in commands:
            assert main(cmd + ["--out", str(out), "--workers", workers]) == 0
        snapshots.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert len(snapshots[0]) == 6 and snapshots[0] == snapshots[1] == snapshots[2]
    assert time.perf_counter() - start < 60.0
