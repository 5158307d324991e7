"""Command-line entry point.

Exit codes: 0 success, 1 data or validation failure, 2 usage failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path

from . import __version__
from .community import explain, resolve_conflicts, run_sarve, serialize_recommendations
from .datagen import GeneratorSpec, generate, provenance, summarize
from .domain import DatasetError, Thresholds, dump, load, validate_dataset
from .evaluation import (
    UNIVERSE_NOTE,
    SplitSpec,
    evaluate,
    format_evaluation,
    format_sweep,
    metric_cells,
    sweep,
)
from .social import ConfigurationError

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2
OUTPUT_ENV = "SARVE_OUTPUT_DIR"
SUBCOMMANDS = ("gen-dataset", "recommend", "evaluate", "sweep", "summarize")
FIGURES = {"gamma": ("7a", "8a", "9a"), "beta": ("7b", "8b", "9b")}
BASELINE_FOR_AXIS = {"gamma": "pearson-only", "beta": "popularity-only"}


@dataclass
class RunConfig:
    subcommand: str
    dataset: str | None = None
    dataset_sha256: str | None = None
    thresholds: dict = field(default_factory=dict)
    seed: int = 0
    train_fraction: float | None = 0.8
    truth: str | None = "labels"
    axis: str | None = None
    grid: list[float] | None = None
    generator: dict | None = None
    emit_plot_data: bool = False
    explain: bool = False

    def header(self) -> str:
        return "# config: " + json.dumps(asdict(self), sort_keys=True) + "\n"


class DataFailure(Exception):
    pass


def parse_grid(text: str) -> list[float]:
    """``start:end:step`` (both endpoints included when step divides the span) or a comma list."""
    try:
        if ":" in text:
            start, end, step = (Decimal(part) for part in text.split(":"))
            if step <= 0 or end < start:
                raise argparse.ArgumentTypeError(f"bad grid {text!r}: need step > 0 and end >= start")
            count = int((end - start) / step)
            return [float(start + k * step) for k in range(count + 1)]
        values = [float(Decimal(part)) for part in text.split(",") if part.strip()]
    except (InvalidOperation, ValueError):
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty grid")
    return values


def _degree_setting(text: str):
    if text in ("median", "off"):
        return text
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, 'median' or 'off', got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("degree threshold must be non-negative")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sarve", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help=f"output directory (default ${OUTPUT_ENV} or .)")
    common.add_argument("--seed", type=int, default=0)

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--dataset", required=True, type=Path)

    gates = argparse.ArgumentParser(add_help=False)
    gates.add_argument("--gamma", type=float, default=0.6, help="similarity threshold")
    gates.add_argument("--beta", type=float, default=0.5, help="tie-strength threshold")
    gates.add_argument("--deg-cent-threshold", type=_degree_setting, default="median")
    gates.add_argument("--k-neighbors", type=int, default=None)
    gates.add_argument("--top-n", type=int, default=10)
    gates.add_argument("--workers", type=int, default=1, help="parallel workers; does not change output")

    scoring = argparse.ArgumentParser(add_help=False)
    scoring.add_argument("--truth", choices=("labels", "paper"), default="labels")
    scoring.add_argument("--train-fraction", type=float, default=0.8)
    scoring.add_argument("--no-split", action="store_true", help="recommend from the full dataset")

    gen = sub.add_parser("gen-dataset", parents=[common], help="write a synthetic dataset")
    gen.add_argument("--presenters", type=int, default=60)
    gen.add_argument("--participants", type=int, default=78)
    gen.add_argument("--clusters", type=int, default=4)
    gen.add_argument("--name", default="dataset")

    rec = sub.add_parser("recommend", parents=[common, data, gates], help="run the recommender")
    rec.add_argument("--explain", action="store_true", help="also write the relation-edge audit trail")

    sub.add_parser("evaluate", parents=[common, data, gates, scoring], help="score SARVE and baselines")

    sw = sub.add_parser("sweep", parents=[common, data, gates, scoring], help="threshold sweep")
    sw.add_argument("--axis", choices=("gamma", "beta"), required=True)
    sw.add_argument("--grid", type=parse_grid, required=True, help="start:end:step or comma list")
    sw.add_argument("--emit-plot-data", action="store_true")

    sub.add_parser("summarize", parents=[common, data], help="dataset histograms")
    return parser


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _load_valid(path: Path):
    try:
        dataset = load(path)
    except OSError as exc:
        raise DataFailure(f"cannot read {path}: {exc.strerror}") from None
    report = validate_dataset(dataset)
    if not report.ok:
        raise DataFailure(f"{path}: {len(report.violations)} validation violation(s); first: {report.violations[0]}")
    return dataset


def _thresholds(args, parser) -> Thresholds:
    try:
        return Thresholds(
            gamma=args.gamma,
            beta=args.beta,
            deg_cent_threshold=args.deg_cent_threshold,
            k_neighbors=args.k_neighbors,
            top_n=args.top_n,
        )
    except ValueError as exc:
        parser.error(str(exc))


def _cmd_gen(args, cfg: RunConfig, out: Path) -> list[Path]:
    spec = GeneratorSpec(
        n_presenters=args.presenters,
        n_participants=args.participants,
        n_interest_clusters=args.clusters,
        seed=args.seed,
    )
    dataset = generate(spec)
    path = out / f"{args.name}.json"
    dump(dataset, path)
    side = out / f"{args.name}.provenance.json"
    record = provenance(spec, __version__)
    record["config"] = asdict(cfg)
    _write(side, json.dumps(record, sort_keys=True, indent=1) + "\n")
    return [path, side]


def _cmd_recommend(args, cfg: RunConfig, out: Path, thresholds: Thresholds) -> list[Path]:
    dataset = _load_valid(args.dataset)
    recs = run_sarve(dataset, thresholds, workers=args.workers)
    path = out / "recommendations.tsv"
    _write(path, serialize_recommendations(recs, asdict(cfg)))
    schedule = resolve_conflicts(recs, dataset.session_index)
    lines = [cfg.header(), "participant\tsession\tstatus\tcombined_score\tconflict_with\n"]
    for participant in sorted(schedule.kept):
        for s in schedule.kept[participant]:
            lines.append(f"{participant}\t{s.session}\tkept\t{s.score!r}\t\n")
        for s in schedule.dropped[participant]:
            lines.append(f"{participant}\t{s.session}\tdropped\t{s.score!r}\t{','.join(s.conflict_with)}\n")
    sched_path = out / "schedule.tsv"
    _write(sched_path, "".join(lines))
    written = [path, sched_path]
    if args.explain:
        explain_path = out / "explanations.txt"
        _write(explain_path, cfg.header() + explain(dataset, recs))
        written.append(explain_path)
    return written


def _split_spec(args) -> SplitSpec | None:
    if args.no_split:
        return None
    return SplitSpec(train_fraction=args.train_fraction, seed=args.seed)


def _cmd_evaluate(args, cfg: RunConfig, out: Path, thresholds: Thresholds) -> list[Path]:
    dataset = _load_valid(args.dataset)
    rows = evaluate(dataset, thresholds, _split_spec(args), args.truth, args.workers)
    path = out / "evaluation.tsv"
    header = cfg.header() + f"# {UNIVERSE_NOTE} ({len(dataset.participants)} x {len(dataset.sessions)})\n"
    _write(path, header + format_evaluation(rows))
    return [path]


def _cmd_sweep(args, cfg: RunConfig, out: Path, thresholds: Thresholds) -> list[Path]:
    dataset = _load_valid(args.dataset)
    split_spec = _split_spec(args)
    points = sweep(dataset, args.axis, args.grid, thresholds, split_spec, args.truth, workers=args.workers)
    header = cfg.header() + f"# {UNIVERSE_NOTE} ({len(dataset.participants)} x {len(dataset.sessions)})\n"
    if args.axis == "beta" and any(abs(v - 0.8) < 1e-12 for v in args.grid):
        header += "# beta=0.8 is the rounded endpoint of the default tie range (exact maximum 560/720)\n"
    path = out / f"sweep_{args.axis}.tsv"
    _write(path, header + format_sweep(points))
    written = [path]
    if args.emit_plot_data:
        baseline = BASELINE_FOR_AXIS[args.axis]
        base_points = sweep(
            dataset, args.axis, args.grid, thresholds, split_spec, args.truth, method=baseline, workers=args.workers
        )
        for fig, (label, col) in zip(FIGURES[args.axis], (("precision", 1), ("recall", 2), ("f_measure", 3))):
            lines = [f"threshold\tsarve_{label}\t{baseline}_{label}"]
            for ours, theirs in zip(points, base_points):
                a, b = metric_cells(ours), metric_cells(theirs)
                lines.append(f"{a[0]}\t{a[col]}\t{b[col]}")
            fig_path = out / f"fig{fig}_{args.axis}_{label}.tsv"
            _write(fig_path, header + "\n".join(lines) + "\n")
            written.append(fig_path)
    return written


def _cmd_summarize(args, cfg: RunConfig, out: Path) -> list[Path]:
    dataset = _load_valid(args.dataset)
    path = out / "summary.tsv"
    _write(path, cfg.header() + summarize(dataset).to_text())
    return [path]


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    thresholds = None
    if args.subcommand not in ("gen-dataset", "summarize"):
        try:
            thresholds = _thresholds(args, parser)
        except SystemExit:
            return EXIT_USAGE
        if args.workers < 1:
            print("sarve: error: --workers must be >= 1", file=sys.stderr)
            return EXIT_USAGE
    if hasattr(args, "train_fraction") and not 0 < args.train_fraction < 1:
        print("sarve: error: --train-fraction must lie in (0, 1)", file=sys.stderr)
        return EXIT_USAGE

    out = Path(args.out or os.environ.get(OUTPUT_ENV, "."))
    cfg = RunConfig(subcommand=args.subcommand, seed=args.seed)
    if thresholds is not None:
        cfg.thresholds = thresholds.to_dict()
    if hasattr(args, "dataset"):
        cfg.dataset = str(args.dataset)
        try:
            cfg.dataset_sha256 = _sha256(args.dataset)
        except OSError as exc:
            print(f"sarve: error: cannot read {args.dataset}: {exc.strerror}", file=sys.stderr)
            return EXIT_DATA
    if hasattr(args, "truth"):
        cfg.truth = args.truth
        cfg.train_fraction = None if args.no_split else args.train_fraction
    else:
        cfg.truth, cfg.train_fraction = None, None
    if args.subcommand == "sweep":
        cfg.axis, cfg.grid, cfg.emit_plot_data = args.axis, args.grid, args.emit_plot_data
    if args.subcommand == "recommend":
        cfg.explain = args.explain
    if args.subcommand == "gen-dataset":
        cfg.generator = {
            "presenters": args.presenters,
            "participants": args.participants,
            "clusters": args.clusters,
            "name": args.name,
        }

    try:
        out.mkdir(parents=True, exist_ok=True)
        if args.subcommand == "gen-dataset":
            written = _cmd_gen(args, cfg, out)
        elif args.subcommand == "recommend":
            written = _cmd_recommend(args, cfg, out, thresholds)
        elif args.subcommand == "evaluate":
            written = _cmd_evaluate(args, cfg, out, thresholds)
        elif args.subcommand == "sweep":
            written = _cmd_sweep(args, cfg, out, thresholds)
        else:
            written = _cmd_summarize(args, cfg, out)
    except (DataFailure, DatasetError, ConfigurationError, AssertionError, ValueError, OSError) as exc:
        print(f"sarve: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
