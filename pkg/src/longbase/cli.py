"""Command line pipeline: synth -> baselines / eval -> screen.

Exit codes: 0 ok, 1 I/O, 2 bad flags, 3 empty domain, 4 malformed input
or intermediate file.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .baselines import EmptyDomainError, personal_baseline, population_baseline
from .core import DataError, assemble_dataset, load_gps, load_reports
from .evaluation import (
    CVSpec,
    ModelSpec,
    build_report,
    curve_to_csv,
    evals_from_dict,
    evaluate_personal,
    prepare_rows,
    screening_sweep,
)
from .features import FEATURE_NAMES, feature_matrix
from .labels import cohort_labels
from .models import ForestParams
from .synth import SynthConfig, emit_csv, generate

EXIT_OK, EXIT_IO, EXIT_FLAGS, EXIT_EMPTY, EXIT_MALFORMED = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _dump(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _write(path: Path, text: str):
    try:
        path.write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {path}: {exc}") from None


def _out_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot create {out}: {exc}") from None
    return out


def _manifest(out: Path, args, outputs: list[str]):
    flags = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    doc = {
        "tool": "longbase",
        "version": __version__,
        "subcommand": args.command,
        "seed": flags.get("seed"),
        "flags": flags,
        "outputs": sorted(outputs),
    }
    _write(out / "run_manifest.json", _dump(doc))


def _load_dataset(args, need_gps: bool):
    for p in filter(None, (args.reports, getattr(args, "gps", None))):
        if not Path(p).is_file():
            raise CliError(EXIT_IO, f"no such file: {p}")
    try:
        reports = load_reports(args.reports)
        gps = load_gps(args.gps) if need_gps else []
        return assemble_dataset(reports, gps, args.day_offset)
    except OSError as exc:
        raise CliError(EXIT_IO, str(exc)) from None
    except DataError as exc:
        raise CliError(EXIT_MALFORMED, str(exc)) from None


def cmd_synth(args) -> int:
    try:
        cfg = SynthConfig(
            n_participants=args.n_participants,
            study_days=args.study_days,
            prompts_per_day=args.prompts_per_day,
            mode_concentration=args.mode_concentration,
            gps_samples_per_day=args.gps_samples_per_day,
            daily_distance_sigma=args.daily_distance_sigma,
            coupling=args.coupling,
            couple_by_variance=args.couple_by_variance,
            missing_prob=args.missing_prob,
            n_dropouts=args.n_dropouts,
            seed=args.seed,
        )
    except ValueError as exc:
        raise CliError(EXIT_FLAGS, str(exc)) from None
    out = _out_dir(args.out)
    dataset, truth = generate(cfg)
    try:
        emit_csv(dataset, out)
    except OSError as exc:
        raise CliError(EXIT_IO, str(exc)) from None
    _write(out / "ground_truth.json", truth.to_json())
    _manifest(out, args, ["reports.csv", "gps.csv", "ground_truth.json"])
    print(f"wrote {len(dataset)} participants to {out}")
    return EXIT_OK


def cmd_baselines(args) -> int:
    dataset = _load_dataset(args, need_gps=False)
    try:
        doc = {
            "kind": args.kind,
            "population": population_baseline(dataset, args.kind).to_dict(),
            "personal": personal_baseline(dataset, args.kind).to_dict(),
        }
    except EmptyDomainError as exc:
        raise CliError(EXIT_EMPTY, str(exc)) from None
    text = _dump(doc)
    if args.out:
        out = _out_dir(args.out)
        _write(out / "baselines.json", text)
        _manifest(out, args, ["baselines.json"])
    p, q = doc["personal"], doc["population"]
    print(f"{args.kind}: personal micro {p['micro_accuracy']:.4f} macro {p['macro_accuracy']:.4f} | "
          f"population micro {q['micro_accuracy']:.4f} macro {q['macro_accuracy']:.4f}")
    return EXIT_OK


def _csv_rows(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(repr(v) if isinstance(v, float) else str(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"


def cmd_eval(args) -> int:
    dataset = _load_dataset(args, need_gps=True)
    out = _out_dir(args.out)
    forest = ForestParams(
        n_trees=args.n_trees,
        max_depth=args.max_depth,
        min_leaf=args.min_leaf,
        min_gain=args.min_gain,
        seed=args.seed,
    )
    model = ModelSpec(args.model, forest)
    cv = CVSpec(args.cv, args.k, args.seed)
    prep = prepare_rows(dataset, args.grid_m)

    feats = feature_matrix(dataset, args.grid_m)
    _write(out / "features.csv", _csv_rows(
        ("participant_id", "day", *FEATURE_NAMES),
        [(f.participant_id, f.day, f.n_points, f.day_location_variance, f.total_distance_m,
          f.radius_of_gyration_m, f.n_clusters, f.cluster_entropy) for f in feats]))
    _write(out / "labels.csv", _csv_rows(
        ("participant_id", "day", "label", "day_mean_energy", "personal_mean"),
        [(lb.participant_id, lb.day, lb.label, lb.day_mean_energy, lb.personal_mean) for lb in cohort_labels(dataset)]))

    evals, exclusions = evaluate_personal(dataset, model, cv, args.min_days, args.grid_m, prepared=prep)
    config = {
        "model": args.model,
        "forest": asdict(forest),
        "cv": asdict(cv),
        "min_labeled_days": args.min_days,
        "grid_m": args.grid_m,
        "day_offset_seconds": args.day_offset,
    }
    report = build_report(evals, exclusions, prep.join, config, args.agg)
    _write(out / "eval_report.json", _dump(report.to_dict()))
    _write(out / "screening.csv", curve_to_csv(report.curve))
    _manifest(out, args, ["eval_report.json", "screening.csv", "features.csv", "labels.csv"])
    agg = report.to_dict()["aggregate"]
    print(f"evaluated {agg['n_participants']} participants, excluded {len(exclusions)}; "
          f"macro improvement {agg['macro_mean_improvement']}")
    if report.correlation:
        c = report.correlation
        print(f"variance vs improvement: r={c.pearson_r:.4f} rho={c.spearman_rho:.4f} p={c.p_value:.4g}")
    if not evals:
        print("no participant was eligible for evaluation", file=sys.stderr)
        return EXIT_EMPTY
    return EXIT_OK


def _parse_thresholds(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad threshold list {text!r}") from None


def cmd_screen(args) -> int:
    path = Path(args.report)
    if not path.is_file():
        raise CliError(EXIT_IO, f"no such file: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        evals = evals_from_dict(doc)
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(EXIT_MALFORMED, f"malformed report {path}: {exc}") from None
    agg = args.agg or doc.get("aggregate", {}).get("screening_agg", "macro")
    try:
        curve = screening_sweep(evals, args.thresholds, agg)
    except ValueError as exc:
        raise CliError(EXIT_FLAGS, str(exc)) from None
    text = curve_to_csv(curve)
    if args.out:
        out = _out_dir(args.out)
        _write(out / "screening.csv", text)
        _manifest(out, args, ["screening.csv"])
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _non_negative_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def _depth(text):
    return None if text.lower() == "none" else _non_negative_int(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="longbase", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a synthetic cohort")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=_non_negative_int, default=0)
    s.add_argument("--n-participants", type=_positive_int, default=73)
    s.add_argument("--study-days", type=_positive_int, default=56)
    s.add_argument("--prompts-per-day", type=_positive_int, default=4)
    s.add_argument("--gps-samples-per-day", type=_positive_int, default=48)
    s.add_argument("--mode-concentration", type=float, default=0.6)
    s.add_argument("--daily-distance-sigma", type=float, default=0.6)
    s.add_argument("--coupling", type=float, default=0.0)
    s.add_argument("--couple-by-variance", action="store_true")
    s.add_argument("--missing-prob", type=float, default=0.0)
    s.add_argument("--n-dropouts", type=_non_negative_int, default=0)
    s.set_defaults(func=cmd_synth)

    b = sub.add_parser("baselines", help="population vs personal mode baselines")
    b.add_argument("--reports", required=True)
    b.add_argument("--kind", choices=("mood", "energy"), default="mood")
    b.add_argument("--out")
    b.add_argument("--day-offset", type=int, default=0)
    b.set_defaults(func=cmd_baselines)

    e = sub.add_parser("eval", help="per-participant evaluation and screening")
    e.add_argument("--reports", required=True)
    e.add_argument("--gps", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--seed", type=_non_negative_int, default=0)
    e.add_argument("--k", type=_positive_int, default=5)
    e.add_argument("--min-days", type=_positive_int, default=14)
    e.add_argument("--grid-m", type=_positive_float, default=500.0)
    e.add_argument("--n-trees", type=_positive_int, default=100)
    e.add_argument("--max-depth", type=_depth, default=None)
    e.add_argument("--min-leaf", type=_positive_int, default=1)
    e.add_argument("--min-gain", type=float, default=0.0)
    e.add_argument("--cv", choices=("stratified", "forward"), default="stratified")
    e.add_argument("--model", choices=("majority", "tree", "forest"), default="forest")
    e.add_argument("--agg", choices=("micro", "macro"), default="macro")
    e.add_argument("--day-offset", type=int, default=0)
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("screen", help="re-run the screening sweep on a saved report")
    c.add_argument("--report", required=True)
    c.add_argument("--thresholds", type=_parse_thresholds, default=None,
                   help="comma separated ascending thresholds (default: every participant's variance)")
    c.add_argument("--agg", choices=("micro", "macro"), default=None)
    c.add_argument("--out")
    c.set_defaults(func=cmd_screen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "eval":
        if args.cv == "stratified" and args.k < 2:
            parser.print_usage(sys.stderr)
            print("longbase: error: --k must be >= 2 for stratified cv", file=sys.stderr)
            return EXIT_FLAGS
        if args.min_gain < 0:
            print("longbase: error: --min-gain must be >= 0", file=sys.stderr)
            return EXIT_FLAGS
    try:
        return args.func(args)
    except CliError as exc:
        print(f"longbase: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
