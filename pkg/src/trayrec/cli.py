"""Command-line entry point.

    trayrec generate --out DIR [spec flags]
    trayrec recognize --meal M.json --features F.tsv --trays T.json... --method hierarchical
    trayrec evaluate --predictions P.jsonl --trays T.json... --meal M.json [--scatter S.csv]
    trayrec tune-threshold --meal M.json --features F.tsv --trays T.json... [--folds 3 --seed 0]

Exit codes: 0 success, 1 validation or usage error, 2 I/O error.
Any subcommand accepts ``--config FILE.json`` whose keys are flag names;
flags given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import _io
from .errors import TrayRecError, ValidationError
from .evaluation import PhotoOutcome, evaluate, export_scatter, tray_nutrition
from .ingestion import load_feature_store, load_trays, provider_for, read_tray_docs, result_to_record
from .menu import load_meal_manifest, load_menu
from .multiclass import cross_validate, make_grid, recognize_tray_multi
from .recognizer import WindowConfig, meal_for, recognize_tray, recognize_tray_single
from .synthetic import SyntheticMenuSpec, generate_synthetic_dataset

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2


class UsageError(TrayRecError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


_DEFAULTS = {
    "method": "hierarchical",
    "window_fraction": [0.5],
    "stride_fraction": 0.25,
    "grid_min": 0.0,
    "grid_max": 1.0,
    "grid_step": 0.005,
    "folds": 3,
    "seed": 0,
}
_REQUIRED = {
    "generate": ["out"],
    "recognize": ["meal", "features", "trays"],
    "evaluate": ["predictions", "trays", "meal"],
    "tune-threshold": ["meal", "features", "trays"],
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file of flag values")

    p = _Parser(prog="trayrec", description="Hierarchical food recognition on buffet trays.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("generate", parents=[common], help="write a synthetic dataset")
    g.add_argument("--out")
    spec_flags = [
        ("--categories", "category_count", int),
        ("--classes-per-category", "classes_per_category", int),
        ("--dim", "dim", int),
        ("--separation", "separation", float),
        ("--sigma", "sigma", float),
        ("--seed", "seed", int),
        ("--templates-per-class", "templates_per_class", int),
        ("--meals", "meal_count", int),
        ("--trays", "tray_count", int),
        ("--regions-min", "regions_min", int),
        ("--regions-max", "regions_max", int),
        ("--mixed-fraction", "mixed_fraction", float),
        ("--mixed-size", "mixed_size", int),
        ("--category-affinity", "category_affinity", float),
        ("--clutter-max", "clutter_max", float),
    ]
    for flag, dest, typ in spec_flags:
        g.add_argument(flag, dest=dest, type=typ)
    g.add_argument("--trigger-categories", dest="trigger_categories", type=int, nargs="*")

    r = sub.add_parser("recognize", parents=[common], help="predict items per tray")
    r.add_argument("--meal", nargs="+")
    r.add_argument("--features")
    r.add_argument("--trays", nargs="+")
    r.add_argument("--method", choices=["single", "multi", "hierarchical"])
    r.add_argument("--theta", type=float)
    r.add_argument("--window-fraction", type=float, nargs="+")
    r.add_argument("--stride-fraction", type=float)
    r.add_argument("--out", help="JSON-lines output (default: stdout)")

    e = sub.add_parser("evaluate", parents=[common], help="score predictions against ground truth")
    e.add_argument("--predictions")
    e.add_argument("--trays", nargs="+")
    e.add_argument("--meal", nargs="+")
    e.add_argument("--scatter", help="CSV of ground-truth vs predicted energy")
    e.add_argument("--out", help="report JSON (default: stdout)")

    t = sub.add_parser("tune-threshold", parents=[common], help="cross-validate the multi-class threshold")
    t.add_argument("--meal", nargs="+")
    t.add_argument("--features")
    t.add_argument("--trays", nargs="+")
    t.add_argument("--grid-min", type=float)
    t.add_argument("--grid-max", type=float)
    t.add_argument("--grid-step", type=float)
    t.add_argument("--folds", type=int)
    t.add_argument("--seed", type=int)
    t.add_argument("--out", help="result JSON (default: stdout)")
    return p


def _merge_config(args) -> None:
    cfg = {}
    if args.config:
        cfg = _io.read_json(args.config)
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest == "config":
            continue
        if not hasattr(args, dest):
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        if getattr(args, dest) is None:
            setattr(args, dest, value)
    if args.command != "generate":
        for dest, value in _DEFAULTS.items():
            if hasattr(args, dest) and getattr(args, dest) is None:
                setattr(args, dest, value)
    missing = [d for d in _REQUIRED[args.command] if getattr(args, d) is None]
    if missing:
        raise UsageError(f"missing required option(s): {', '.join('--' + m.replace('_', '-') for m in missing)}")


def _emit(text: str, path) -> None:
    if path:
        _io.write_text(path, text)
    else:
        sys.stdout.write(text)


def _meals(paths, store):
    meals = {}
    for p in paths:
        m = load_meal_manifest(p, store) if store is not None else load_menu(p)
        if m.meal_id in meals:
            raise ValidationError(f"meal {m.meal_id!r} given twice")
        meals[m.meal_id] = m
    return meals


def cmd_generate(args) -> int:
    values = {k: v for k, v in vars(args).items() if v is not None}
    if "trigger_categories" in values:
        values["trigger_categories"] = tuple(values["trigger_categories"])
    known = SyntheticMenuSpec.__dataclass_fields__
    spec = SyntheticMenuSpec(**{k: v for k, v in values.items() if k in known})
    generate_synthetic_dataset(spec).write(args.out)
    return EXIT_OK


def cmd_recognize(args) -> int:
    if args.method == "multi" and args.theta is None:
        raise UsageError("--method multi requires --theta")
    cfg = WindowConfig(tuple(args.window_fraction), args.stride_fraction)
    store = load_feature_store(args.features)
    meals = _meals(args.meal, store)
    lines = []
    for tray in load_trays(args.trays, store):
        meal = meal_for(tray, meals)
        if args.method == "multi":
            result = recognize_tray_multi(tray, meal, args.theta)
        elif args.method == "single":
            result = recognize_tray_single(tray, meal, cfg)
        else:
            result = recognize_tray(tray, meal, cfg, provider_for(tray))
        record = result_to_record(result, tray_nutrition(result.predicted_items, meal))
        lines.append(_io.dumps(record, indent=None) + "\n")
    _emit("".join(lines), args.out)
    return EXIT_OK


def read_predictions(path) -> dict[str, frozenset]:
    preds = {}
    for lineno, line in enumerate(_io.read_text(path).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            preds[str(rec["photo_id"])] = frozenset(str(y) for y in rec["predicted_items"])
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValidationError(f"{path}:{lineno}: bad prediction record ({exc})") from None
    return preds


def cmd_evaluate(args) -> int:
    meals = _meals(args.meal, None)
    preds = read_predictions(args.predictions)
    outcomes = []
    for doc, _ in read_tray_docs(args.trays):
        pid = str(doc.get("photo_id"))
        if doc.get("ground_truth") is None:
            raise ValidationError(f"photo {pid!r} has no ground truth")
        if pid not in preds:
            raise ValidationError(f"no prediction for photo {pid!r}")
        outcomes.append(PhotoOutcome(pid, str(doc.get("meal_id")), preds[pid],
                                     frozenset(str(g) for g in doc["ground_truth"])))
    for o in outcomes:
        meal_for(o, meals)
    report = evaluate(outcomes, meals)
    if args.scatter:
        export_scatter(outcomes, meals, args.scatter)
    _emit(_io.dumps(report.to_dict()) + "\n", args.out)
    return EXIT_OK


def cmd_tune_threshold(args) -> int:
    grid = make_grid(args.grid_min, args.grid_max, args.grid_step)
    store = load_feature_store(args.features)
    meals = _meals(args.meal, store)
    trays = load_trays(args.trays, store)
    cv = cross_validate(trays, meals, grid, args.folds, args.seed)
    _emit(_io.dumps(cv.to_dict()) + "\n", args.out)
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "recognize": cmd_recognize,
    "evaluate": cmd_evaluate,
    "tune-threshold": cmd_tune_threshold,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
        _merge_config(args)
        return COMMANDS[args.command](args)
    except OSError as exc:
        print(f"trayrec: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (TrayRecError, ValueError) as exc:
        print(f"trayrec: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
