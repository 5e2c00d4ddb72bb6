"""Compare single-class, multi-class and hierarchical recognition on synthetic trays.

    python scripts/run_comparison.py --trays 100 --seed 2019 [--scatter energy.csv]
"""

import argparse

from trayrec.evaluation import export_scatter, outcomes_from_results, evaluate
from trayrec.multiclass import cross_validate, make_grid
from trayrec.recognizer import recognize_batch, recognize_tray, recognize_tray_single
from trayrec.synthetic import SyntheticMenuSpec, generate_synthetic_dataset, mixed_share

ROWS = [
    ("Precision", lambda r: f"{r.precision:.3f}"),
    ("Recall", lambda r: f"{r.recall:.3f}"),
    ("F-measure", lambda r: f"{r.f_measure:.3f}"),
    ("MAE energy (kcal)", lambda r: _mae(r, "energy_kcal")),
    ("MAE protein (g)", lambda r: _mae(r, "protein_g")),
    ("MAE lipid (g)", lambda r: _mae(r, "lipid_g")),
    ("MAE carbohydrate (g)", lambda r: _mae(r, "carbohydrate_g")),
    ("Energy correlation", lambda r: "n/a" if r.pearson_r_energy is None else f"{r.pearson_r_energy:.3f}"),
]


def _mae(r, key):
    rel = r.mae_relative[key]
    return f"{r.mae[key]:.1f} ({100 * rel:.1f}%)" if rel is not None else f"{r.mae[key]:.1f}"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trays", type=int, default=100)
    ap.add_argument("--seed", type=int, default=2019)
    ap.add_argument("--dim", type=int, default=128)
    ap.add_argument("--separation", type=float, default=0.8)
    ap.add_argument("--clutter-max", type=float, default=1.5)
    ap.add_argument("--folds", type=int, default=3)
    ap.add_argument("--scatter", help="write hierarchical GT-vs-predicted energy CSV here")
    args = ap.parse_args()

    spec = SyntheticMenuSpec(tray_count=args.trays, seed=args.seed, dim=args.dim,
                             separation=args.separation, sigma=args.separation / 10,
                             clutter_max=args.clutter_max)
    ds = generate_synthetic_dataset(spec)
    meals, photos = ds.meals_by_id, ds.trays()

    single_out = outcomes_from_results(recognize_batch(photos, meals, recognize_tray_single), photos)
    hier_out = outcomes_from_results(recognize_batch(photos, meals, recognize_tray), photos)
    cv = cross_validate(photos, meals, make_grid(), args.folds, args.seed)
    reports = {"single": evaluate(single_out, meals), "multi": cv.pooled,
               "hierarchical": evaluate(hier_out, meals)}

    print(f"{len(photos)} trays, {100 * mixed_share(ds.tray_docs):.0f}% mixed plates, "
          f"multi-class thresholds per fold: {[f.theta for f in cv.folds]}")
    width = 22
    print("".ljust(width) + "".join(k.rjust(18) for k in reports))
    for label, fmt in ROWS:
        print(label.ljust(width) + "".join(fmt(r).rjust(18) for r in reports.values()))
    if args.scatter:
        n = export_scatter(hier_out, meals, args.scatter)
        print(f"wrote {n} rows to {args.scatter}")


if __name__ == "__main__":
    main()
