"""Tray-level recognition metrics and nutrition error.

Precision/recall are micro-averaged over photos (pooled counts); per-photo
macro averages are reported alongside. Nutrition assumes one serving per
item and sums the items of a tray.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import DegenerateVariance, NoGroundTruth
from .menu import NUTRIENT_KEYS, Menu


class TrayNutrition(NamedTuple):
    energy: float
    protein: float
    lipid: float
    carbohydrate: float


class PhotoOutcome(NamedTuple):
    photo_id: str
    meal_id: str
    predicted: frozenset
    ground_truth: frozenset | None


class SetMetrics(NamedTuple):
    precision: float
    recall: float
    f_measure: float
    true_positives: int
    n_predicted: int
    n_ground_truth: int
    warnings: tuple[str, ...] = ()


@dataclass
class EvalReport:
    precision: float
    recall: float
    f_measure: float
    mae: dict
    mae_relative: dict
    pearson_r_energy: float | None
    n_photos: int
    macro_precision: float = 0.0
    macro_recall: float = 0.0
    macro_f_measure: float = 0.0
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def f_measure(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def _menu(outcome, menus) -> Menu:
    if isinstance(menus, Menu):
        return menus
    return menus[outcome.meal_id]


def tray_nutrition(items: Iterable[str], meal: Menu) -> TrayNutrition:
    facts = [meal.nutrition_of(y) for y in sorted(set(items))]
    return TrayNutrition(*(math.fsum(f[k] for f in facts) for k in range(4)))


def set_metrics(pairs: Iterable[tuple[Iterable[str], Iterable[str]]]) -> SetMetrics:
    """Micro-averaged precision, recall and F over ``(predicted, gt)`` pairs."""
    tp = n_pred = n_gt = 0
    for pred, gt in pairs:
        if gt is None:
            raise NoGroundTruth("every photo needs ground truth for set metrics")
        pred, gt = set(pred), set(gt)
        tp += len(pred & gt)
        n_pred += len(pred)
        n_gt += len(gt)
    warnings = []
    if n_pred:
        p = tp / n_pred
    else:
        p = 0.0
        warnings.append("no predicted items: precision set to 0")
    if n_gt:
        r = tp / n_gt
    else:
        r = 0.0
        warnings.append("no ground-truth items: recall set to 0")
    return SetMetrics(p, r, f_measure(p, r), tp, n_pred, n_gt, tuple(warnings))


def macro_metrics(pairs) -> tuple[float, float, float]:
    """Per-photo precision/recall averaged over the photos where each is defined."""
    ps, rs = [], []
    for pred, gt in pairs:
        pred, gt = set(pred), set(gt)
        hit = len(pred & gt)
        if pred:
            ps.append(hit / len(pred))
        if gt:
            rs.append(hit / len(gt))
    p = math.fsum(ps) / len(ps) if ps else 0.0
    r = math.fsum(rs) / len(rs) if rs else 0.0
    return p, r, f_measure(p, r)


def _nutrition_pairs(outcomes, menus):
    out = []
    for o in outcomes:
        if o.ground_truth is None:
            raise NoGroundTruth(f"photo {o.photo_id!r} has no ground truth")
        m = _menu(o, menus)
        out.append((tray_nutrition(o.predicted, m), tray_nutrition(o.ground_truth, m), bool(o.ground_truth)))
    return out


def nutrition_mae(outcomes: Sequence[PhotoOutcome], menus) -> dict[str, tuple[float, float | None]]:
    """Per nutrient: (mean absolute error, error relative to mean ground truth).

    The relative error is ``None`` when the mean ground truth is zero. Photos
    with an empty ground-truth set do not enter that mean.
    """
    rows = _nutrition_pairs(outcomes, menus)
    out = {}
    for k, name in enumerate(NUTRIENT_KEYS):
        if rows:
            mae = math.fsum(abs(p[k] - g[k]) for p, g, _ in rows) / len(rows)
        else:
            mae = 0.0
        gts = [g[k] for _, g, nonempty in rows if nonempty]
        mean_gt = math.fsum(gts) / len(gts) if gts else 0.0
        out[name] = (mae, mae / mean_gt if mean_gt > 0 else None)
    return out


def _pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    n = len(xs)
    if n < 2:
        raise DegenerateVariance("correlation needs at least two photos")
    if min(xs) == max(xs) or min(ys) == max(ys):
        raise DegenerateVariance("correlation undefined for a constant series")
    mx, my = math.fsum(xs) / n, math.fsum(ys) / n
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    sxx = math.fsum(a * a for a in dx)
    syy = math.fsum(b * b for b in dy)
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def energy_series(outcomes, menus) -> tuple[list[float], list[float]]:
    rows = _nutrition_pairs(outcomes, menus)
    return [g.energy for _, g, _ in rows], [p.energy for p, _, _ in rows]


def energy_correlation(outcomes: Sequence[PhotoOutcome], menus) -> float:
    """Pearson correlation between ground-truth and predicted tray energy."""
    gt, pred = energy_series(outcomes, menus)
    return _pearson(gt, pred)


def export_scatter(outcomes: Sequence[PhotoOutcome], menus, sink) -> int:
    """Write ``photo_id,gt_energy_kcal,predicted_energy_kcal`` rows; return the count."""
    gt, pred = energy_series(outcomes, menus)
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8", newline="") as fh:
            return _write_scatter(fh, outcomes, gt, pred)
    return _write_scatter(sink, outcomes, gt, pred)


def _write_scatter(fh, outcomes, gt, pred) -> int:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["photo_id", "gt_energy_kcal", "predicted_energy_kcal"])
    for o, g, p in zip(outcomes, gt, pred):
        w.writerow([o.photo_id, repr(g), repr(p)])
    return len(outcomes)


def evaluate(outcomes: Sequence[PhotoOutcome], menus: Menu | Mapping[str, Menu]) -> EvalReport:
    outcomes = list(outcomes)
    pairs = [(o.predicted, o.ground_truth) for o in outcomes]
    sm = set_metrics(pairs)
    warnings = list(sm.warnings)
    macro = macro_metrics(pairs)
    errs = nutrition_mae(outcomes, menus)
    for name, (_, rel) in errs.items():
        if rel is None:
            warnings.append(f"mean ground-truth {name} is zero: relative MAE undefined")
    try:
        r = energy_correlation(outcomes, menus)
    except DegenerateVariance as exc:
        r = None
        warnings.append(f"energy correlation undefined: {exc}")
    return EvalReport(
        precision=sm.precision,
        recall=sm.recall,
        f_measure=sm.f_measure,
        mae={k: v[0] for k, v in errs.items()},
        mae_relative={k: v[1] for k, v in errs.items()},
        pearson_r_energy=r,
        n_photos=len(outcomes),
        macro_precision=macro[0],
        macro_recall=macro[1],
        macro_f_measure=macro[2],
        warnings=warnings,
    )


def outcomes_from_results(results, photos) -> list[PhotoOutcome]:
    """Pair recognition results with the ground truth of the same photos."""
    return [
        PhotoOutcome(r.photo_id, r.meal_id, r.predicted_items, p.ground_truth)
        for r, p in zip(results, photos)
    ]
