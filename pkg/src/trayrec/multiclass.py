"""Multi-class baseline: keep every class whose similarity clears a threshold.

One global threshold is tuned on a third of the photos and tested on the
rest, rotating the tuning third across folds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InsufficientData, InvalidParameter, NoGroundTruth, ValidationError
from .evaluation import EvalReport, PhotoOutcome, evaluate, f_measure
from .features import FeatureVector, class_similarities, class_similarity
from .menu import MealTemplateSet
from .recognizer import Region, TrayObservation, TrayResult, meal_for


@dataclass(frozen=True)
class ThresholdConfig:
    grid_min: float = 0.0
    grid_max: float = 1.0
    grid_step: float = 0.005

    def grid(self) -> list[float]:
        return make_grid(self.grid_min, self.grid_max, self.grid_step)


def make_grid(lo: float = 0.0, hi: float = 1.0, step: float = 0.005) -> list[float]:
    """Evenly spaced thresholds from ``lo`` to ``hi`` inclusive (201 by default)."""
    if step <= 0:
        raise InvalidParameter(f"grid step must be positive, got {step}")
    if hi < lo:
        raise InvalidParameter(f"grid max {hi} below grid min {lo}")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    grid = [round(lo + k * step, 12) for k in range(n)]
    check_grid(grid)
    return grid


def check_grid(grid: Sequence[float]) -> None:
    if len(grid) == 0:
        raise InvalidParameter("threshold grid is empty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise InvalidParameter("threshold grid must be sorted ascending")
    if grid[0] < -1 or grid[-1] > 1:
        raise InvalidParameter("threshold grid values must lie in [-1, 1]")


def classify_multi(x: FeatureVector, meal: MealTemplateSet, theta: float) -> frozenset[str]:
    return frozenset(y for y in meal.class_ids if class_similarity(y, x, meal) >= theta)


@dataclass(frozen=True)
class MultiRegionResult:
    region: Region
    classes: frozenset[str]

    @property
    def items(self) -> frozenset[str]:
        return self.classes

    def to_dict(self) -> dict:
        return {"region": self.region.to_dict(), "classes": sorted(self.classes)}


def recognize_tray_multi(photo: TrayObservation, meal: MealTemplateSet, theta: float) -> TrayResult:
    results = tuple(
        MultiRegionResult(o.region, classify_multi(o.feature, meal, theta)) for o in photo.regions
    )
    items = frozenset().union(*(r.classes for r in results))
    return TrayResult(photo.photo_id, photo.meal_id, results, items)


def _best_scores(photo: TrayObservation, meal: MealTemplateSet) -> dict[str, float]:
    # A class is predicted for the tray iff some region scores it >= theta,
    # i.e. iff its best score over regions does.
    best: dict[str, float] = {}
    for o in photo.regions:
        for y, s in class_similarities(o.feature, meal).items():
            if y not in best or s > best[y]:
                best[y] = s
    return best


def _require_gt(photos) -> None:
    for p in photos:
        if p.ground_truth is None:
            raise NoGroundTruth(f"photo {p.photo_id!r} has no ground truth")


def threshold_curve(scores: Sequence[tuple[dict[str, float], frozenset]], grid: Sequence[float]):
    """Micro F-measure of tray prediction at every grid threshold.

    ``scores`` holds, per photo, the best score of each class and the
    ground-truth set. Counts are exact integers so the F values match
    :func:`trayrec.evaluation.set_metrics` bit for bit.
    """
    all_s, gt_s = [], []
    n_gt = 0
    for best, gt in scores:
        n_gt += len(gt)
        for y, s in best.items():
            all_s.append(s)
            if y in gt:
                gt_s.append(s)
    all_s = np.sort(np.asarray(all_s, dtype=np.float64))
    gt_s = np.sort(np.asarray(gt_s, dtype=np.float64))
    th = np.asarray(grid, dtype=np.float64)
    n_pred = len(all_s) - np.searchsorted(all_s, th, side="left")
    tp = len(gt_s) - np.searchsorted(gt_s, th, side="left")
    out = []
    for t, k_tp, k_pred in zip(grid, tp.tolist(), n_pred.tolist()):
        p = k_tp / k_pred if k_pred else 0.0
        r = k_tp / n_gt if n_gt else 0.0
        out.append((t, f_measure(p, r)))
    return out


def _pick(curve) -> float:
    best_t, best_f = None, -1.0
    for t, f in curve:
        if f >= best_f:  # ties go to the larger threshold
            best_t, best_f = t, f
    return best_t


def tune_threshold(photos: Sequence[TrayObservation], meals, grid: Sequence[float]) -> float:
    """Grid threshold maximizing micro F of multi-class tray prediction."""
    check_grid(grid)
    _require_gt(photos)
    scores = [(_best_scores(p, meal_for(p, meals)), p.ground_truth) for p in photos]
    return _pick(threshold_curve(scores, grid))


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]


def make_fold_plan(photo_ids: Sequence[str], fold_count: int = 3, seed: int = 0) -> FoldPlan:
    """Seeded split into ``fold_count`` tuning parts of ``n // fold_count`` photos.

    Each fold tunes on one part and tests on every other photo, so the
    leftover ``n % fold_count`` photos are always in the test side.
    """
    if fold_count < 2:
        raise InvalidParameter(f"need at least 2 folds, got {fold_count}")
    ids = list(photo_ids)
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate photo ids")
    q = len(ids) // fold_count
    if q == 0:
        raise InsufficientData(f"{len(ids)} photos cannot fill {fold_count} folds")
    order = np.random.default_rng(seed).permutation(len(ids))
    folds = []
    for i in range(fold_count):
        tune = {ids[j] for j in order[i * q:(i + 1) * q]}
        folds.append((
            tuple(x for x in ids if x in tune),
            tuple(x for x in ids if x not in tune),
        ))
    return FoldPlan(tuple(folds))


@dataclass
class FoldResult:
    theta: float
    tune_ids: tuple[str, ...]
    test_ids: tuple[str, ...]
    report: EvalReport
    outcomes: list[PhotoOutcome]


@dataclass
class CrossValidation:
    pooled: EvalReport
    folds: list[FoldResult]

    def to_dict(self) -> dict:
        return {
            "folds": [
                {
                    "fold": i,
                    "theta": f.theta,
                    "tune": list(f.tune_ids),
                    "test": list(f.test_ids),
                    "report": f.report.to_dict(),
                }
                for i, f in enumerate(self.folds)
            ],
            "pooled": self.pooled.to_dict(),
        }


def cross_validate(
    photos: Sequence[TrayObservation],
    meals,
    grid: Sequence[float],
    fold_count: int = 3,
    seed: int = 0,
) -> CrossValidation:
    """Tune on each third, test on the remaining photos, pool all test outcomes."""
    check_grid(grid)
    _require_gt(photos)
    plan = make_fold_plan([p.photo_id for p in photos], fold_count, seed)
    by_id = {p.photo_id: p for p in photos}
    best = {p.photo_id: _best_scores(p, meal_for(p, meals)) for p in photos}

    folds, pooled = [], []
    for tune_ids, test_ids in plan.folds:
        theta = _pick(threshold_curve([(best[i], by_id[i].ground_truth) for i in tune_ids], grid))
        outcomes = [
            PhotoOutcome(
                i,
                by_id[i].meal_id,
                frozenset(y for y, s in best[i].items() if s >= theta),
                by_id[i].ground_truth,
            )
            for i in test_ids
        ]
        report = evaluate(outcomes, meals)
        folds.append(FoldResult(theta, tune_ids, test_ids, report, outcomes))
        pooled.extend(outcomes)
    return CrossValidation(evaluate(pooled, meals), folds)
