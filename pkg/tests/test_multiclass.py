import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_meal, random_meal, unit
from oracles import counting_metrics
from trayrec.errors import InsufficientData, InvalidParameter, NoGroundTruth
from trayrec.evaluation import evaluate
from trayrec.features import class_similarity, classify_single
from trayrec.multiclass import (
    classify_multi,
    cross_validate,
    make_fold_plan,
    make_grid,
    recognize_tray_multi,
    tune_threshold,
)
from trayrec.recognizer import Region, RegionObservation, TrayObservation
from trayrec.synthetic import SyntheticMenuSpec, generate_synthetic_dataset

PLATE = Region(0, 0, 10, 10)


def test_theta_bounds(rng):
    meal = random_meal(rng, 7, 8)
    x = unit(rng, 8)
    assert classify_multi(x, meal, -1.0) == set(meal.classes)
    assert classify_multi(x, meal, 1.0 + 1e-6) == frozenset()


def test_matches_linear_scan(rng):
    meal = random_meal(rng, 10, 8)
    for _ in range(20):
        x = unit(rng, 8)
        expected = set()
        for y, ts in meal.templates.items():
            if max(float(np.dot(t, x)) for t in ts) >= 0.5:
                expected.add(y)
        assert classify_multi(x, meal, 0.5) == expected


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-1, 1), st.floats(-1, 1))
def test_antitone(seed, a, b):
    r = np.random.default_rng(seed)
    meal = random_meal(r, 8, 4)
    x = unit(r, 4)
    lo, hi = min(a, b), max(a, b)
    assert classify_multi(x, meal, hi) <= classify_multi(x, meal, lo)
    y, s = classify_single(x, meal)
    assert y in classify_multi(x, meal, min(lo, s))


def test_grid_default():
    g = make_grid()
    assert len(g) == 201 and g[0] == 0.0 and g[-1] == 1.0
    assert g[1] == 0.005
    with pytest.raises(InvalidParameter):
        make_grid(-2, 0, 0.5)


def _photo(pid, xs, gt, meal_id="m"):
    return TrayObservation(pid, meal_id, tuple(RegionObservation(PLATE, x) for x in xs), frozenset(gt))


def test_tune_all_classes_gt(rng):
    meal = random_meal(rng, 6, 8)
    photo = _photo("p", [unit(rng, 8)], meal.classes)
    assert tune_threshold([photo], meal, make_grid(0, 1, 0.05)) == 0.0


def test_tune_single_grid_point(rng):
    meal = random_meal(rng, 6, 8)
    photo = _photo("p", [unit(rng, 8)], ["y000"])
    assert tune_threshold([photo], meal, [0.3]) == 0.3


def test_tune_requires_gt(rng):
    meal = random_meal(rng, 3, 4)
    with pytest.raises(NoGroundTruth):
        tune_threshold([TrayObservation("p", "m", ())], meal, [0.1])


def _exhaustive_f(photos, meal, grid):
    out = []
    for theta in grid:
        pairs = [(recognize_tray_multi(p, meal, theta).predicted_items, p.ground_truth) for p in photos]
        out.append(counting_metrics(pairs)[2])
    return out


@pytest.fixture(scope="module")
def dataset():
    ds = generate_synthetic_dataset(SyntheticMenuSpec(tray_count=30, dim=32, seed=5))
    return ds.meals[0], ds.trays()


def test_tune_attains_grid_max(dataset):
    meal, photos = dataset
    grid = make_grid(0, 1, 0.005)
    theta = tune_threshold(photos, meal, grid)
    fs = _exhaustive_f(photos, meal, grid)
    best = max(fs)
    assert theta in grid
    assert fs[grid.index(theta)] == best
    # ties resolved toward the largest threshold
    assert theta == max(t for t, f in zip(grid, fs) if f == best)


def test_fold_plan_three_photos():
    plan = make_fold_plan(["a", "b", "c"], 3, seed=0)
    assert len(plan.folds) == 3
    for tune, test in plan.folds:
        assert len(tune) == 1 and len(test) == 2
    assert sorted(t for tune, _ in plan.folds for t in tune) == ["a", "b", "c"]


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 120), st.integers(2, 6), st.integers(0, 10**6))
def test_fold_plan_partitions(n, k, seed):
    ids = [f"p{i}" for i in range(n)]
    if n < k:
        with pytest.raises(InsufficientData):
            make_fold_plan(ids, k, seed)
        return
    plan = make_fold_plan(ids, k, seed)
    tunes = set()
    for tune, test in plan.folds:
        assert len(tune) == n // k
        assert not set(tune) & set(test)
        assert set(tune) | set(test) == set(ids)
        assert not tunes & set(tune)
        tunes |= set(tune)


def test_fold_plan_rejects_one_fold():
    with pytest.raises(InvalidParameter):
        make_fold_plan(["a", "b"], 1)


def test_fold_plan_seeded():
    ids = [str(i) for i in range(30)]
    assert make_fold_plan(ids, 3, 9) == make_fold_plan(ids, 3, 9)
    assert make_fold_plan(ids, 3, 9) != make_fold_plan(ids, 3, 10)


def test_identical_photos_identical_theta(dataset):
    meal, photos = dataset
    p = photos[0]
    clones = [TrayObservation(f"c{i}", p.meal_id, p.regions, p.ground_truth) for i in range(9)]
    cv = cross_validate(clones, meal, make_grid(), 3, seed=1)
    assert len({f.theta for f in cv.folds}) == 1


def test_pooled_equals_concatenation(dataset):
    meal, photos = dataset
    cv = cross_validate(photos, meal, make_grid(), 3, seed=4)
    concat = [o for f in cv.folds for o in f.outcomes]
    assert cv.pooled == evaluate(concat, meal)
    assert cv.pooled.n_photos == sum(len(f.test_ids) for f in cv.folds)
    p, r, f = counting_metrics([(o.predicted, o.ground_truth) for o in concat])
    assert (cv.pooled.precision, cv.pooled.recall, cv.pooled.f_measure) == pytest.approx((p, r, f), abs=1e-12)


def test_cv_predictions_match_classify_multi(dataset):
    meal, photos = dataset
    cv = cross_validate(photos, meal, make_grid(), 3, seed=4)
    by_id = {p.photo_id: p for p in photos}
    for fold in cv.folds:
        for o in fold.outcomes:
            assert o.predicted == recognize_tray_multi(by_id[o.photo_id], meal, fold.theta).predicted_items


def test_multi_region_union():
    e = np.eye(3)
    meal = make_meal({"c": {"a": [e[0]], "b": [e[1]], "z": [e[2]]}})
    photo = _photo("p", [e[0], e[1]], [])
    res = recognize_tray_multi(photo, meal, 0.9)
    assert res.predicted_items == {"a", "b"}
    assert [r.classes for r in res.region_results] == [{"a"}, {"b"}]
    assert class_similarity("z", e[0], meal) == 0.0
