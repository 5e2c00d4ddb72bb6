import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import make_meal, random_meal, unit
from oracles import nn_double_loop
from trayrec.errors import DimensionMismatch, EmptyTemplateSet, UnknownClass, ZeroVector
from trayrec.features import class_similarity, classify_single, normalize
from trayrec.menu import MealTemplateSet


def test_normalize_345():
    np.testing.assert_allclose(normalize([3, 4], 2), [0.6, 0.8], atol=1e-15)


def test_normalize_already_unit():
    assert normalize([1, 0, 0]).tolist() == [1.0, 0.0, 0.0]


def test_normalize_zero():
    with pytest.raises(ZeroVector):
        normalize([0, 0])


def test_normalize_dimension():
    with pytest.raises(DimensionMismatch):
        normalize([1, 2, 3], 4)


def test_normalized_is_read_only():
    v = normalize([1.0, 2.0])
    with pytest.raises(ValueError):
        v[0] = 3.0


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, st.integers(1, 64), elements=st.floats(-1e6, 1e6)))
def test_normalize_unit_norm(raw):
    if np.linalg.norm(raw) < 1e-12:
        return
    assert abs(np.linalg.norm(normalize(raw)) - 1.0) <= 1e-6


def test_self_similarity():
    t = normalize([0.2, -0.5, 0.7])
    meal = make_meal({"c": {"y": [t]}})
    assert class_similarity("y", t, meal) == pytest.approx(1.0, abs=1e-9)


def test_similarity_is_max_over_templates():
    x = np.array([1.0, 0.0])
    t1 = np.array([0.2, np.sqrt(1 - 0.04)])
    t2 = np.array([0.9, np.sqrt(1 - 0.81)])
    meal = make_meal({"c": {"y": [t1, t2]}})
    assert class_similarity("y", x, meal) == pytest.approx(0.9, abs=1e-12)


def test_similarity_matches_loop(rng):
    meal = make_meal({"c": {"y": [rng.normal(size=16) for _ in range(5)]}})
    x = unit(rng, 16)
    expected = max(float(np.dot(t, x)) for t in meal.templates["y"])
    assert class_similarity("y", x, meal) == expected


def test_similarity_unknown_class(rng):
    meal = make_meal({"c": {"y": [[1.0, 0.0]]}})
    with pytest.raises(UnknownClass):
        class_similarity("zz", normalize([1.0, 0.0]), meal)


def test_classify_exact_match():
    meal = make_meal({"c": {"A": [[1, 0]], "B": [[0, 1]]}})
    assert classify_single(normalize([1, 0]), meal) == ("A", 1.0)


def test_classify_tie_goes_to_smaller_id():
    meal = make_meal({"c": {"B": [[1, 0]], "A": [[1, 0]]}})
    assert classify_single(normalize([1, 0]), meal) == ("A", 1.0)


def test_classify_empty():
    meal = MealTemplateSet("m", {}, {}, {}, {})
    with pytest.raises(EmptyTemplateSet):
        classify_single(normalize([1, 0]), meal)


def test_classify_matches_brute_force(rng):
    meal = random_meal(rng, 50, 32, max_templates=3)
    for _ in range(100):
        x = unit(rng, 32)
        assert classify_single(x, meal) == nn_double_loop(x, meal.templates)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 12), st.integers(2, 16))
def test_similarity_permutation_invariant(seed, n, dim):
    r = np.random.default_rng(seed)
    vecs = [r.normal(size=dim) for _ in range(n)]
    x = unit(r, dim)
    a = make_meal({"c": {"y": vecs}})
    b = make_meal({"c": {"y": [vecs[i] for i in r.permutation(n)]}})
    s = class_similarity("y", x, a)
    assert s == class_similarity("y", x, b)
    assert abs(s) <= 1 + 1e-9


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_no_class_strictly_better(seed):
    r = np.random.default_rng(seed)
    # Duplicate templates across classes force ties.
    base = [r.normal(size=4) for _ in range(3)]
    spec = {"c": {f"k{i}": [base[int(r.integers(3))]] for i in range(6)}}
    meal = make_meal(spec)
    x = unit(r, 4)
    y, s = classify_single(x, meal)
    sims = {k: class_similarity(k, x, meal) for k in meal.classes}
    assert all(v <= s for v in sims.values())
    assert y == min(k for k, v in sims.items() if v == s)
