import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from trayrec.features import normalize
from trayrec.menu import Category, FoodClass, MealTemplateSet, NutritionFacts

ACCEPTANCE_LINES: list[str] = []


def make_meal(spec, triggers=(), nutrition=None, meal_id="m"):
    """Build a meal from ``{category: {class: [raw vectors]}}``."""
    cats, classes, templates, ids = {}, {}, {}, {}
    for cat, members in spec.items():
        cats[cat] = Category(cat, cat, cat in triggers)
        for y, vecs in members.items():
            facts = (nutrition or {}).get(y, NutritionFacts(100.0, 5.0, 3.0, 10.0))
            classes[y] = FoodClass(y, y, cat, facts)
            templates[y] = tuple(normalize(v) for v in vecs)
            ids[y] = tuple(f"{y}/t{k}" for k in range(len(vecs)))
    return MealTemplateSet(meal_id, cats, classes, templates, ids)


def random_meal(rng, n_classes, dim, max_templates=3, n_categories=1, triggers=()):
    spec = {}
    for k in range(n_classes):
        cat = f"cat{k % n_categories}"
        n_t = int(rng.integers(1, max_templates + 1))
        spec.setdefault(cat, {})[f"y{k:03d}"] = [rng.normal(size=dim) for _ in range(n_t)]
    return make_meal(spec, triggers=triggers)


def unit(rng, dim):
    return normalize(rng.normal(size=dim))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
