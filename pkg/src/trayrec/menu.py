"""Menus, nutrition facts and the per-meal template set.

A meal manifest is a JSON document::

    {"meal_id": "...",
     "categories": [{"id", "name", "fine_grained_trigger"}],
     "classes": [{"id", "name", "category_id",
                  "nutrition": {"energy_kcal", "protein_g", "lipid_g", "carbohydrate_g"},
                  "template_feature_ids": ["..."]}]}

Template feature ids resolve against a :class:`~trayrec.ingestion.FeatureStore`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping, NamedTuple

import numpy as np

from . import _io
from .errors import (
    DimensionMismatch,
    ParseError,
    UnknownClass,
    ValidationError,
    ZeroVector,
)
from .features import FeatureVector, is_unit, normalize

NUTRIENT_KEYS = ("energy_kcal", "protein_g", "lipid_g", "carbohydrate_g")


class NutritionFacts(NamedTuple):
    """Per-serving facts: kcal, then grams of protein, lipid, carbohydrate."""

    energy: float
    protein: float
    lipid: float
    carbohydrate: float

    @classmethod
    def from_dict(cls, d: Mapping) -> "NutritionFacts":
        try:
            values = [float(d[k]) for k in NUTRIENT_KEYS]
        except KeyError as exc:
            raise ValidationError(f"nutrition missing field {exc}") from None
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"nutrition value not numeric: {exc}") from None
        facts = cls(*values)
        facts.validate()
        return facts

    def validate(self) -> None:
        for name, v in zip(NUTRIENT_KEYS, self):
            if not math.isfinite(v) or v < 0:
                raise ValidationError(f"nutrition {name}={v} must be finite and >= 0")

    def to_dict(self) -> dict:
        return dict(zip(NUTRIENT_KEYS, self))


@dataclass(frozen=True)
class Category:
    id: str
    name: str
    fine_grained_trigger: bool = False


@dataclass(frozen=True)
class FoodClass:
    id: str
    name: str
    category_id: str
    nutrition: NutritionFacts


@dataclass(frozen=True)
class Menu:
    """Categories and classes of one meal, without template vectors."""

    meal_id: str
    categories: Mapping[str, Category]
    classes: Mapping[str, FoodClass]

    def __post_init__(self):
        object.__setattr__(self, "categories", MappingProxyType(dict(self.categories)))
        object.__setattr__(self, "classes", MappingProxyType(dict(self.classes)))
        for c in self.classes.values():
            if c.category_id not in self.categories:
                raise ValidationError(
                    f"class {c.id!r} references undeclared category {c.category_id!r}"
                )

    @property
    def class_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.classes))

    def food_class(self, y: str) -> FoodClass:
        try:
            return self.classes[y]
        except KeyError:
            raise UnknownClass(f"class {y!r} not in meal {self.meal_id!r}") from None

    def category_of(self, y: str) -> Category:
        return self.categories[self.food_class(y).category_id]

    def nutrition_of(self, y: str) -> NutritionFacts:
        return self.food_class(y).nutrition


@dataclass(frozen=True, eq=False)
class MealTemplateSet(Menu):
    """A menu plus 1..K unit-norm template vectors per class.

    Compared by identity; use :func:`same_meal` for structural equality.
    """

    templates: Mapping[str, tuple[FeatureVector, ...]] = field(default_factory=dict)
    template_ids: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        super().__post_init__()
        templates = {y: tuple(vs) for y, vs in self.templates.items()}
        for y in templates:
            if y not in self.classes:
                raise ValidationError(f"templates given for undeclared class {y!r}")
        dims = set()
        for y in self.classes:
            vs = templates.get(y, ())
            if not vs:
                raise ValidationError(f"class {y!r} has no template vectors")
            for v in vs:
                if not is_unit(v):
                    raise ValidationError(f"template of class {y!r} is not unit-norm")
                dims.add(v.shape)
        if len(dims) > 1:
            raise DimensionMismatch(f"template vectors of mixed shapes {sorted(dims)}")
        object.__setattr__(self, "templates", MappingProxyType(templates))
        object.__setattr__(
            self,
            "template_ids",
            MappingProxyType({y: tuple(ids) for y, ids in self.template_ids.items()}),
        )

    @property
    def n_templates(self) -> int:
        return sum(len(vs) for vs in self.templates.values())

    @property
    def dim(self) -> int | None:
        for vs in self.templates.values():
            return int(vs[0].shape[0])
        return None

    def with_triggers(self, enabled: bool) -> "MealTemplateSet":
        """Copy with every category's fine-grained trigger forced to ``enabled``."""
        cats = {k: replace(c, fine_grained_trigger=enabled) for k, c in self.categories.items()}
        return replace(self, categories=cats)


def nutrition_of(y: str, meal: Menu) -> NutritionFacts:
    return meal.nutrition_of(y)


def _menu_parts(doc) -> tuple[str, dict, dict, dict]:
    if not isinstance(doc, dict):
        raise ParseError("meal manifest must be a JSON object")
    try:
        meal_id = str(doc["meal_id"])
        raw_cats = doc["categories"]
        raw_classes = doc["classes"]
    except KeyError as exc:
        raise ParseError(f"meal manifest missing field {exc}") from None
    if not isinstance(raw_cats, list) or not isinstance(raw_classes, list):
        raise ParseError("'categories' and 'classes' must be arrays")

    categories: dict[str, Category] = {}
    for rc in raw_cats:
        try:
            cat = Category(str(rc["id"]), str(rc.get("name", rc["id"])),
                           bool(rc.get("fine_grained_trigger", False)))
        except (KeyError, TypeError, AttributeError) as exc:
            raise ParseError(f"malformed category entry {rc!r}") from exc
        if cat.id in categories:
            raise ValidationError(f"duplicate category id {cat.id!r}")
        categories[cat.id] = cat

    classes: dict[str, FoodClass] = {}
    feature_ids: dict[str, tuple[str, ...]] = {}
    for rc in raw_classes:
        try:
            cid = str(rc["id"])
            fc = FoodClass(cid, str(rc.get("name", cid)), str(rc["category_id"]),
                           NutritionFacts.from_dict(rc["nutrition"]))
            fids = tuple(str(f) for f in rc.get("template_feature_ids", ()))
        except (KeyError, TypeError, AttributeError) as exc:
            raise ParseError(f"malformed class entry {rc!r}") from exc
        if cid in classes:
            raise ValidationError(f"duplicate class id {cid!r}")
        if fc.category_id not in categories:
            raise ValidationError(
                f"class {cid!r} references undeclared category {fc.category_id!r}"
            )
        classes[cid] = fc
        feature_ids[cid] = fids
    return meal_id, categories, classes, feature_ids


def load_menu(source) -> Menu:
    """Parse only the menu part of a manifest (no feature store needed)."""
    meal_id, categories, classes, _ = _menu_parts(_io.read_json(source))
    return Menu(meal_id, categories, classes)


def meal_from_dict(doc, store) -> MealTemplateSet:
    meal_id, categories, classes, feature_ids = _menu_parts(doc)
    templates = {}
    for cid, fids in feature_ids.items():
        if not fids:
            raise ValidationError(f"class {cid!r} has an empty template list")
        vs = []
        for fid in fids:
            try:
                vs.append(normalize(store.raw(fid), store.dim))
            except ZeroVector:
                raise ValidationError(f"template feature {fid!r} is a zero vector") from None
        templates[cid] = tuple(vs)
    return MealTemplateSet(meal_id, categories, classes, templates, feature_ids)


def load_meal_manifest(source, store) -> MealTemplateSet:
    """Load and validate a meal manifest, resolving template ids in ``store``."""
    return meal_from_dict(_io.read_json(source), store)


def meal_to_dict(meal: MealTemplateSet) -> dict:
    missing = [y for y in meal.classes if not meal.template_ids.get(y)]
    if missing:
        raise ValidationError(f"no template feature ids recorded for {missing}")
    return {
        "meal_id": meal.meal_id,
        "categories": [
            {"id": c.id, "name": c.name, "fine_grained_trigger": c.fine_grained_trigger}
            for c in meal.categories.values()
        ],
        "classes": [
            {
                "id": c.id,
                "name": c.name,
                "category_id": c.category_id,
                "nutrition": c.nutrition.to_dict(),
                "template_feature_ids": list(meal.template_ids[c.id]),
            }
            for c in meal.classes.values()
        ],
    }


def dump_meal_manifest(meal: MealTemplateSet) -> str:
    return _io.dumps(meal_to_dict(meal)) + "\n"


def same_meal(a: MealTemplateSet, b: MealTemplateSet) -> bool:
    """Structural equality, comparing template vectors elementwise."""
    if (a.meal_id, dict(a.categories), dict(a.classes)) != (b.meal_id, dict(b.categories), dict(b.classes)):
        return False
    if set(a.templates) != set(b.templates):
        return False
    for y, vs in a.templates.items():
        ws = b.templates[y]
        if len(vs) != len(ws) or not all(np.array_equal(v, w) for v, w in zip(vs, ws)):
            return False
    return True
