"""Synthetic buffet data with known ground truth.

Each class gets a unit-norm centre; classes of one category lean towards a
shared category direction (``category_affinity`` is roughly the cosine
between two same-category centres). Templates are clean close-ups: centre
plus small isotropic noise. Tray regions additionally carry clutter, an
isotropic component of random magnitude standing in for tray, plate rims
and lighting. Clutter is nearly orthogonal to every centre, so it leaves
nearest-neighbour ranking intact while shrinking all similarities, which is
what makes a single global threshold brittle.

A mixed plate (a salad, say) shows the centroid of its members' centres at
plate level, while each of its sliding sub-windows shows one member.
"""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import _io
from .errors import InvalidSpec
from .ingestion import FeatureStore, format_feature_store, tray_from_dict
from .menu import MealTemplateSet, dump_meal_manifest, meal_from_dict
from .recognizer import Region, TrayObservation, WindowConfig, windows_for

TRAY_WIDTH, TRAY_HEIGHT = 800, 600
_GRID_COLS, _GRID_ROWS = 4, 3
_MAX_TRIES = 2000


@dataclass(frozen=True)
class SyntheticMenuSpec:
    category_count: int = 5
    classes_per_category: int = 8
    trigger_categories: tuple[int, ...] = (0, 1)
    dim: int = 128
    separation: float = 0.8
    sigma: float = 0.08
    seed: int = 0
    templates_per_class: int = 3
    meal_count: int = 1
    tray_count: int = 100
    regions_min: int = 5
    regions_max: int = 7
    mixed_fraction: float = 0.3
    mixed_size: int = 3
    category_affinity: float = 0.5
    clutter_max: float = 1.5
    window_fraction: float = 0.5
    stride_fraction: float = 0.25
    decimals: int = 6

    def __post_init__(self):
        object.__setattr__(self, "trigger_categories", tuple(int(c) for c in self.trigger_categories))
        problems = []
        if self.separation <= 0:
            problems.append("separation must be > 0")
        if self.sigma < 0:
            problems.append("sigma must be >= 0")
        if self.dim < 2:
            problems.append("dim must be >= 2")
        if self.category_count < 1 or self.classes_per_category < 1:
            problems.append("need at least one category and one class per category")
        if any(not 0 <= c < self.category_count for c in self.trigger_categories):
            problems.append("trigger category index out of range")
        if self.templates_per_class < 1:
            problems.append("templates_per_class must be >= 1")
        if self.meal_count < 1 or self.tray_count < 0:
            problems.append("meal_count must be >= 1 and tray_count >= 0")
        if not 1 <= self.regions_min <= self.regions_max:
            problems.append("need 1 <= regions_min <= regions_max")
        if not 0 <= self.mixed_fraction <= 1:
            problems.append("mixed_fraction must be in [0, 1]")
        if self.mixed_size < 2:
            problems.append("mixed_size must be >= 2")
        if not 0 <= self.category_affinity < 1:
            problems.append("category_affinity must be in [0, 1)")
        if self.clutter_max < 0:
            problems.append("clutter_max must be >= 0")
        if problems:
            raise InvalidSpec("; ".join(problems))


@dataclass
class GeneratedDataset:
    spec: SyntheticMenuSpec
    meals: list[MealTemplateSet]
    store: FeatureStore
    tray_docs: list[dict]
    centers: dict[str, dict[str, np.ndarray]] = field(repr=False, default_factory=dict)

    @property
    def meals_by_id(self) -> dict[str, MealTemplateSet]:
        return {m.meal_id: m for m in self.meals}

    def trays(self) -> list[TrayObservation]:
        return [tray_from_dict(d, self.store) for d in self.tray_docs]

    def write(self, out_dir) -> list[str]:
        """Write ``meals/``, ``features.tsv``, ``trays/`` and ``spec.json``; return paths."""
        paths = []
        os.makedirs(os.path.join(out_dir, "meals"), exist_ok=True)
        os.makedirs(os.path.join(out_dir, "trays"), exist_ok=True)
        for m in self.meals:
            p = os.path.join(out_dir, "meals", f"{m.meal_id}.json")
            _io.write_text(p, dump_meal_manifest(m))
            paths.append(p)
        p = os.path.join(out_dir, "features.tsv")
        _io.write_text(p, format_feature_store(self.store))
        paths.append(p)
        for d in self.tray_docs:
            p = os.path.join(out_dir, "trays", f"{d['photo_id']}.json")
            _io.write_text(p, _io.dumps(d) + "\n")
            paths.append(p)
        p = os.path.join(out_dir, "spec.json")
        _io.write_text(p, _io.dumps(asdict(self.spec)) + "\n")
        paths.append(p)
        return paths


def _unit(rng, dim):
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)


def _centers(rng, spec: SyntheticMenuSpec) -> list[list[np.ndarray]]:
    a = spec.category_affinity
    accepted: list[np.ndarray] = []
    by_cat = []
    for _ in range(spec.category_count):
        cat_dir = _unit(rng, spec.dim)
        row = []
        for _ in range(spec.classes_per_category):
            for _ in range(_MAX_TRIES):
                c = math.sqrt(a) * cat_dir + math.sqrt(1 - a) * _unit(rng, spec.dim)
                c /= np.linalg.norm(c)
                if all(np.linalg.norm(c - o) >= spec.separation for o in accepted):
                    break
            else:
                raise InvalidSpec(
                    f"could not place class centres {spec.separation} apart in {spec.dim} dims"
                )
            accepted.append(c)
            row.append(c)
        by_cat.append(row)
    return by_cat


class _Generator:
    def __init__(self, spec: SyntheticMenuSpec):
        self.spec = spec
        self.rng = np.random.default_rng(spec.seed)
        self.vectors: dict[str, np.ndarray] = {}

    def noise(self, scale: float) -> np.ndarray:
        # Isotropic, expected squared norm scale**2 whatever the dimension.
        return self.rng.normal(size=self.spec.dim) * (scale / math.sqrt(self.spec.dim))

    def put(self, fid: str, v: np.ndarray) -> str:
        self.vectors[fid] = np.round(v, self.spec.decimals)
        return fid

    def observed(self, fid: str, signal: np.ndarray) -> str:
        clutter = self.rng.uniform(0.0, self.spec.clutter_max)
        return self.put(fid, signal + self.noise(self.spec.sigma) + self.noise(clutter))

    def meal(self, m: int):
        spec, rng = self.spec, self.rng
        meal_id = f"meal-{m:02d}"
        centers = _centers(rng, spec)
        categories, classes, class_centers = [], [], {}
        for ci, row in enumerate(centers):
            cat_id = f"cat{ci}"
            categories.append({
                "id": cat_id,
                "name": f"category {ci}",
                "fine_grained_trigger": ci in spec.trigger_categories,
            })
            for k, center in enumerate(row):
                cid = f"c{ci}i{k}"
                class_centers[cid] = center
                fids = [
                    self.put(f"{meal_id}/{cid}/t{t}", center + self.noise(spec.sigma))
                    for t in range(spec.templates_per_class)
                ]
                classes.append({
                    "id": cid,
                    "name": f"item {k} of category {ci}",
                    "category_id": cat_id,
                    "nutrition": {
                        "energy_kcal": round(float(rng.uniform(10, 400)), 1),
                        "protein_g": round(float(rng.uniform(0, 30)), 1),
                        "lipid_g": round(float(rng.uniform(0, 25)), 1),
                        "carbohydrate_g": round(float(rng.uniform(0, 60)), 1),
                    },
                    "template_feature_ids": fids,
                })
        doc = {"meal_id": meal_id, "categories": categories, "classes": classes}
        return doc, class_centers

    def plates(self, doc) -> list[tuple[str, ...]]:
        """Item tuples for one tray: mixed plates first, then single-item plates."""
        spec, rng = self.spec, self.rng
        by_cat: dict[str, list[str]] = {}
        for c in doc["classes"]:
            by_cat.setdefault(c["category_id"], []).append(c["id"])
        triggers = [c["id"] for c in doc["categories"] if c["fine_grained_trigger"]]
        used: set[str] = set()
        n = int(rng.integers(spec.regions_min, spec.regions_max + 1))
        n_mixed = math.ceil(spec.mixed_fraction * n) if triggers else 0
        plates = []
        for _ in range(n_mixed):
            ok = [c for c in triggers if len(set(by_cat[c]) - used) >= spec.mixed_size]
            if not ok:
                break
            cat = ok[int(rng.integers(len(ok)))]
            free = [y for y in by_cat[cat] if y not in used]
            members = tuple(sorted(rng.choice(free, spec.mixed_size, replace=False).tolist()))
            used.update(members)
            plates.append(members)
        for _ in range(n - len(plates)):
            free = [c["id"] for c in doc["classes"] if c["id"] not in used]
            if not free:
                break
            y = free[int(rng.integers(len(free)))]
            used.add(y)
            plates.append((y,))
        return [plates[i] for i in rng.permutation(len(plates))]

    def tray(self, t: int, meal_id: str, doc, centers) -> dict:
        spec, rng = self.spec, self.rng
        photo_id = f"tray-{t:04d}"
        cfg = WindowConfig((spec.window_fraction,), spec.stride_fraction)
        cell_w, cell_h = TRAY_WIDTH // _GRID_COLS, TRAY_HEIGHT // _GRID_ROWS
        cells = rng.permutation(_GRID_COLS * _GRID_ROWS)
        regions, gt = [], set()
        for i, items in enumerate(self.plates(doc)):
            col, row = divmod(int(cells[i]), _GRID_ROWS)
            w = int(rng.integers(cell_w * 3 // 5, cell_w + 1))
            h = int(rng.integers(cell_h * 3 // 5, cell_h + 1))
            x = col * cell_w + int(rng.integers(0, cell_w - w + 1))
            y = row * cell_h + int(rng.integers(0, cell_h - h + 1))
            signal = np.mean([centers[k] for k in items], axis=0)
            rid = f"{photo_id}/r{i}"
            rd = {"x": x, "y": y, "width": w, "height": h,
                  "feature_id": self.observed(rid, signal), "items": list(items)}
            windows = windows_for(Region(x, y, w, h), cfg)
            owners = [items[k % len(items)] for k in range(len(windows))]
            owners = [owners[k] for k in rng.permutation(len(owners))]
            rd["sub_windows"] = [
                {**_coords(win), "feature_id": self.observed(f"{rid}/w{k}", centers[owner])}
                for k, (win, owner) in enumerate(zip(windows, owners))
            ]
            regions.append(rd)
            gt.update(items)
        return {"photo_id": photo_id, "meal_id": meal_id, "regions": regions,
                "ground_truth": sorted(gt)}


def _coords(r: Region) -> dict:
    def num(v):
        return int(v) if float(v).is_integer() else v
    return {"x": num(r.x), "y": num(r.y), "width": num(r.width), "height": num(r.height)}


def generate_synthetic_dataset(spec: SyntheticMenuSpec) -> GeneratedDataset:
    """Deterministic meals, feature store and trays (with ground truth) for ``spec``."""
    g = _Generator(spec)
    meal_docs, centers = [], {}
    for m in range(spec.meal_count):
        doc, cc = g.meal(m)
        meal_docs.append(doc)
        centers[doc["meal_id"]] = cc
    tray_docs = []
    for t in range(spec.tray_count):
        doc = meal_docs[t % spec.meal_count]
        tray_docs.append(g.tray(t, doc["meal_id"], doc, centers[doc["meal_id"]]))
    store = FeatureStore(spec.dim, g.vectors)
    meals = [meal_from_dict(d, store) for d in meal_docs]
    return GeneratedDataset(spec, meals, store, tray_docs, centers)


def spec_from_args(values: dict) -> SyntheticMenuSpec:
    known = {f for f in SyntheticMenuSpec.__dataclass_fields__}
    return SyntheticMenuSpec(**{k: v for k, v in values.items() if k in known and v is not None})


def mixed_share(tray_docs: Sequence[dict]) -> float:
    """Fraction of generated plates that hold more than one item."""
    plates = [r for d in tray_docs for r in d["regions"]]
    if not plates:
        return 0.0
    return sum(len(r["items"]) > 1 for r in plates) / len(plates)
