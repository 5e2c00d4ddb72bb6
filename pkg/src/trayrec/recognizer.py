"""Hierarchical recognition of the dishes on a tray.

Each detected dish region is first assigned one class by nearest-neighbour
search. When that class belongs to a trigger category (salad, fruit, ...),
the region is re-examined through sliding sub-windows, and every window
whose own nearest class shares the coarse category contributes a class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import InvalidParameter, MissingWindowFeatures, ValidationError
from .features import FeatureVector, classify_single, normalize
from .menu import Category, MealTemplateSet, Menu

_EPS = 1e-9

# Maps a region of the photo to a raw (unnormalized) descriptor.
FeatureProvider = Callable[["Region"], np.ndarray]


@dataclass(frozen=True)
class Region:
    x: float
    y: float
    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise InvalidParameter(f"region must have positive size, got {self}")

    @property
    def right(self) -> float:
        return self.x + self.width

    @property
    def bottom(self) -> float:
        return self.y + self.height

    def contains(self, other: "Region", tol: float = _EPS) -> bool:
        return (
            other.x >= self.x - tol
            and other.y >= self.y - tol
            and other.right <= self.right + tol
            and other.bottom <= self.bottom + tol
        )

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "width": self.width, "height": self.height}


@dataclass(frozen=True, eq=False)
class RegionObservation:
    region: Region
    feature: FeatureVector
    sub_windows: tuple[tuple[Region, FeatureVector], ...] | None = None

    def __post_init__(self):
        if self.sub_windows is not None:
            subs = tuple(self.sub_windows)
            for r, _ in subs:
                if not self.region.contains(r):
                    raise InvalidParameter(f"sub-window {r} lies outside region {self.region}")
            object.__setattr__(self, "sub_windows", subs)


@dataclass(frozen=True, eq=False)
class TrayObservation:
    photo_id: str
    meal_id: str
    regions: tuple[RegionObservation, ...]
    ground_truth: frozenset[str] | None = None
    image: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        if self.ground_truth is not None:
            object.__setattr__(self, "ground_truth", frozenset(self.ground_truth))


@dataclass(frozen=True)
class RegionResult:
    region: Region
    coarse_class: str
    coarse_score: float
    fine_classes: frozenset[str] = frozenset()
    triggered: bool = False

    @property
    def items(self) -> frozenset[str]:
        return self.fine_classes if self.triggered else frozenset([self.coarse_class])

    def to_dict(self) -> dict:
        return {
            "region": self.region.to_dict(),
            "coarse_class": self.coarse_class,
            "coarse_score": self.coarse_score,
            "triggered": self.triggered,
            "fine_classes": sorted(self.fine_classes),
        }


@dataclass(frozen=True)
class TrayResult:
    photo_id: str
    meal_id: str
    region_results: tuple = ()
    predicted_items: frozenset[str] = frozenset()


@dataclass(frozen=True)
class WindowConfig:
    """Sliding-window geometry, as fractions of a region's short side.

    ``stride_fraction`` is measured against the short side too, so it must
    not exceed the window fraction or the grid would leave gaps.
    """

    window_fractions: tuple[float, ...] = (0.5,)
    stride_fraction: float = 0.25

    def __post_init__(self):
        object.__setattr__(self, "window_fractions", tuple(self.window_fractions))
        if not self.window_fractions:
            raise InvalidParameter("need at least one window fraction")
        for wf in self.window_fractions:
            _check_fractions(wf, self.stride_fraction)


def _check_fractions(window_fraction: float, stride_fraction: float) -> None:
    if not 0 < window_fraction <= 1:
        raise InvalidParameter(f"window_fraction must be in (0, 1], got {window_fraction}")
    if not 0 < stride_fraction <= window_fraction:
        raise InvalidParameter(
            f"stride_fraction must be in (0, window_fraction], got {stride_fraction}"
        )


def _offsets(extent: float, side: float, step: float) -> list[float]:
    last = extent - side
    out: list[float] = []
    k = 0
    while k * step <= last + _EPS:
        o = float(math.floor(k * step + _EPS))
        if not out or o > out[-1]:
            out.append(o)
        k += 1
    if out[-1] < last - _EPS:
        out.append(last)
    return out


def generate_windows(parent: Region, window_fraction: float, stride_fraction: float) -> list[Region]:
    """Square sliding windows over ``parent``, row-major.

    Window side and step are fractions of the parent's short side; offsets
    are floored to whole pixels and a final window is added flush with the
    right/bottom edge when the grid falls short of it.
    """
    _check_fractions(window_fraction, stride_fraction)
    short = min(parent.width, parent.height)
    side = math.floor(window_fraction * short + _EPS)
    if side < 1:
        side = window_fraction * short
    step = stride_fraction * short
    xs = _offsets(parent.width, side, step)
    ys = _offsets(parent.height, side, step)
    return [Region(parent.x + ox, parent.y + oy, side, side) for oy in ys for ox in xs]


def windows_for(parent: Region, cfg: WindowConfig) -> list[Region]:
    out: list[Region] = []
    for wf in cfg.window_fractions:
        out.extend(generate_windows(parent, wf, cfg.stride_fraction))
    return out


def fine_grained(
    coarse: tuple[str, Category],
    windows: Iterable[tuple[Region, FeatureVector]],
    templates: MealTemplateSet,
) -> frozenset[str]:
    """Classes of the windows whose nearest class shares the coarse category."""
    _, category = coarse
    kept = set()
    for _, x in windows:
        y, _ = classify_single(x, templates)
        if templates.category_of(y).id == category.id:
            kept.add(y)
    return frozenset(kept)


def _window_features(obs: RegionObservation, meal: MealTemplateSet, cfg: WindowConfig,
                     provider: FeatureProvider | None):
    if obs.sub_windows is not None:
        return obs.sub_windows
    if provider is None:
        raise MissingWindowFeatures(
            f"region {obs.region} triggered fine-grained recognition but has no "
            "sub-window features and no feature provider"
        )
    return [(r, normalize(provider(r), meal.dim)) for r in windows_for(obs.region, cfg)]


def recognize_region(
    obs: RegionObservation,
    meal: MealTemplateSet,
    cfg: WindowConfig | None = None,
    provider: FeatureProvider | None = None,
    fine: bool = True,
) -> RegionResult:
    coarse_class, score = classify_single(obs.feature, meal)
    category = meal.category_of(coarse_class)
    if not (fine and category.fine_grained_trigger):
        return RegionResult(obs.region, coarse_class, score)
    windows = _window_features(obs, meal, cfg or WindowConfig(), provider)
    found = fine_grained((coarse_class, category), windows, meal)
    # A triggered dish never vanishes: fall back to its coarse class.
    if not found:
        found = frozenset([coarse_class])
    return RegionResult(obs.region, coarse_class, score, found, True)


def recognize_tray(
    photo: TrayObservation,
    meal: MealTemplateSet,
    cfg: WindowConfig | None = None,
    provider: FeatureProvider | None = None,
    fine: bool = True,
) -> TrayResult:
    results = tuple(recognize_region(o, meal, cfg, provider, fine) for o in photo.regions)
    items: set[str] = set()
    for r in results:
        items |= r.items
    return TrayResult(photo.photo_id, photo.meal_id, results, frozenset(items))


def recognize_tray_single(
    photo: TrayObservation, meal: MealTemplateSet, cfg: WindowConfig | None = None
) -> TrayResult:
    """Single-class baseline: the coarse step alone, for every region."""
    return recognize_tray(photo, meal, cfg, fine=False)


def recognize_batch(
    photos: Sequence[TrayObservation],
    meals,
    method: Callable[..., TrayResult] = recognize_tray,
    **kwargs,
) -> list[TrayResult]:
    """Run ``method`` on each photo with the meal matching its ``meal_id``.

    ``meals`` is a single template set or a mapping ``meal_id -> set``.
    """
    return [method(p, meal_for(p, meals), **kwargs) for p in photos]


def meal_for(photo, meals):
    """Pick the menu for ``photo`` (anything with a ``meal_id``)."""
    if isinstance(meals, Menu):
        return meals
    try:
        return meals[photo.meal_id]
    except KeyError:
        raise ValidationError(
            f"photo {photo.photo_id!r} refers to unknown meal {photo.meal_id!r}"
        ) from None
