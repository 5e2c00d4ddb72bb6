"""Feature vectors and the nearest-neighbour primitives.

A feature vector is a read-only, unit-norm ``float64`` numpy array. All
similarities go through :func:`inner`, a single ``np.dot`` on two 1-D arrays,
so any code path (classification, thresholding, tuning) that compares the
same pair of vectors sees bit-identical scores.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyTemplateSet,
    UnknownClass,
    ValidationError,
    ZeroVector,
)

if TYPE_CHECKING:
    from .menu import MealTemplateSet

FeatureVector = np.ndarray

ZERO_NORM = 1e-12
UNIT_TOL = 1e-6


def normalize(raw, dim: int | None = None) -> FeatureVector:
    """Return ``raw / ||raw||`` as a read-only float64 vector.

    Raises :class:`DimensionMismatch` if ``dim`` is given and the length
    differs, :class:`ZeroVector` when the norm is below 1e-12.
    """
    v = np.asarray(raw, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatch(f"expected a 1-D vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatch(f"expected length {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValidationError("feature vector contains NaN or Inf")
    norm = float(np.linalg.norm(v))
    if norm < ZERO_NORM:
        raise ZeroVector("cannot normalize a zero vector")
    out = v / norm
    out.flags.writeable = False
    return out


def is_unit(v: np.ndarray, tol: float = UNIT_TOL) -> bool:
    return bool(np.all(np.isfinite(v))) and abs(float(np.linalg.norm(v)) - 1.0) <= tol


def inner(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.dot(a, b))


def class_similarity(y: str, x: FeatureVector, templates: MealTemplateSet) -> float:
    """Best inner product between ``x`` and any template of class ``y``."""
    try:
        vectors = templates.templates[y]
    except KeyError:
        raise UnknownClass(f"class {y!r} not in meal {templates.meal_id!r}") from None
    return max(inner(t, x) for t in vectors)


def class_similarities(x: FeatureVector, templates: MealTemplateSet) -> dict[str, float]:
    """Similarity of ``x`` to every class of the meal, keyed in sorted id order."""
    return {y: class_similarity(y, x, templates) for y in templates.class_ids}


def classify_single(x: FeatureVector, templates: MealTemplateSet) -> tuple[str, float]:
    """Nearest-neighbour class of ``x``.

    Ties go to the lexicographically smallest class id: classes are scanned
    in sorted order and only a strictly larger score replaces the incumbent.
    """
    ids = templates.class_ids
    if not ids:
        raise EmptyTemplateSet(f"meal {templates.meal_id!r} has no classes")
    best_y, best_s = None, -np.inf
    for y in ids:
        s = class_similarity(y, x, templates)
        if s > best_s:
            best_y, best_s = y, s
    return best_y, best_s
