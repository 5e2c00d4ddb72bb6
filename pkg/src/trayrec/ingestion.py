"""Feature stores, tray observation files, and a colour-histogram provider.

Feature store file::

    D=4
    tmpl-0001<TAB>0.1,0.2,0.3,0.4
    ...

Vectors are kept raw and normalized where they are used.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Iterable, Mapping

import numpy as np

from . import _io
from .errors import DimensionMismatch, EmptyPatch, ParseError, ValidationError, ZeroVector
from .features import normalize
from .recognizer import Region, RegionObservation, TrayObservation, TrayResult

HIST_BINS = 8
HIST_DIM = HIST_BINS ** 3


@dataclass(frozen=True, eq=False)
class FeatureStore:
    dim: int
    vectors: Mapping[str, np.ndarray]

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError(f"feature dimension must be positive, got {self.dim}")
        frozen = {}
        for fid, v in self.vectors.items():
            v = np.array(v, dtype=np.float64)
            if v.shape != (self.dim,):
                raise DimensionMismatch(f"feature {fid!r} has shape {v.shape}, store D={self.dim}")
            v.flags.writeable = False
            frozen[fid] = v
        object.__setattr__(self, "vectors", MappingProxyType(frozen))

    def __len__(self):
        return len(self.vectors)

    def __contains__(self, fid):
        return fid in self.vectors

    def raw(self, fid: str) -> np.ndarray:
        try:
            return self.vectors[fid]
        except KeyError:
            raise ValidationError(f"dangling feature id {fid!r}") from None

    def unit(self, fid: str) -> np.ndarray:
        try:
            return normalize(self.raw(fid), self.dim)
        except ZeroVector:
            raise ValidationError(f"feature {fid!r} is a zero vector") from None


def parse_feature_store(text: str) -> FeatureStore:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("D="):
        raise ParseError("feature store must start with a 'D=<int>' header")
    try:
        dim = int(lines[0][2:])
    except ValueError:
        raise ParseError(f"bad header {lines[0]!r}") from None
    vectors: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fid, sep, body = line.partition("\t")
        if not sep or not fid:
            raise ParseError(f"line {lineno}: expected 'id<TAB>values'")
        try:
            v = np.array([float(t) for t in body.split(",")], dtype=np.float64)
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric value") from None
        if v.shape[0] != dim:
            raise DimensionMismatch(f"line {lineno}: feature {fid!r} has {v.shape[0]} values, D={dim}")
        if fid in vectors:
            raise ValidationError(f"line {lineno}: duplicate feature id {fid!r}")
        vectors[fid] = v
    return FeatureStore(dim, vectors)


def load_feature_store(source) -> FeatureStore:
    return parse_feature_store(_io.read_text(source))


def format_feature_store(store: FeatureStore) -> str:
    out = [f"D={store.dim}"]
    for fid, v in store.vectors.items():
        out.append(fid + "\t" + ",".join(repr(float(x)) for x in v))
    return "\n".join(out) + "\n"


def histogram_descriptor(patch) -> np.ndarray:
    """512-bin RGB histogram (8 levels per channel, value // 32) as float counts."""
    a = np.asarray(patch)
    if a.ndim != 3 or a.shape[2] != 3:
        raise ValueError(f"expected an H x W x 3 patch, got shape {a.shape}")
    if a.shape[0] == 0 or a.shape[1] == 0:
        raise EmptyPatch("patch has no pixels")
    if a.dtype != np.uint8:
        raise ValueError(f"expected uint8 channels, got {a.dtype}")
    q = (a >> 5).astype(np.int64).reshape(-1, 3)
    idx = q[:, 0] * HIST_BINS * HIST_BINS + q[:, 1] * HIST_BINS + q[:, 2]
    return np.bincount(idx, minlength=HIST_DIM).astype(np.float64)


class ImagePatchProvider:
    """Crop regions out of an RGB image and describe them."""

    def __init__(self, image, descriptor: Callable[[np.ndarray], np.ndarray] = histogram_descriptor):
        self.image = np.asarray(image)
        self.descriptor = descriptor

    def __call__(self, region: Region) -> np.ndarray:
        x0, y0 = int(round(region.x)), int(round(region.y))
        x1, y1 = int(round(region.right)), int(round(region.bottom))
        patch = self.image[max(y0, 0):y1, max(x0, 0):x1]
        return self.descriptor(patch)


def _region(d) -> Region:
    try:
        return Region(float(d["x"]), float(d["y"]), float(d["width"]), float(d["height"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed region {d!r}") from exc


def tray_from_dict(doc, store: FeatureStore, base_dir: str | None = None) -> TrayObservation:
    if not isinstance(doc, dict):
        raise ParseError("tray observation must be a JSON object")
    try:
        photo_id = str(doc["photo_id"])
        meal_id = str(doc["meal_id"])
        raw_regions = doc.get("regions", [])
    except KeyError as exc:
        raise ParseError(f"tray observation missing field {exc}") from None
    regions = []
    for rd in raw_regions:
        try:
            fid = rd["feature_id"]
        except (KeyError, TypeError):
            raise ParseError(f"region without feature_id in photo {photo_id!r}") from None
        subs = rd.get("sub_windows")
        sub_windows = None
        if subs is not None:
            sub_windows = tuple((_region(s), store.unit(s["feature_id"])) for s in subs)
        regions.append(RegionObservation(_region(rd), store.unit(fid), sub_windows))
    gt = doc.get("ground_truth")
    image = doc.get("image")
    if image is not None and base_dir is not None:
        image = os.path.join(base_dir, image)
    return TrayObservation(
        photo_id, meal_id, tuple(regions),
        None if gt is None else frozenset(str(g) for g in gt),
        image,
    )


def read_tray_docs(sources: Iterable) -> list[tuple[dict, str | None]]:
    """Raw tray documents from files holding one object or an array of them."""
    docs = []
    for src in sources:
        doc = _io.read_json(src)
        base = os.path.dirname(os.fspath(src)) if isinstance(src, (str, os.PathLike)) else None
        for d in doc if isinstance(doc, list) else [doc]:
            if not isinstance(d, dict):
                raise ParseError("tray file entries must be JSON objects")
            docs.append((d, base))
    return docs


def load_trays(sources: Iterable, store: FeatureStore) -> list[TrayObservation]:
    trays = [tray_from_dict(d, store, base) for d, base in read_tray_docs(sources)]
    seen = set()
    for t in trays:
        if t.photo_id in seen:
            raise ValidationError(f"duplicate photo id {t.photo_id!r}")
        seen.add(t.photo_id)
    return trays


def provider_for(tray: TrayObservation):
    """Histogram provider over the tray's ``image`` (a ``.npy`` RGB array), if any."""
    if tray.image is None:
        return None
    return ImagePatchProvider(np.load(tray.image, allow_pickle=False))


def result_to_record(result: TrayResult, nutrition) -> dict:
    return {
        "photo_id": result.photo_id,
        "meal_id": result.meal_id,
        "predicted_items": sorted(result.predicted_items),
        "region_results": [r.to_dict() for r in result.region_results],
        "nutrition": {
            "energy_kcal": nutrition.energy,
            "protein_g": nutrition.protein,
            "lipid_g": nutrition.lipid,
            "carbohydrate_g": nutrition.carbohydrate,
        },
    }
