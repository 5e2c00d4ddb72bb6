"""Hierarchical recognition of multiple food items on buffet trays."""

from .errors import TrayRecError
from .evaluation import EvalReport, PhotoOutcome, evaluate, set_metrics, tray_nutrition
from .features import class_similarity, classify_single, normalize
from .ingestion import FeatureStore, histogram_descriptor, load_feature_store, load_trays
from .menu import MealTemplateSet, Menu, NutritionFacts, load_meal_manifest, load_menu
from .multiclass import classify_multi, cross_validate, make_grid, recognize_tray_multi, tune_threshold
from .recognizer import (
    Region,
    RegionObservation,
    TrayObservation,
    WindowConfig,
    generate_windows,
    recognize_region,
    recognize_tray,
    recognize_tray_single,
)
from .synthetic import SyntheticMenuSpec, generate_synthetic_dataset

__all__ = [
    "EvalReport", "FeatureStore", "MealTemplateSet", "Menu", "NutritionFacts", "PhotoOutcome",
    "Region", "RegionObservation", "SyntheticMenuSpec", "TrayObservation", "TrayRecError",
    "WindowConfig", "class_similarity", "classify_multi", "classify_single", "cross_validate",
    "evaluate", "generate_synthetic_dataset", "generate_windows", "histogram_descriptor",
    "load_feature_store", "load_meal_manifest", "load_menu", "load_trays", "make_grid",
    "normalize", "recognize_region", "recognize_tray", "recognize_tray_multi",
    "recognize_tray_single", "set_metrics", "tray_nutrition", "tune_threshold",
]
