"""One-class classification with minimum spanning tree class descriptors."""

from .boundary import ThresholdModel, ThresholdParams, dynamic_threshold, static_threshold
from .classifier import TARGET, OUTLIER, ClassifierConfig, FittedModel, Variant, Verdict, fit, predict
from .datasets import BENCHMARK, PRESETS, LabeledData, load_csv, load_preset
from .evaluation import (
    ConfusionMatrix,
    CvProtocol,
    EvalReport,
    GridResult,
    evaluate_configs,
    grid_search,
    mcc,
    npv,
    ppv,
    run_cv,
)
from .exceptions import ConfigurationError, DataError, InputError, OcdmstError
from .graph import SpanningTree, bfs_from, build_mst

__version__ = "0.1.0"

__all__ = [
    "BENCHMARK", "OUTLIER", "PRESETS", "TARGET",
    "ClassifierConfig", "ConfigurationError", "ConfusionMatrix", "CvProtocol", "DataError",
    "EvalReport", "FittedModel", "GridResult", "InputError", "LabeledData", "OcdmstError",
    "SpanningTree", "ThresholdModel", "ThresholdParams", "Variant", "Verdict",
    "bfs_from", "build_mst", "dynamic_threshold", "evaluate_configs", "fit", "grid_search",
    "load_csv", "load_preset", "mcc", "npv", "ppv", "predict", "run_cv", "static_threshold",
]
