"""Weakly-supervised 2-D trajectory decoder.

Unsupervised state-space exploration of neural features, recursive
space-division correction against 0/1 vision-feedback bits, and supervised
exploitation of the corrected values, in open- and closed-loop training modes.
"""

from .correction import Method
from .data import Dataset, SynthConfig, generate_synthetic, load_csv, write_csv
from .feedback import ViFLabels, make_labels
from .geometry import AxisBounds, FaultTolerance, RegionCode
from .metrics import Metrics, rmse
from .pipeline import LoopConfig, RunReport, run, run_closed_loop, run_open_loop
from .regressor import RegressorConfig, build_windows, predict, train

__version__ = "0.1.0"

__all__ = [
    "AxisBounds",
    "Dataset",
    "FaultTolerance",
    "LoopConfig",
    "Method",
    "Metrics",
    "RegionCode",
    "RegressorConfig",
    "RunReport",
    "SynthConfig",
    "ViFLabels",
    "build_windows",
    "generate_synthetic",
    "load_csv",
    "make_labels",
    "predict",
    "rmse",
    "run",
    "run_closed_loop",
    "run_open_loop",
    "train",
    "write_csv",
]
