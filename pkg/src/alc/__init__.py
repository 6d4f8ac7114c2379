"""Liver-inspired classifier trained gradient-free, with its benchmark harness."""

from .data import Dataset, load_csv, load_idx, one_hot, standardize, stratified_kfold
from .experiments import (
    ExperimentConfig,
    default_config,
    run_ablation,
    run_crossval,
    run_optbench,
)
from .metrics import MetricReport, log_loss, wilcoxon_signed_rank
from .model import AlcParams, forward, init_params, load_model, predict, save_model
from .numkit import RngStream
from .optimizers import OptimizerConfig, OptimizerRun, multi_run, optimize_fox, optimize_ifox

__version__ = "0.1.0"

__all__ = [
    "AlcParams",
    "Dataset",
    "ExperimentConfig",
    "MetricReport",
    "OptimizerConfig",
    "OptimizerRun",
    "RngStream",
    "default_config",
    "forward",
    "init_params",
    "load_csv",
    "load_idx",
    "load_model",
    "log_loss",
    "multi_run",
    "one_hot",
    "optimize_fox",
    "optimize_ifox",
    "predict",
    "run_ablation",
    "run_crossval",
    "run_optbench",
    "save_model",
    "standardize",
    "stratified_kfold",
    "wilcoxon_signed_rank",
    "__version__",
]
