"""Post-hoc confidence calibration with drift-aware tuning."""

from ._core import (
    Calibrator,
    ConfigError,
    Dataset,
    DataError,
    Model,
    NumericError,
    brier,
    builtin_schedule,
    debiased_ece,
    ece,
    fit_calibrator,
    generate_blobs,
    load_calibrator,
    load_dataset,
    load_model,
    nll,
    perturb_dataset,
    predictive_entropy,
    softmax,
    train_softmax,
    tune_calibrator_perturbed,
)

__all__ = [
    "Calibrator",
    "ConfigError",
    "Dataset",
    "DataError",
    "Model",
    "NumericError",
    "brier",
    "builtin_schedule",
    "debiased_ece",
    "ece",
    "fit_calibrator",
    "generate_blobs",
    "load_calibrator",
    "load_dataset",
    "load_model",
    "nll",
    "perturb_dataset",
    "predictive_entropy",
    "softmax",
    "train_softmax",
    "tune_calibrator_perturbed",
]
