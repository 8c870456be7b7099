"""Linear models, leave-one-subject-out evaluation and statistics."""

from .baseline import peak_velocity_index, pvi_features
from .cv import (
    DEFAULT_C_CLASSIFY,
    DEFAULT_C_REGRESS,
    DEFAULT_EPSILON,
    ExperimentReport,
    FoldPlan,
    Mode,
    evaluate_classification,
    evaluate_regression,
    loso_folds,
    run_classification,
    run_regression,
)
from .stats import binomial_above_chance, pearson_p_value, pearson_r
from .svm import LinearModel, Task, objective, predict, train_l1_svm

__all__ = [
    "DEFAULT_C_CLASSIFY", "DEFAULT_C_REGRESS", "DEFAULT_EPSILON", "ExperimentReport", "FoldPlan",
    "LinearModel", "Mode", "Task", "binomial_above_chance", "evaluate_classification",
    "evaluate_regression", "loso_folds", "objective", "peak_velocity_index", "pearson_p_value",
    "pearson_r", "predict", "pvi_features", "run_classification", "run_regression", "train_l1_svm",
]
