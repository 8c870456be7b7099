"""L1-regularized linear SVMs trained by cyclic coordinate descent.

Classification minimizes ``||w||_1 + C * sum max(0, 1 - y (w.x + b))^2``
(squared hinge); regression minimizes
``||w||_1 + C * sum max(0, |y - w.x - b| - epsilon)``.  The bias is not
penalized.  Training is fully deterministic: coordinates are visited in
index order and the starting point is zero.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateLabels, DimError, NonFiniteInput
from ._kernels import eps_insensitive_cd, sqhinge_cd

DEFAULT_TOL = 1e-6
DEFAULT_MAX_EPOCHS = 1000


class Task(enum.Enum):
    BINARY = "binary"
    MULTICLASS = "multiclass"
    REGRESSION = "regression"


@dataclass
class LinearModel:
    """One weight row per decision function.

    Binary models have a single row whose positive side is ``classes[1]``;
    one-vs-rest models have one row per entry of ``classes``.
    """

    weights: np.ndarray
    bias: np.ndarray
    task: Task
    C: float
    epsilon: float = 0.0
    classes: tuple = ()
    objective: list = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        X2 = X[None, :] if single else X
        if X2.shape[1] != self.dim:
            raise DimError(f"expected {self.dim} features, got {X2.shape[1]}")
        scores = X2 @ self.weights.T + self.bias
        return scores[0] if single else scores


def _check_inputs(X, y):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimError("features must be a 2-D matrix")
    if X.shape[0] != len(y):
        raise DimError(f"{X.shape[0]} feature rows but {len(y)} targets")
    if X.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    if not np.all(np.isfinite(X)):
        raise NonFiniteInput("features contain NaN or infinite values")
    return np.asfortranarray(X)


def objective(X, y, w, b, C, task, epsilon=0.0) -> float:
    """Primal objective of one decision function (``y`` in {-1, +1} for classification)."""
    z = np.asarray(X, float) @ w + b
    if task is Task.REGRESSION:
        loss = np.maximum(0.0, np.abs(y - z) - epsilon).sum()
    else:
        loss = (np.maximum(0.0, 1.0 - y * z) ** 2).sum()
    return float(np.abs(w).sum() + C * loss)


def _fit_binary(X, signs, C, tol, max_epochs):
    w = np.zeros(X.shape[1])
    b, hist = sqhinge_cd(X, signs.astype(np.float64), float(C), float(tol), int(max_epochs), w, 0.0)
    return w, float(b), hist.tolist()


def train_l1_svm(
    X,
    y,
    C: float = 1.5,
    task: Task = Task.BINARY,
    epsilon: float = 0.1,
    tol: float = DEFAULT_TOL,
    max_epochs: int = DEFAULT_MAX_EPOCHS,
) -> LinearModel:
    """Fit an L1-penalized linear SVM (classification) or SVR (regression).

    For classification, ``y`` holds class labels; classes are ordered by
    ``sorted``.  ``Task.BINARY`` needs exactly two classes, ``Task.MULTICLASS``
    trains one squared-hinge model per class against the rest.
    """
    if not C > 0:
        raise ValueError("C must be positive")
    y = np.asarray(y)
    X = _check_inputs(X, y)
    task = Task(task)

    if task is Task.REGRESSION:
        targets = y.astype(np.float64)
        if not np.all(np.isfinite(targets)):
            raise NonFiniteInput("targets contain NaN or infinite values")
        w = np.zeros(X.shape[1])
        b, hist = eps_insensitive_cd(X, targets, float(C), float(epsilon), float(tol), int(max_epochs), w, 0.0)
        return LinearModel(w[None, :], np.array([b]), task, C, epsilon, (), [hist.tolist()])

    classes = tuple(sorted(set(y.tolist())))
    if len(classes) < 2:
        raise DegenerateLabels(f"need at least two classes, got {classes}")
    if task is Task.BINARY:
        if len(classes) != 2:
            raise DegenerateLabels(f"binary task needs exactly two classes, got {classes}")
        signs = np.where(y == classes[1], 1.0, -1.0)
        w, b, hist = _fit_binary(X, signs, C, tol, max_epochs)
        return LinearModel(w[None, :], np.array([b]), task, C, 0.0, classes, [hist])

    rows, biases, hists = [], [], []
    for cls in classes:
        signs = np.where(y == cls, 1.0, -1.0)
        w, b, hist = _fit_binary(X, signs, C, tol, max_epochs)
        rows.append(w)
        biases.append(b)
        hists.append(hist)
    return LinearModel(np.vstack(rows), np.array(biases), task, C, 0.0, classes, hists)


def predict(model: LinearModel, X):
    """Class labels (classification) or zero-clipped scores (regression).

    A binary decision value of exactly zero goes to the positive class;
    one-vs-rest ties go to the lowest class index.
    """
    scores = model.decision_function(X)
    single = np.ndim(scores) == 1
    S = np.atleast_2d(scores)
    if model.task is Task.REGRESSION:
        out = np.maximum(0.0, S[:, 0])
        return float(out[0]) if single else out
    if model.task is Task.BINARY:
        idx = np.where(S[:, 0] >= 0.0, 1, 0)
    else:
        idx = np.argmax(S, axis=1)
    labels = [model.classes[k] for k in idx]
    return labels[0] if single else labels
