"""Leave-one-subject-out evaluation of persistence-image features."""

from __future__ import annotations

import enum
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import FoldError, TooFewSubjects, TopoParkError
from ..features import DEFAULT_THRESHOLD, FeatureMatrix, compute_feature_matrix
from ..ingest import DatasetManifest, Label, fit_normalizer, normalize_trial
from ..persistence import EssentialPolicy
from .stats import binomial_above_chance, pearson_p_value, pearson_r
from .svm import Task, predict, train_l1_svm

SCHEMA_VERSION = 1
DEFAULT_C_CLASSIFY = 1.5
DEFAULT_C_REGRESS = 0.85
DEFAULT_EPSILON = 0.1


class Mode(enum.Enum):
    BINARY = "binary"
    THREE_CLASS = "three-class"


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple[tuple[frozenset, str], ...]

    def __len__(self):
        return len(self.folds)

    def __iter__(self):
        return iter(self.folds)


def loso_folds(source) -> FoldPlan:
    """One fold per subject, in order of first appearance.

    ``source`` is a :class:`DatasetManifest`, a :class:`FeatureMatrix` or a
    sequence of per-trial subject ids.
    """
    if isinstance(source, DatasetManifest):
        ids = [e.subject for e in source.trials]
    elif isinstance(source, FeatureMatrix):
        ids = source.subjects
    else:
        ids = list(source)
    subjects = list(dict.fromkeys(ids))
    if len(subjects) < 2:
        raise TooFewSubjects(f"leave-one-subject-out needs 2+ subjects, got {len(subjects)}")
    everyone = frozenset(subjects)
    return FoldPlan(tuple((everyone - {s}, s) for s in subjects))


def class_targets(labels: Sequence[Label], mode: Mode) -> tuple[np.ndarray, list[str]]:
    """Integer class ids and their names.  Binary merges both healthy groups."""
    if Mode(mode) is Mode.BINARY:
        y = np.array([1 if lab is Label.PARKINSONS else 0 for lab in labels])
        return y, ["healthy", Label.PARKINSONS.value]
    y = np.array([lab.index for lab in labels])
    return y, [Label.HEALTHY_YOUNG.value, Label.HEALTHY_ELDERLY.value, Label.PARKINSONS.value]


@dataclass
class ExperimentReport:
    task: str
    hyperparameters: dict
    folds: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)

    def __getattr__(self, name):
        metrics = self.__dict__.get("metrics", {})
        if name in metrics:
            return metrics[name]
        raise AttributeError(name)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "task": self.task,
            "hyperparameters": self.hyperparameters,
            **self.metrics,
            "folds": self.folds,
        }


# worker-global state so the feature matrix is shipped once per process
_SHARED = {}


def _init_worker(shared):
    _SHARED.clear()
    _SHARED.update(shared)


def _fold_matrix(held_out):
    fm = _SHARED.get("fm")
    if fm is not None:
        return fm
    setup = _SHARED["fold_safe"]
    trials = setup["trials"]
    norm = fit_normalizer([t for t in trials if t.subject_id != held_out])
    normalized = [normalize_trial(t, norm) for t in trials]
    return compute_feature_matrix(normalized, setup["configs"], setup["threshold"], setup["policy"])


def _run_fold(job):
    index, held_out = job
    task, C, epsilon, mode = _SHARED["task"], _SHARED["C"], _SHARED["epsilon"], _SHARED["mode"]
    try:
        fm = _fold_matrix(held_out)
        subjects = np.array(fm.subjects)
        test = subjects == held_out
        if task is Task.REGRESSION:
            y = fm.updrs
        else:
            y, _ = class_targets(fm.labels, mode)
        model = train_l1_svm(fm.X[~test], y[~test], C, task, epsilon)
        pred = predict(model, fm.X[test])
    except TopoParkError as exc:
        raise FoldError(index, exc) from exc
    rows = np.flatnonzero(test)
    predictions = [
        {
            "subject": fm.subjects[i],
            "trial": fm.trials[i],
            "target": float(y[i]) if task is Task.REGRESSION else int(y[i]),
            "prediction": float(p) if task is Task.REGRESSION else int(p),
        }
        for i, p in zip(rows, np.atleast_1d(pred))
    ]
    return {
        "fold": index,
        "held_out": held_out,
        "n_train": int((~test).sum()),
        "n_test": int(test.sum()),
        "epochs": [len(h) - 1 for h in model.objective],
        "predictions": predictions,
    }


def _run_folds(plan: FoldPlan, shared: dict, jobs: int) -> list:
    work = [(k, held_out) for k, (_, held_out) in enumerate(plan)]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(shared,)) as pool:
            return list(pool.map(_run_fold, work))
    _init_worker(shared)
    try:
        return [_run_fold(w) for w in work]
    finally:
        _SHARED.clear()


def _majority(votes):
    counts = Counter(votes)
    best = max(counts.values())
    return min(v for v, c in counts.items() if c == best)


def _classification_metrics(folds, n_classes):
    preds = [p for f in folds for p in f["predictions"]]
    correct = sum(p["target"] == p["prediction"] for p in preds)
    by_subject = defaultdict(list)
    for p in preds:
        by_subject[p["subject"]].append(p)
    subj_correct = sum(_majority([p["prediction"] for p in ps]) == ps[0]["target"] for ps in by_subject.values())
    chance = 1.0 / n_classes
    return {
        "n_trials": len(preds),
        "n_subjects": len(by_subject),
        "correct": int(correct),
        "accuracy": correct / len(preds),
        "subject_accuracy": subj_correct / len(by_subject),
        "chance_rate": chance,
        "chance_p_value": binomial_above_chance(int(correct), len(preds), chance),
    }


def _regression_metrics(folds):
    per_subject = []
    for f in folds:
        ps = f["predictions"]
        per_subject.append({
            "subject": f["held_out"],
            "target": ps[0]["target"],
            "prediction": max(0.0, float(np.mean([p["prediction"] for p in ps]))),
        })
    targets = np.array([s["target"] for s in per_subject])
    preds = np.array([s["prediction"] for s in per_subject])
    r = pearson_r(preds, targets)
    return {
        "n_trials": sum(f["n_test"] for f in folds),
        "n_subjects": len(per_subject),
        "pearson_r": r,
        "p_value": pearson_p_value(r, len(per_subject)),
        "subject_predictions": per_subject,
    }


def evaluate_classification(fm: FeatureMatrix, C=DEFAULT_C_CLASSIFY, mode=Mode.BINARY, jobs=1, extra=None):
    """LOSO classification on a precomputed feature matrix."""
    mode = Mode(mode)
    task = Task.BINARY if mode is Mode.BINARY else Task.MULTICLASS
    plan = loso_folds(fm)
    shared = {"fm": fm, "task": task, "C": C, "epsilon": 0.0, "mode": mode}
    return _classification_report(plan, shared, mode, C, jobs, extra)


def _classification_report(plan, shared, mode, C, jobs, extra):
    folds = _run_folds(plan, shared, jobs)
    _, names = class_targets([], mode)
    hp = {"C": C, "penalty": "l1", "loss": "squared_hinge", "classes": names, **(extra or {})}
    return ExperimentReport(mode.value, hp, folds, _classification_metrics(folds, len(names)))


def evaluate_regression(fm: FeatureMatrix, C=DEFAULT_C_REGRESS, epsilon=DEFAULT_EPSILON, jobs=1, extra=None):
    """LOSO regression on UPDRS; one averaged, zero-clipped prediction per subject."""
    plan = loso_folds(fm)
    shared = {"fm": fm, "task": Task.REGRESSION, "C": C, "epsilon": epsilon, "mode": None}
    return _regression_report(plan, shared, C, epsilon, jobs, extra)


def _regression_report(plan, shared, C, epsilon, jobs, extra):
    folds = _run_folds(plan, shared, jobs)
    hp = {"C": C, "epsilon": epsilon, "penalty": "l1", "loss": "epsilon_insensitive", **(extra or {})}
    return ExperimentReport("regression", hp, folds, _regression_metrics(folds))


def _prepare(trials, configs, threshold, policy, fold_safe):
    settings = {"threshold": threshold, "essential": policy.value, "fold_safe": fold_safe}
    if fold_safe:
        return None, {"fold_safe": {"trials": trials, "configs": configs, "threshold": threshold, "policy": policy}}, settings
    norm = fit_normalizer(trials)
    fm = compute_feature_matrix([normalize_trial(t, norm) for t in trials], configs, threshold, policy)
    return fm, {"fm": fm}, settings


def run_classification(
    trials,
    configs=None,
    threshold=DEFAULT_THRESHOLD,
    C=DEFAULT_C_CLASSIFY,
    mode=Mode.BINARY,
    policy=EssentialPolicy.PAIR_WITH_GLOBAL_MAX,
    fold_safe=False,
    jobs=1,
):
    """Normalize, featurize and evaluate raw trials under LOSO.

    With ``fold_safe`` the normalizer is refitted on each training fold;
    otherwise it is fitted once on the whole dataset.
    """
    mode = Mode(mode)
    task = Task.BINARY if mode is Mode.BINARY else Task.MULTICLASS
    fm, shared, settings = _prepare(trials, configs, threshold, policy, fold_safe)
    plan = loso_folds([t.subject_id for t in trials])
    shared.update({"task": task, "C": C, "epsilon": 0.0, "mode": mode})
    return _classification_report(plan, shared, mode, C, jobs, settings)


def run_regression(
    trials,
    configs=None,
    threshold=DEFAULT_THRESHOLD,
    C=DEFAULT_C_REGRESS,
    epsilon=DEFAULT_EPSILON,
    policy=EssentialPolicy.PAIR_WITH_GLOBAL_MAX,
    fold_safe=False,
    jobs=1,
):
    fm, shared, settings = _prepare(trials, configs, threshold, policy, fold_safe)
    plan = loso_folds([t.subject_id for t in trials])
    shared.update({"task": Task.REGRESSION, "C": C, "epsilon": epsilon, "mode": None})
    return _regression_report(plan, shared, C, epsilon, jobs, settings)
