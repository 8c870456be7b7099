"""Topological features (sublevel persistence -> persistence images) for
multi-channel force-platform trials, with L1 linear-SVM evaluation under
leave-one-subject-out cross-validation."""

__version__ = "0.1.0"
