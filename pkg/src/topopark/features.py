"""Per-trial feature vectors: one persistence image per channel, concatenated.

Channels are featurized in the fixed order x, y, fx, fy, mx, my, mz; fz is
never featurized.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ChannelError, ChannelExcluded, FormatError, TopoParkError
from .ingest import ChannelId, Label, TimeSeriesTrial
from .persistence import EssentialPolicy, sublevel_persistence, threshold_diagram
from .pimage import PersistenceImageConfig, rasterize

FEATURE_CHANNELS = (
    ChannelId.X,
    ChannelId.Y,
    ChannelId.FX,
    ChannelId.FY,
    ChannelId.MX,
    ChannelId.MY,
    ChannelId.MZ,
)

DEFAULT_THRESHOLD = 0.01

_DEFAULT_BIRTH_RANGES = {
    ChannelId.FX: (-0.5, 0.5),
    ChannelId.MZ: (-0.75, 0.75),
}


def default_channel_configs(channels: Sequence[ChannelId] = FEATURE_CHANNELS) -> dict:
    """50x50 grids, sigma 0.03, and per-channel birth ranges."""
    configs = {}
    for c in channels:
        c = ChannelId(c)
        if c is ChannelId.FZ:
            raise ChannelExcluded("fz is not featurized")
        configs[c] = PersistenceImageConfig(birth_range=_DEFAULT_BIRTH_RANGES.get(c, (-1.5, 1.5)))
    return configs


def _ordered(configs: Mapping[ChannelId, PersistenceImageConfig]) -> list[ChannelId]:
    if ChannelId.FZ in configs:
        raise ChannelExcluded("fz is not featurized")
    return [c for c in FEATURE_CHANNELS if c in configs]


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    channels: tuple[ChannelId, ...]
    block_sizes: tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.values.size

    def offset(self, channel: ChannelId) -> int:
        i = self.channels.index(channel)
        return sum(self.block_sizes[:i])


def trial_feature_vector(
    trial: TimeSeriesTrial,
    configs: Mapping[ChannelId, PersistenceImageConfig] | None = None,
    threshold: float = DEFAULT_THRESHOLD,
    policy: EssentialPolicy = EssentialPolicy.PAIR_WITH_GLOBAL_MAX,
    thresholds: Mapping[ChannelId, float] | None = None,
    counts: dict | None = None,
) -> FeatureVector:
    """Concatenate the flattened persistence images of a normalized trial.

    ``thresholds`` overrides ``threshold`` per channel.  If ``counts`` is a
    dict it receives the number of diagram points kept for every channel.
    """
    configs = default_channel_configs() if configs is None else configs
    thresholds = thresholds or {}
    blocks = []
    order = _ordered(configs)
    for c in order:
        t = thresholds.get(c, threshold)
        try:
            diagram = threshold_diagram(sublevel_persistence(trial.channels[c], policy, channel=c), t)
            image = rasterize(diagram, configs[c])
        except TopoParkError as exc:
            raise ChannelError(c.column, exc) from exc
        if counts is not None:
            counts[c] = len(diagram)
        blocks.append(image.flatten())
    values = np.concatenate(blocks) if blocks else np.empty(0)
    return FeatureVector(values, tuple(order), tuple(configs[c].size for c in order))


def feature_block(vector: FeatureVector, channel: ChannelId) -> np.ndarray:
    """The image-shaped slice of ``vector`` belonging to ``channel``."""
    channel = ChannelId(channel)
    if channel is ChannelId.FZ:
        raise ChannelExcluded("fz is not featurized")
    if channel not in vector.channels:
        raise KeyError(channel)
    start = vector.offset(channel)
    size = vector.block_sizes[vector.channels.index(channel)]
    return vector.values[start:start + size]


@dataclass
class FeatureMatrix:
    """Stacked feature vectors plus the per-trial metadata columns."""

    subjects: list[str]
    trials: list[int]
    labels: list[Label]
    updrs: np.ndarray
    X: np.ndarray
    columns: list[str]

    def __len__(self):
        return len(self.subjects)


def feature_columns(configs) -> list[str]:
    cols = []
    for c in _ordered(configs):
        cols += [f"{c.column}_{k}" for k in range(configs[c].size)]
    return cols


def _featurize_one(args):
    trial, configs, threshold, policy, thresholds = args
    counts = {}
    fv = trial_feature_vector(trial, configs, threshold, policy, thresholds, counts)
    return fv.values, counts


def compute_feature_matrix(
    trials: Sequence[TimeSeriesTrial],
    configs=None,
    threshold=DEFAULT_THRESHOLD,
    policy=EssentialPolicy.PAIR_WITH_GLOBAL_MAX,
    thresholds=None,
    jobs: int = 1,
    counts_out: list | None = None,
) -> FeatureMatrix:
    """Featurize normalized trials; results come back in input order."""
    configs = default_channel_configs() if configs is None else configs
    work = [(t, configs, threshold, policy, thresholds) for t in trials]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_featurize_one, work, chunksize=max(1, len(work) // (4 * jobs))))
    else:
        results = [_featurize_one(w) for w in work]
    if counts_out is not None:
        counts_out.extend(r[1] for r in results)
    dim = sum(configs[c].size for c in _ordered(configs))
    X = np.vstack([r[0] for r in results]) if results else np.empty((0, dim))
    return FeatureMatrix(
        subjects=[t.subject_id for t in trials],
        trials=[t.trial_index for t in trials],
        labels=[t.label for t in trials],
        updrs=np.array([t.updrs for t in trials], dtype=np.float64),
        X=X,
        columns=feature_columns(configs),
    )


META_COLUMNS = ("subject", "trial", "label", "updrs")


def write_feature_matrix(path, fm: FeatureMatrix) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(META_COLUMNS + tuple(fm.columns)) + "\n")
        for i in range(len(fm)):
            meta = [fm.subjects[i], str(fm.trials[i]), fm.labels[i].value, repr(float(fm.updrs[i]))]
            fh.write(",".join(meta + [repr(v) for v in fm.X[i].tolist()]) + "\n")


def read_feature_matrix(path) -> FeatureMatrix:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        if tuple(header[:4]) != META_COLUMNS:
            raise FormatError(f"{path}: feature matrix must start with {','.join(META_COLUMNS)}")
        subjects, trials, labels, updrs, rows = [], [], [], [], []
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split(",")
            if len(parts) != len(header):
                raise FormatError(f"{path}:{lineno}: expected {len(header)} columns, got {len(parts)}")
            try:
                subjects.append(parts[0])
                trials.append(int(parts[1]))
                labels.append(Label(parts[2]))
                updrs.append(float(parts[3]))
                rows.append(np.array(parts[4:], dtype=np.float64))
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc
    X = np.vstack(rows) if rows else np.empty((0, len(header) - 4))
    return FeatureMatrix(subjects, trials, labels, np.array(updrs), X, header[4:])
