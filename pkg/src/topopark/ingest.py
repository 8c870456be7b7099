"""Trial/manifest I/O and the two-stage amplitude normalization.

Trials are stored as one CSV per recording with the header
``t,x,y,fx,fy,fz,mx,my,mz``; a JSON manifest lists every trial together
with its subject, class label and UPDRS score.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateChannel,
    EmptySignal,
    FormatError,
    TooShort,
)


class ChannelId(enum.IntEnum):
    """Force-platform channels in canonical order."""

    X = 0
    Y = 1
    FX = 2
    FY = 3
    FZ = 4
    MX = 5
    MY = 6
    MZ = 7

    @property
    def column(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, name: str) -> "ChannelId":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown channel {name!r}") from None


ALL_CHANNELS = tuple(ChannelId)
CSV_COLUMNS = ("t",) + tuple(c.column for c in ALL_CHANNELS)


class Label(enum.Enum):
    HEALTHY_YOUNG = "HY"
    HEALTHY_ELDERLY = "HE"
    PARKINSONS = "PD"

    @property
    def index(self) -> int:
        return _LABEL_ORDER.index(self)


_LABEL_ORDER = (Label.HEALTHY_YOUNG, Label.HEALTHY_ELDERLY, Label.PARKINSONS)


@dataclass(frozen=True)
class ManifestEntry:
    file: str
    subject: str
    trial: int
    label: Label
    updrs: float = 0.0

    def to_json(self) -> dict:
        return {
            "file": self.file,
            "subject": self.subject,
            "trial": self.trial,
            "label": self.label.value,
            "updrs": self.updrs,
        }


@dataclass(frozen=True)
class DatasetManifest:
    trials: tuple[ManifestEntry, ...]
    source: Path | None = None

    def __post_init__(self):
        seen = set()
        for entry in self.trials:
            key = (entry.subject, entry.trial)
            if key in seen:
                raise FormatError(f"duplicate trial {key} in manifest")
            seen.add(key)

    @property
    def subjects(self) -> list[str]:
        """Subject ids in order of first appearance."""
        return list(dict.fromkeys(e.subject for e in self.trials))

    def resolve(self, entry: ManifestEntry) -> Path:
        path = Path(entry.file)
        if not path.is_absolute() and self.source is not None:
            path = Path(self.source).parent / path
        return path


@dataclass(frozen=True)
class TimeSeriesTrial:
    subject_id: str
    trial_index: int
    label: Label
    channels: Mapping[ChannelId, np.ndarray]
    updrs: float = 0.0

    def __post_init__(self):
        if self.trial_index < 0:
            raise ValueError("trial_index must be nonnegative")
        if self.updrs < 0:
            raise ValueError("updrs must be nonnegative")
        if self.label is not Label.PARKINSONS and self.updrs != 0:
            raise ValueError("healthy trials must carry updrs = 0")
        missing = [c.column for c in ALL_CHANNELS if c not in self.channels]
        if missing:
            raise FormatError(f"missing channels: {', '.join(missing)}")
        frozen = {}
        for c in ALL_CHANNELS:
            arr = np.array(self.channels[c], dtype=np.float64)
            if arr.ndim != 1 or arr.size < 2:
                raise TooShort(f"channel {c.column} needs at least 2 samples")
            arr.setflags(write=False)
            frozen[c] = arr
        object.__setattr__(self, "channels", frozen)

    def __len__(self):
        return len(self.channels[ChannelId.X])

    def with_channels(self, channels: Mapping[ChannelId, np.ndarray]) -> "TimeSeriesTrial":
        return replace(self, channels=dict(channels))


def parse_trial_csv(path, meta: ManifestEntry | None = None) -> TimeSeriesTrial:
    """Read one trial CSV.

    The ``t`` column must be present but its values are ignored.  Any
    missing column, non-numeric or non-finite cell raises ``FormatError``.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip().lower() for h in next(reader)]
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        for col in CSV_COLUMNS:
            if col not in header:
                raise FormatError(col)
        positions = [header.index(c.column) for c in ALL_CHANNELS]
        rows = []
        for row_index, row in enumerate(reader):
            if not row:
                continue
            try:
                values = [float(row[p]) for p in positions]
            except (ValueError, IndexError):
                raise FormatError(f"{path}: non-numeric cell in data row {row_index}") from None
            if not all(math.isfinite(v) for v in values):
                raise FormatError(f"{path}: non-finite cell in data row {row_index}")
            rows.append(values)
    if len(rows) < 2:
        raise TooShort(f"{path}: {len(rows)} data rows, need at least 2")
    data = np.array(rows, dtype=np.float64)
    if meta is None:
        meta = ManifestEntry(file=str(path), subject=path.stem, trial=0, label=Label.HEALTHY_YOUNG)
    return TimeSeriesTrial(
        subject_id=meta.subject,
        trial_index=meta.trial,
        label=meta.label,
        updrs=float(meta.updrs),
        channels={c: data[:, i] for i, c in enumerate(ALL_CHANNELS)},
    )


def write_trial_csv(path, trial: TimeSeriesTrial, t: Sequence[float] | None = None) -> None:
    n = len(trial)
    if t is None:
        t = range(n)
    cols = [trial.channels[c] for c in ALL_CHANNELS]
    lines = [",".join(CSV_COLUMNS)]
    for i, ti in enumerate(t):
        lines.append(",".join([repr(float(ti))] + [repr(float(col[i])) for col in cols]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        entries = tuple(
            ManifestEntry(
                file=str(item["file"]),
                subject=str(item["subject"]),
                trial=int(item["trial"]),
                label=Label(item["label"]),
                updrs=float(item.get("updrs", 0.0)),
            )
            for item in doc["trials"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed manifest ({exc})") from exc
    return DatasetManifest(trials=entries, source=path)


def write_manifest(path, manifest: DatasetManifest) -> None:
    doc = {"trials": [e.to_json() for e in manifest.trials]}
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_trials(manifest: DatasetManifest) -> list[TimeSeriesTrial]:
    trials = []
    for entry in manifest.trials:
        try:
            trials.append(parse_trial_csv(manifest.resolve(entry), entry))
        except FormatError as exc:
            raise FormatError(f"{entry.file}: {exc}") from exc
    return trials


def zero_center(signal) -> np.ndarray:
    arr = np.asarray(signal, dtype=np.float64)
    if arr.size == 0:
        raise EmptySignal("cannot center an empty signal")
    return arr - arr.mean()


@dataclass(frozen=True)
class Normalizer:
    """Per-channel divisor: largest centered magnitude seen while fitting."""

    max_magnitude: Mapping[ChannelId, float] = field(default_factory=dict)

    def __post_init__(self):
        for c, m in self.max_magnitude.items():
            if not m > 0:
                raise DegenerateChannel(ChannelId(c).column)


def fit_normalizer(trials: Iterable[TimeSeriesTrial]) -> Normalizer:
    trials = list(trials)
    if not trials:
        raise ValueError("cannot fit a normalizer on zero trials")
    mags = {}
    for c in ALL_CHANNELS:
        peak = max(float(np.max(np.abs(zero_center(t.channels[c])))) for t in trials)
        if peak == 0:
            raise DegenerateChannel(c.column)
        mags[c] = peak
    return Normalizer(mags)


def normalize_trial(trial: TimeSeriesTrial, norm: Normalizer) -> TimeSeriesTrial:
    out = {}
    for c in ALL_CHANNELS:
        scale = norm.max_magnitude.get(c)
        if scale is None or not scale > 0:
            raise DegenerateChannel(c.column)
        out[c] = zero_center(trial.channels[c]) / scale
    return trial.with_channels(out)
