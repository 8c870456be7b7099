"""Deterministic synthetic force-platform corpus.

Random numbers come from SplitMix64 so the byte stream can be reproduced in
any language:

    state <- state + 0x9E3779B97F4A7C15            (mod 2**64)
    z <- state
    z <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9      (mod 2**64)
    z <- (z ^ (z >> 27)) * 0x94D049BB133111EB      (mod 2**64)
    output z ^ (z >> 31)

Uniform doubles are ``(u >> 11) * 2**-53``.  Normal deviates use one
Box-Muller cosine branch per pair of uniforms:
``sqrt(-2 ln(1 - u1)) * cos(2 pi u2)``.  A master stream seeded with the
user seed hands out one 64-bit sub-seed per subject, in manifest order.

Every channel of a trial is a weighted sum of a reach trajectory (linear
ramps between pseudo-targets, with a damped overshoot after each arrival), a
class-dependent tremor sinusoid and white noise.  Only the tremor differs
between classes; Parkinsons subjects get a severity score that drives tremor
amplitude linearly.  None of the constants are clinical claims.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyConfig
from .ingest import (
    ALL_CHANNELS,
    ChannelId,
    DatasetManifest,
    Label,
    ManifestEntry,
    TimeSeriesTrial,
    write_manifest,
    write_trial_csv,
)

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self, n: int) -> np.ndarray:
        steps = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * _GAMMA
            self.state = (self.state + n * int(_GAMMA)) & _MASK
            z = (z ^ (z >> np.uint64(30))) * _MIX1
            z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))

    def uniform(self, n: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        u = (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return low + (high - low) * u

    def normal(self, n: int) -> np.ndarray:
        u = self.uniform(2 * n)
        return np.sqrt(-2.0 * np.log1p(-u[0::2])) * np.cos(2.0 * np.pi * u[1::2])

    def integers(self, low: int, high: int) -> int:
        """Uniform integer in ``[low, high]``."""
        return low + int(self.uniform(1)[0] * (high - low + 1))


@dataclass(frozen=True)
class ClassParams:
    base_freq: float = 1.5        # Hz, overshoot oscillation after each reach
    damping: float = 2.5          # 1/s
    overshoot: float = 0.08
    tremor_freq: float = 9.0      # Hz
    tremor_amp: float = 0.0
    noise_amp: float = 0.002
    severity_scale: float = 0.0   # tremor amplitude added per UPDRS point


def default_class_params() -> dict:
    return {
        Label.HEALTHY_YOUNG: ClassParams(tremor_freq=9.0, tremor_amp=0.006),
        Label.HEALTHY_ELDERLY: ClassParams(tremor_freq=7.0, tremor_amp=0.018),
        Label.PARKINSONS: ClassParams(tremor_freq=5.0, tremor_amp=0.02, severity_scale=0.0015),
    }


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    subjects_per_class: tuple[int, int, int] = (21, 22, 17)
    trials_per_subject: dict = field(default_factory=lambda: {
        Label.HEALTHY_YOUNG: 5, Label.HEALTHY_ELDERLY: 5, Label.PARKINSONS: 3})
    length_range: tuple[int, int] = (1000, 1500)
    sample_rate: float = 50.0
    updrs_range: tuple[float, float] = (10.0, 45.0)
    class_params: dict = field(default_factory=default_class_params)

    def __post_init__(self):
        lo, hi = self.length_range
        if not 2 <= lo <= hi:
            raise ValueError(f"invalid length range {self.length_range}")
        if any(n < 0 for n in self.subjects_per_class):
            raise ValueError("subject counts must be nonnegative")


# reach-direction gains (x-part, y-part), output scale and offset per channel
_CHANNEL_MIX = {
    ChannelId.X: (1.0, 0.0, 1.0, 0.0),
    ChannelId.Y: (0.0, 1.0, 1.0, 0.0),
    ChannelId.FX: (0.8, 0.2, 40.0, 0.0),
    ChannelId.FY: (0.2, 0.8, 40.0, 0.0),
    ChannelId.FZ: (0.1, 0.1, 15.0, 700.0),
    ChannelId.MX: (0.0, -1.0, 30.0, 0.0),
    ChannelId.MY: (1.0, 0.0, 30.0, 0.0),
    ChannelId.MZ: (0.5, -0.5, 4.0, 0.0),
}


@dataclass(frozen=True)
class SubjectParams:
    subject: str
    label: Label
    updrs: float
    tremor_amp: float
    seed: int


@dataclass
class SynthDataset:
    manifest: DatasetManifest
    trials: list
    subjects: list
    times: list

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for entry, trial, t in zip(self.manifest.trials, self.trials, self.times):
            write_trial_csv(out / entry.file, trial, t)
        path = out / "manifest.json"
        write_manifest(path, self.manifest)
        return path


def _reach_path(rng: SplitMix64, n: int, fs: float, params: ClassParams):
    """Piecewise-linear excursions to random targets plus damped overshoot."""
    xy = np.zeros((n, 2))
    t = np.arange(n) / fs
    pos = np.zeros(2)
    i = 0
    while i < n:
        hold = int(rng.uniform(1, 0.5, 1.5)[0] * fs)
        xy[i:i + hold] = pos
        i += hold
        if i >= n:
            break
        target = rng.uniform(2, -1.0, 1.0) if not pos.any() else np.zeros(2)
        dur = max(2, int(rng.uniform(1, 0.6, 1.2)[0] * fs))
        ramp = np.linspace(0.0, 1.0, dur, endpoint=False)[:, None]
        seg = pos + (target - pos) * ramp
        xy[i:i + dur] = seg[: n - i]
        i += dur
        if i >= n:
            break
        direction = target - pos
        pos = target
        # overshoot along the travel direction, decaying from arrival onwards
        tau = t[i:] - t[i]
        osc = params.overshoot * np.exp(-params.damping * tau) * np.sin(2 * np.pi * params.base_freq * tau)
        xy[i:] += osc[:, None] * direction[None, :]
    return xy


def _generate_trial(rng, subject: SubjectParams, trial_index, config: SynthConfig):
    params = config.class_params[subject.label]
    n = rng.integers(*config.length_range)
    fs = config.sample_rate
    t = np.arange(n) / fs
    reach = _reach_path(rng, n, fs, params)
    channels = {}
    for c in ALL_CHANNELS:
        gx, gy, scale, offset = _CHANNEL_MIX[c]
        phase = rng.uniform(1, 0.0, 2 * np.pi)[0]
        tremor = subject.tremor_amp * np.sin(2 * np.pi * params.tremor_freq * t + phase)
        noise = params.noise_amp * rng.normal(n)
        channels[c] = offset + scale * (gx * reach[:, 0] + gy * reach[:, 1] + tremor + noise)
    trial = TimeSeriesTrial(
        subject_id=subject.subject,
        trial_index=trial_index,
        label=subject.label,
        updrs=subject.updrs,
        channels=channels,
    )
    return trial, t


def generate_dataset(config: SynthConfig | None = None) -> SynthDataset:
    """Build the full corpus in memory.  Same config, same bytes."""
    config = config or SynthConfig()
    labels = (Label.HEALTHY_YOUNG, Label.HEALTHY_ELDERLY, Label.PARKINSONS)
    if sum(config.subjects_per_class) == 0:
        raise EmptyConfig("no subjects requested")
    master = SplitMix64(config.seed)
    subjects = []
    for label, count in zip(labels, config.subjects_per_class):
        for k in range(count):
            seed = int(master.next_u64(1)[0])
            params = config.class_params[label]
            updrs = 0.0
            if label is Label.PARKINSONS:
                lo, hi = config.updrs_range
                updrs = round(float(SplitMix64(seed ^ 0x5EED).uniform(1, lo, hi)[0]), 1)
            amp = params.tremor_amp + params.severity_scale * updrs
            subjects.append(SubjectParams(f"{label.value}{k + 1:02d}", label, updrs, amp, seed))

    entries, trials, times = [], [], []
    for subj in subjects:
        rng = SplitMix64(subj.seed)
        for j in range(config.trials_per_subject[subj.label]):
            trial, t = _generate_trial(rng, subj, j, config)
            entries.append(ManifestEntry(f"{subj.subject}_t{j}.csv", subj.subject, j, subj.label, subj.updrs))
            trials.append(trial)
            times.append(t)
    return SynthDataset(DatasetManifest(tuple(entries)), trials, subjects, times)
