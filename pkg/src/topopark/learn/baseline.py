"""Peak Velocity Index baseline."""

import numpy as np

from ..errors import TooShort
from ..features import FEATURE_CHANNELS


def peak_velocity_index(signal) -> float:
    """Largest absolute difference between adjacent samples."""
    s = np.asarray(signal, dtype=np.float64)
    if s.size < 2:
        raise TooShort("peak velocity needs at least 2 samples")
    return float(np.max(np.abs(np.diff(s))))


def pvi_features(trial, channels=FEATURE_CHANNELS) -> np.ndarray:
    """One peak-velocity value per channel, in feature-channel order."""
    return np.array([peak_velocity_index(trial.channels[c]) for c in channels])
