import numpy as np
import pytest
from scipy import ndimage

from topopark.errors import ChannelExcluded
from topopark.features import (
    FEATURE_CHANNELS,
    compute_feature_matrix,
    default_channel_configs,
    feature_block,
    read_feature_matrix,
    trial_feature_vector,
    write_feature_matrix,
)
from topopark.ingest import ALL_CHANNELS, ChannelId, Label, TimeSeriesTrial
from topopark.persistence import sublevel_persistence, threshold_diagram
from topopark.pimage import rasterize


def trial_from(signals, subject="s", label=Label.HEALTHY_YOUNG):
    return TimeSeriesTrial(subject, 0, label, {c: signals[c] for c in ALL_CHANNELS})


def random_trial(seed=0, n=200):
    rng = np.random.default_rng(seed)
    sigs = {}
    for c in ALL_CHANNELS:
        s = np.cumsum(rng.normal(size=n))
        s -= s.mean()
        sigs[c] = s / np.abs(s).max()
    return trial_from(sigs)


def test_default_configs():
    cfgs = default_channel_configs()
    assert list(cfgs) == list(FEATURE_CHANNELS)
    assert ChannelId.FZ not in cfgs
    assert cfgs[ChannelId.FX].birth_range == (-0.5, 0.5)
    assert cfgs[ChannelId.MZ].birth_range == (-0.75, 0.75)
    for c in (ChannelId.X, ChannelId.Y, ChannelId.FY, ChannelId.MX, ChannelId.MY):
        assert cfgs[c].birth_range == (-1.5, 1.5)
    assert all((k.grid_w, k.grid_h, k.sigma) == (50, 50, 0.03) for k in cfgs.values())


def test_default_dimension():
    fv = trial_feature_vector(random_trial())
    assert fv.dim == 17500
    assert np.all(fv.values >= 0)


def test_block_offsets():
    fv = trial_feature_vector(random_trial())
    assert fv.offset(ChannelId.X) == 0
    assert fv.offset(ChannelId.Y) == 2500
    assert fv.offset(ChannelId.MZ) == 15000
    np.testing.assert_array_equal(feature_block(fv, ChannelId.Y), fv.values[2500:5000])
    np.testing.assert_array_equal(feature_block(fv, ChannelId.MZ), fv.values[15000:17500])
    with pytest.raises(ChannelExcluded):
        feature_block(fv, ChannelId.FZ)


def test_block_round_trip_is_bit_exact():
    trial = random_trial(4)
    fv = trial_feature_vector(trial, threshold=0.02)
    cfgs = default_channel_configs()
    for c in FEATURE_CHANNELS:
        dgm = threshold_diagram(sublevel_persistence(trial.channels[c]), 0.02)
        standalone = rasterize(dgm, cfgs[c]).pixels.ravel()
        np.testing.assert_array_equal(feature_block(fv, c), standalone)


def test_ramps_give_one_blob_per_channel():
    ramp = np.linspace(-0.2, 0.3, 100)
    trial = trial_from({c: ramp for c in ALL_CHANNELS})
    fv = trial_feature_vector(trial)
    for c in FEATURE_CHANNELS:
        block = feature_block(fv, c).reshape(50, 50)
        mask = block > 1e-12
        assert mask.any()
        _, n_regions = ndimage.label(mask)
        assert n_regions == 1
    nonzero_blocks = [bool((feature_block(fv, c) > 1e-12).any()) for c in FEATURE_CHANNELS]
    assert sum(nonzero_blocks) == 7


def test_constant_channels_give_zero_vector():
    trial = trial_from({c: np.zeros(10) for c in ALL_CHANNELS})
    fv = trial_feature_vector(trial, threshold=0.01)
    assert fv.dim == 17500
    assert not fv.values.any()


def test_swapping_channels_permutes_blocks():
    trial = random_trial(7)
    swapped = trial.with_channels({**trial.channels, ChannelId.X: trial.channels[ChannelId.Y],
                                   ChannelId.Y: trial.channels[ChannelId.X]})
    cfgs = {c: default_channel_configs()[ChannelId.X] for c in FEATURE_CHANNELS}
    a = trial_feature_vector(trial, cfgs)
    b = trial_feature_vector(swapped, cfgs)
    np.testing.assert_array_equal(feature_block(a, ChannelId.X), feature_block(b, ChannelId.Y))
    np.testing.assert_array_equal(feature_block(a, ChannelId.Y), feature_block(b, ChannelId.X))
    for c in FEATURE_CHANNELS[2:]:
        np.testing.assert_array_equal(feature_block(a, c), feature_block(b, c))


def test_segment_order_invariance():
    rng = np.random.default_rng(11)
    top = 1.0
    segments = []
    for _ in range(5):
        inner = rng.uniform(-1, 0.9, size=rng.integers(3, 30))
        segments.append(np.r_[top, inner, top])
    for _ in range(10):
        order = rng.permutation(len(segments))
        a = sublevel_persistence(np.concatenate(segments))
        b = sublevel_persistence(np.concatenate([segments[k] for k in order]))
        np.testing.assert_array_equal(a.pairs, b.pairs)


def test_per_channel_threshold_and_counts():
    trial = random_trial(2)
    counts = {}
    fv = trial_feature_vector(trial, threshold=0.0, thresholds={ChannelId.X: 10.0}, counts=counts)
    assert counts[ChannelId.X] == 0
    assert not feature_block(fv, ChannelId.X).any()
    assert counts[ChannelId.Y] == len(sublevel_persistence(trial.channels[ChannelId.Y]))


def test_channel_subset():
    cfgs = default_channel_configs([ChannelId.X])
    assert trial_feature_vector(random_trial(), cfgs).dim == 2500


def test_feature_matrix_io_and_jobs(tmp_path):
    trials = [random_trial(s) for s in range(3)]
    fm1 = compute_feature_matrix(trials)
    fm2 = compute_feature_matrix(trials, jobs=2)
    np.testing.assert_array_equal(fm1.X, fm2.X)
    write_feature_matrix(tmp_path / "f.csv", fm1)
    first = (tmp_path / "f.csv").read_text().splitlines()
    assert first[0].split(",")[:5] == ["subject", "trial", "label", "updrs", "x_0"]
    assert all(len(line.split(",")) == 17504 for line in first)
    back = read_feature_matrix(tmp_path / "f.csv")
    np.testing.assert_array_equal(back.X, fm1.X)
    assert back.labels == fm1.labels
