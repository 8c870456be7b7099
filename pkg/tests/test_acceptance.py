"""Acceptance suite.  One test per criterion; the terminal summary prints a
PASS/FAIL line for each.  The end-to-end criteria share one pipeline run.
"""

import json
import time

import numpy as np
import pytest
from scipy.stats import binomtest

from topopark.cli import main
from topopark.features import trial_feature_vector
from topopark.ingest import ALL_CHANNELS, Label, TimeSeriesTrial
from topopark.learn import Task, objective, pearson_p_value, predict, train_l1_svm
from topopark.persistence import PersistenceDiagram, sublevel_persistence, sublevel_persistence_bruteforce
from topopark.pimage import PersistenceImageConfig, birth_persistence_transform, rasterize

from .oracles import quadrature_image


def detail(request, text):
    request.node.user_properties.append(("detail", text))


def random_signal(rng):
    n = int(rng.integers(2, 65))
    kind = rng.integers(3)
    if kind == 0:  # heavy ties
        return rng.integers(-3, 4, size=n).astype(float)
    if kind == 1:  # continuous values
        return rng.normal(size=n)
    sig = rng.normal(size=n)
    sig[rng.random(n) < 0.4] = 0.25  # plateaus inside continuous data
    return sig


@pytest.mark.criterion(1, "union-find persistence equals brute-force filtration on 10,000 signals")
def test_persistence_oracle_equivalence(request):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    mismatches = 0
    for _ in range(10_000):
        sig = random_signal(rng)
        fast = sublevel_persistence(sig).pairs
        slow = sublevel_persistence_bruteforce(sig).pairs
        if fast.shape != slow.shape or not np.array_equal(fast, slow):
            mismatches += 1
    elapsed = time.perf_counter() - start
    detail(request, f"mismatches={mismatches}, {elapsed:.1f}s")
    assert mismatches == 0
    assert elapsed < 60


@pytest.mark.criterion(2, "shift/scale equivariance and reversal invariance on 1,000 signals")
def test_equivariance(request):
    rng = np.random.default_rng(7)
    failures = 0
    for _ in range(1000):
        # dyadic samples, shifts and scales keep every operation exact in binary64
        sig = np.round(random_signal(rng) * 2**20) / 2**20
        shift = rng.integers(-64, 65) / 16
        scale = 2.0 ** rng.integers(-3, 4)
        base = sublevel_persistence(sig).pairs
        ok = (np.array_equal(sublevel_persistence(sig + shift).pairs, base + shift)
              and np.array_equal(sublevel_persistence(sig * scale).pairs, base * scale)
              and np.array_equal(sublevel_persistence(sig[::-1]).pairs, base))
        failures += not ok
    detail(request, f"failures={failures}")
    assert failures == 0


def random_interior_diagram(rng, config, k):
    s = config.sigma
    (b_lo, b_hi), (p_lo, p_hi) = config.birth_range, config.pers_range
    births = rng.uniform(b_lo + 8 * s, b_hi - 8 * s, size=k)
    pers = rng.uniform(p_lo + 8 * s, p_hi - 8 * s, size=k)
    return PersistenceDiagram(np.column_stack([births, births + pers]))


@pytest.mark.criterion(3, "persistence-image mass conservation and quadrature agreement")
def test_image_mass_and_quadrature(request):
    rng = np.random.default_rng(3)
    config = PersistenceImageConfig()
    worst_mass, worst_pixel, worst_sum = 0.0, 0.0, 0.0
    for _ in range(100):
        dgm = random_interior_diagram(rng, config, int(rng.integers(1, 6)))
        pixels = rasterize(dgm, config).pixels
        weights = birth_persistence_transform(dgm)[:, 1].sum()
        worst_mass = max(worst_mass, abs(pixels.sum() - weights) / weights)
        oracle = quadrature_image(dgm, config)
        worst_pixel = max(worst_pixel, np.abs(pixels - oracle).max())
        worst_sum = max(worst_sum, abs(pixels.sum() - oracle.sum()))
    detail(request, f"mass rel err {worst_mass:.2e}, max pixel diff {worst_pixel:.2e}, sum diff {worst_sum:.2e}")
    assert worst_mass <= 1e-6
    assert worst_pixel <= 1e-6
    assert worst_sum <= 1e-6


@pytest.mark.criterion(4, "default feature vector has 17500 entries")
def test_feature_dimension(request):
    rng = np.random.default_rng(0)
    sig = np.cumsum(rng.normal(size=300))
    sig = (sig - sig.mean()) / np.abs(sig - sig.mean()).max()
    trial = TimeSeriesTrial("s", 0, Label.HEALTHY_YOUNG, {c: sig for c in ALL_CHANNELS})
    dim = trial_feature_vector(trial).dim
    detail(request, f"dim={dim}")
    assert dim == 17500


@pytest.mark.criterion(5, "Pearson p-values bracket the published table values")
def test_p_value_brackets(request):
    start = time.perf_counter()
    p1 = pearson_p_value(0.8493, 60)
    p2 = pearson_p_value(0.9006, 60)
    elapsed = time.perf_counter() - start
    detail(request, f"p(0.8493)={p1:.3e}, p(0.9006)={p2:.3e}, {elapsed * 1e3:.1f}ms")
    assert 6.6e-18 <= p1 <= 1.5e-17
    assert 7.9e-23 <= p2 <= 1.8e-22
    assert elapsed < 1


# --- end-to-end ---------------------------------------------------------------

def _pipeline(root, jobs, tasks):
    out = root / f"jobs{jobs}"
    timings = {}
    start = time.perf_counter()
    assert main(["synth", "--out", str(root / "data")]) == 0
    manifest = str(root / "data" / "manifest.json")
    assert main(["features", "--manifest", manifest, "--jobs", str(jobs), "--out", str(out)]) == 0
    timings["features"] = time.perf_counter() - start
    for task in tasks:
        t0 = time.perf_counter()
        assert main(["experiment", "--task", task, "--features", str(out / "features.csv"),
                     "--jobs", str(jobs), "--out", str(out)]) == 0
        timings[task] = time.perf_counter() - t0
    timings["total"] = time.perf_counter() - start
    return out, timings


@pytest.fixture(scope="module")
def end_to_end(tmp_path_factory):
    root = tmp_path_factory.mktemp("e2e")
    out, timings = _pipeline(root, 1, ["binary", "three-class", "regress"])
    return root, out, timings


@pytest.mark.slow
@pytest.mark.criterion(6, "synthetic LOSO classification (binary >= 0.95, three-class beats chance)")
def test_end_to_end_classification(request, end_to_end):
    _, out, timings = end_to_end
    binary = json.loads((out / "report_binary.json").read_text())
    three = json.loads((out / "report_three-class.json").read_text())
    p = binomtest(three["correct"], three["n_trials"], 1 / 3, alternative="greater").pvalue
    detail(request, f"binary={binary['accuracy']:.4f}, three-class={three['accuracy']:.4f} "
                    f"(binomial p={p:.2e}), {timings['total']:.0f}s")
    assert binary["n_trials"] == 266
    assert binary["accuracy"] >= 0.95
    assert p < 0.01
    assert three["chance_p_value"] == pytest.approx(p, rel=1e-9)
    assert timings["total"] < 15 * 60


@pytest.mark.slow
@pytest.mark.criterion(7, "synthetic severity regression r >= 0.8")
def test_end_to_end_regression(request, end_to_end):
    _, out, _ = end_to_end
    doc = json.loads((out / "report_regress.json").read_text())
    preds = doc["subject_predictions"]
    detail(request, f"r={doc['pearson_r']:.4f}, p={doc['p_value']:.2e}, subjects={len(preds)}")
    assert len(preds) == 60
    assert all(p["prediction"] >= 0 for p in preds)
    assert doc["pearson_r"] >= 0.8


@pytest.mark.slow
@pytest.mark.criterion(8, "identical runs give byte-identical features and reports across --jobs")
def test_determinism(request, end_to_end):
    root, out1, _ = end_to_end
    out2, _ = _pipeline(root, 2, ["binary", "regress"])
    names = ["features.csv", "report_binary.json", "report_regress.json"]
    same = {n: (out1 / n).read_bytes() == (out2 / n).read_bytes() for n in names}
    detail(request, ", ".join(f"{n}={'same' if v else 'DIFFERENT'}" for n, v in same.items()))
    assert all(same.values())


@pytest.mark.criterion(9, "L1-SVM objective non-increasing per epoch; separable pair fits exactly")
def test_solver_sanity(request):
    rng = np.random.default_rng(99)
    worst_rise = 0.0
    for k in range(50):
        n, d = int(rng.integers(5, 60)), int(rng.integers(1, 40))
        X = np.abs(rng.normal(size=(n, d))) * rng.uniform(0.1, 3)
        y = rng.integers(0, 2, size=n)
        y[0], y[1] = 0, 1
        if k % 2:
            model = train_l1_svm(X, y, C=1.5)
            signs = np.where(y == model.classes[1], 1.0, -1.0)
            final = objective(X, signs, model.weights[0], model.bias[0], 1.5, Task.BINARY)
        else:
            target = X @ rng.normal(size=d)
            model = train_l1_svm(X, target, C=0.85, task=Task.REGRESSION, epsilon=0.1)
            final = objective(X, target, model.weights[0], model.bias[0], 0.85, Task.REGRESSION, 0.1)
        hist = np.asarray(model.objective[0])
        worst_rise = max(worst_rise, float(np.max(np.diff(hist), initial=0.0)))
        assert final == pytest.approx(hist[-1], rel=1e-9, abs=1e-12)
    pair = train_l1_svm([[-1.0], [1.0]], [0, 1], C=1.5)
    errors = sum(p != t for p, t in zip(predict(pair, np.array([[-1.0], [1.0]])), [0, 1]))
    detail(request, f"largest per-epoch rise {worst_rise:.1e}, separable-pair errors {errors}")
    assert worst_rise <= 1e-10
    assert errors == 0
