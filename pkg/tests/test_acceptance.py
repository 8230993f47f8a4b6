"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as the
criteria execute. Every tolerance is pinned here; nothing is deferred.
"""

import math
import time

import numpy as np
import pytest
from sklearn.naive_bayes import GaussianNB

import privfog as pf
from privfog import INFINITY, MessageKind, Role
from privfog.cli import main
from privfog.seeding import derive_seed

from conftest import make_noisy, same_content


def _report(num: int, name: str, ok: bool, detail: str, elapsed: float, limit: float):
    status = "PASS" if ok else "FAIL"
    print(f"{status} criterion {num} ({name}): {detail} [{elapsed:.2f}s / limit {limit:.0f}s]")


def _laplace_samples(n: int, seed: int, scale: float = 1.0) -> np.ndarray:
    u = np.random.default_rng(seed).random(n)
    return np.array([pf.laplace_inverse_cdf(float(v), scale) for v in u])


def test_criterion_1_mechanism_correctness():
    """KS statistic of 1e5 inverse-CDF samples vs the analytic CDF, plus
    first and second moments of 1e6 draws."""
    t0 = time.perf_counter()
    xs = np.sort(_laplace_samples(10**5, seed=1001))
    n = len(xs)
    cdf = np.where(xs < 0, 0.5 * np.exp(xs), 1.0 - 0.5 * np.exp(-xs))
    ks = max(
        float(np.max(np.arange(1, n + 1) / n - cdf)),
        float(np.max(cdf - np.arange(0, n) / n)),
    )
    big = _laplace_samples(10**6, seed=1002)
    mean = float(big.mean())
    var = float(big.var())
    elapsed = time.perf_counter() - t0

    ok = ks < 0.01 and abs(mean) < 0.01 and abs(var - 2.0) <= 0.05 * 2.0 and elapsed < 5.0
    _report(1, "mechanism correctness", ok,
            f"KS={ks:.5f} mean={mean:+.5f} var={var:.5f}", elapsed, 5)
    assert ks < 0.01
    assert abs(mean) < 0.01
    assert abs(var - 2.0) <= 0.05 * 2.0
    assert elapsed < 5.0


def test_criterion_2_desk_scale_epsilon_guarantee():
    """Binned-output ratio test for inputs {0, 1} with delta=1, eps=1:
    every bin with >= 100 hits from both inputs stays within e * 1.15."""
    t0 = time.perf_counter()
    edges = np.arange(-8.0, 9.0 + 0.25, 0.5)
    counts = {}
    for x, seed in ((0.0, 1234), (1.0, 5678)):
        u = np.random.default_rng(seed).random(10**6)
        out = np.array([pf.perturb_value(x, 1.0, 1.0, float(v)) for v in u])
        counts[x] = np.histogram(out, bins=edges)[0]
    c0, c1 = counts[0.0], counts[1.0]
    mask = (c0 >= 100) & (c1 >= 100)
    ratios = np.maximum(c0[mask] / c1[mask], c1[mask] / c0[mask])
    max_ratio = float(ratios.max())
    bound = math.e * 1.15
    elapsed = time.perf_counter() - t0

    ok = max_ratio <= bound and elapsed < 30.0
    _report(2, "desk-scale epsilon guarantee", ok,
            f"max ratio={max_ratio:.4f} over {int(mask.sum())} bins, bound={bound:.4f}",
            elapsed, 30)
    assert max_ratio <= bound
    assert elapsed < 30.0


def test_criterion_3_partition_round_trip():
    """100 randomized (r <= 50, m <= 12, s <= 12) partition/reassemble
    round trips with exact equality."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(33)
    checked = 0
    for _ in range(100):
        r = int(rng.integers(1, 51))
        m = int(rng.integers(1, 13))
        s = int(rng.integers(1, 13))
        d = make_noisy(rng.normal(size=(r, m)))
        back = pf.reassemble(
            pf.vertical_partition(d, s), d.schema, dict(zip(d.row_keys, d.labels))
        )
        assert same_content(d, back), f"round trip failed for r={r} m={m} s={s}"
        checked += 1
    elapsed = time.perf_counter() - t0

    ok = checked == 100 and elapsed < 1.0
    _report(3, "partition round-trip", ok, f"{checked}/100 exact", elapsed, 1)
    assert checked == 100
    assert elapsed < 1.0


def _iris_scenario(iris_schema, iris_full, epsilon, seed):
    owners = pf.assign_owners(iris_full, 3)
    return pf.ScenarioConfig(
        schema=iris_schema, owners=owners, fog_count=2,
        epsilon_total=epsilon, split_fraction=0.7, seed=seed,
    )


def test_criterion_4_pipeline_equivalence(iris_schema, iris_full):
    """Infinite-budget end-to-end simulation on Iris (n=3, s=2, split 0.7,
    seed 42) must match the direct fit/predict oracle bit for bit."""
    t0 = time.perf_counter()
    scenario = _iris_scenario(iris_schema, iris_full, INFINITY, seed=42)
    outcome = pf.evaluate_scenario(scenario)

    lo = np.array([b[0] for b in iris_schema.feature_bounds])
    hi = np.array([b[1] for b in iris_schema.feature_bounds])
    blocks, labels, queries, truth = [], [], [], []
    for owner in scenario.owners:
        train, qf, ql = pf.split_owner(
            owner, 0.7, derive_seed(42, "split", owner.owner_id)
        )
        blocks.append(np.clip(train.features, lo, hi))
        labels.extend(train.labels)
        queries.extend(np.clip(q, lo, hi) for q in qf)
        truth.extend(ql)
    model = pf.fit(np.vstack(blocks), labels)
    oracle = tuple(pf.predict(model, q).predicted_label for q in queries)
    elapsed = time.perf_counter() - t0

    identical = outcome.predictions == oracle and outcome.truth == tuple(truth)
    ok = identical and elapsed < 2.0
    _report(4, "pipeline equivalence", ok,
            f"{len(oracle)} predictions bit-identical={identical}, "
            f"accuracy={outcome.accuracy:.4f}", elapsed, 2)
    assert identical
    assert elapsed < 2.0


def test_criterion_5_baseline_utility(iris_full):
    """Noiseless Gaussian NB on the Iris 70/30 split (seed 42) reaches
    accuracy >= 0.90, cross-checked against scikit-learn's GaussianNB on
    the identical arrays."""
    t0 = time.perf_counter()
    train, test_feats, test_labels = pf.split_owner(iris_full, 0.7, 42)
    model = pf.fit(train.features, train.labels)
    ours = [pf.predict(model, q).predicted_label for q in test_feats]
    acc = pf.accuracy(ours, test_labels)

    reference = GaussianNB().fit(train.features, train.labels)
    ref_preds = list(reference.predict(test_feats))
    ref_acc = pf.accuracy(ref_preds, test_labels)
    elapsed = time.perf_counter() - t0

    ok = acc >= 0.90 and ours == ref_preds and elapsed < 1.0
    _report(5, "baseline utility", ok,
            f"accuracy={acc:.4f} reference={ref_acc:.4f} predictions match="
            f"{ours == ref_preds}", elapsed, 1)
    assert acc >= 0.90
    assert ours == ref_preds
    assert elapsed < 1.0


def test_criterion_6_privacy_utility_monotonicity(iris_schema, iris_full):
    """30-trial mean accuracy nondecreasing over eps in {0.1, 1, 10, inf},
    allowing one adjacent inversion of at most 0.02."""
    t0 = time.perf_counter()
    scenario = _iris_scenario(iris_schema, iris_full, 1.0, seed=0)
    grid = (0.1, 1.0, 10.0, INFINITY)
    cfg = pf.SweepConfig(epsilons=grid, trials=30, base_seed=7, scenario=scenario)
    report = pf.run_sweep(cfg)
    means = [report.mean_accuracy(e) for e in grid]
    inversions = [
        means[i] - means[i + 1] for i in range(len(means) - 1)
        if means[i] > means[i + 1]
    ]
    elapsed = time.perf_counter() - t0

    ok = (
        len(report.rows) == 120
        and len(inversions) <= 1
        and all(gap <= 0.02 for gap in inversions)
        and elapsed < 60.0
    )
    detail = "means=" + ", ".join(f"{v:.4f}" for v in means)
    _report(6, "privacy-utility monotonicity", ok,
            f"{detail}; inversions={len(inversions)}", elapsed, 60)
    assert len(report.rows) == 120
    assert len(inversions) <= 1
    assert all(gap <= 0.02 for gap in inversions)
    assert elapsed < 60.0


def test_criterion_7_exposure_audit():
    """50 randomized scenarios: every fog node holds <= ceil(m/s) feature
    columns, zero pre-noise matches at finite epsilon, and no OWNER<->CLOUD
    message anywhere."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(7007)
    scenarios = 0
    for _ in range(50):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(1, 7))
        s = int(rng.integers(1, 6))
        rows = int(rng.integers(2, 9))
        epsilon = float(rng.uniform(0.5, 5.0))
        schema = pf.Schema(
            feature_names=tuple(f"f{j}" for j in range(m)),
            feature_bounds=((0.0, 1.0),) * m,
            class_labels=("a", "b"),
        )
        owners = tuple(
            pf.OwnerDataset(
                owner_id=oid,
                features=rng.random((rows, m)),
                labels=tuple("a" if i % 2 == 0 else "b" for i in range(rows)),
                schema=schema,
            )
            for oid in range(1, n + 1)
        )
        config = pf.ScenarioConfig(
            schema=schema, owners=owners, fog_count=s,
            epsilon_total=epsilon, seed=int(rng.integers(0, 10**6)),
        )
        queries = []
        if rng.random() < 0.5:
            queries.append((1, rng.random(m)))
        log, _, _ = pf.simulate(config, queries)

        exposure = pf.audit_fog_exposure(log, config)  # raises on any leak
        cap = math.ceil(m / s)
        assert all(len(cols) <= cap for cols in exposure.values()), (n, m, s)
        for record in log.records:
            roles = {record.message.src.role, record.message.dst.role}
            assert roles != {Role.OWNER, Role.CLOUD}
        scenarios += 1
    elapsed = time.perf_counter() - t0

    ok = scenarios == 50 and elapsed < 30.0
    _report(7, "exposure audit", ok, f"{scenarios}/50 scenarios clean", elapsed, 30)
    assert scenarios == 50
    assert elapsed < 30.0


def test_criterion_8_sweep_determinism(iris_path, tmp_path):
    """Two full sweep runs with identical flags produce byte-identical
    report CSVs and event logs."""
    t0 = time.perf_counter()
    flags = [
        "--dataset", str(iris_path), "--owners", "2", "--fog-nodes", "2",
        "--epsilon", "0.5,inf", "--trials", "3", "--seed", "21",
    ]
    paths = []
    for tag in ("first", "second"):
        out = tmp_path / f"report_{tag}.csv"
        logp = tmp_path / f"events_{tag}.log"
        code = main(flags + ["--out", str(out), "--log", str(logp)])
        assert code == 0
        paths.append((out, logp))
    (out_a, log_a), (out_b, log_b) = paths
    reports_equal = out_a.read_bytes() == out_b.read_bytes()
    logs_equal = log_a.read_bytes() == log_b.read_bytes()
    elapsed = time.perf_counter() - t0

    ok = reports_equal and logs_equal and elapsed < 60.0
    _report(8, "sweep determinism", ok,
            f"reports identical={reports_equal}, logs identical={logs_equal}",
            elapsed, 60)
    assert reports_equal
    assert logs_equal
    assert elapsed < 60.0
