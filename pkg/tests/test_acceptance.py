"""Acceptance criteria C1-C9, one test each.

Every test records an ``acceptance`` property; the conftest hook prints one
PASS/FAIL line per criterion at the end of the session. Sweeps run through the
CLI on the configs shipped in ``configs/``.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

import oracles
from embstab import funcsim, repsim
from embstab.classify import TrainConfig, accuracy, loss_and_grad, predict_proba, train_logreg
from embstab.cli import main
from embstab.errors import DegenerateNormalizationError
from embstab.graph import SplitSpec
from embstab.harness import FUNCTIONAL_PAIRWISE, REPRESENTATIONAL, load_config, read_report, run_sweep

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
PAIRWISE = REPRESENTATIONAL + FUNCTIONAL_PAIRWISE
N2V_DIMS = (4, 8, 16, 32, 64, 128)


def _sweep_cli(config, out, workers):
    t0 = time.perf_counter()
    code = main(["sweep", "--config", str(config), "--workers", str(workers), "--out", str(out)])
    return code, time.perf_counter() - t0


@pytest.fixture(scope="module")
def n2v_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("c7") / "workers1.csv"
    code, seconds = _sweep_cli(CONFIGS / "sbm_demo.json", out, 1)
    assert code == 0
    return out, seconds


# -- C1 --------------------------------------------------------------------


def test_c1_measure_oracle_equivalence(record_property):
    record_property("acceptance", "C1 measure formulas match independent oracles (50 instances, 1e-8)")
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    for _ in range(50):
        n, d = int(rng.integers(4, 31)), int(rng.integers(2, 9))
        k = int(rng.integers(1, min(10, n - 1) + 1))
        z1, z2 = rng.standard_normal((n, d)), rng.standard_normal((n, d))
        a, b = z1.tolist(), z2.tolist()
        assert repsim.aligned_cosine_similarity(z1, z2) == pytest.approx(oracles.aligned_cos(a, b), abs=1e-8)
        assert repsim.distance_correlation(z1, z2) == pytest.approx(oracles.dcor(a, b), abs=1e-8)
        assert repsim.knn_jaccard(z1, z2, k) == pytest.approx(oracles.jaccard(a, b, k), abs=1e-8)
        assert repsim.second_order_cosine(z1, z2, k) == pytest.approx(oracles.second_cos(a, b, k), abs=1e-8)

        c = int(rng.integers(2, 9))
        outs = [rng.dirichlet(np.full(c, 0.5), size=n) for _ in range(3)]
        for o in outs:
            hard = rng.random(n) < 0.3
            o[hard] = np.eye(c)[rng.integers(0, c, hard.sum())]
        y = rng.integers(0, c, n)
        o1, o2 = outs[0].tolist(), outs[1].tolist()
        assert funcsim.disagreement(outs[0], outs[1]) == pytest.approx(oracles.disagreement(o1, o2), abs=1e-8)
        assert funcsim.error_rate(outs[0], y) == pytest.approx(oracles.error_rate(o1, y.tolist()), abs=1e-8)
        assert funcsim.mean_jsd(outs[0], outs[1]) == pytest.approx(oracles.jsd(o1, o2), abs=1e-8)
        assert funcsim.stable_core(outs) == pytest.approx(oracles.stable_core([o.tolist() for o in outs]), abs=1e-8)
        try:
            want = oracles.norm_disagreement(o1, o2, y.tolist())
        except ZeroDivisionError:
            with pytest.raises(DegenerateNormalizationError):
                funcsim.minmax_normalized_disagreement(outs[0], outs[1], y)
        else:
            assert funcsim.minmax_normalized_disagreement(outs[0], outs[1], y) == pytest.approx(want, abs=1e-8)
    assert time.perf_counter() - t0 < 10


# -- C2 --------------------------------------------------------------------


def _random_orthogonal_batch(rng, count, d):
    q, r = np.linalg.qr(rng.standard_normal((count, d, d)))
    return q * np.sign(np.diagonal(r, axis1=1, axis2=2))[:, None, :]


def test_c2_procrustes_optimality(record_property):
    record_property("acceptance", "C2 Procrustes optimal vs 1,000 random Q on 100 pairs (slack 1e-9)")
    rng = np.random.default_rng(202)
    t0 = time.perf_counter()
    for _ in range(100):
        z, z2 = rng.standard_normal((20, 5)), rng.standard_normal((20, 5))
        q_star = repsim.procrustes_align(z, z2).q
        best = np.linalg.norm(z @ q_star - z2)
        qs = _random_orthogonal_batch(rng, 1000, 5)
        others = np.linalg.norm(np.einsum("nd,qde->qne", z, qs) - z2, axis=(1, 2))
        assert best <= others.min() + 1e-9
    assert time.perf_counter() - t0 < 30


# -- C3 --------------------------------------------------------------------


def test_c3_invariance_suite(record_property):
    record_property("acceptance", "C3 rotation/permutation invariance (1e-6); dcor scale+translation (1e-8)")
    rng = np.random.default_rng(303)
    for _ in range(25):
        n, d = 30, int(rng.integers(2, 9))
        z, z2 = rng.standard_normal((n, d)), rng.standard_normal((n, d))
        rot = oracles.random_orthogonal(rng, d)
        perm = rng.permutation(n)
        for m in REPRESENTATIONAL:
            assert repsim.compare(m, z, z @ rot) == pytest.approx(1, abs=1e-6)
            assert repsim.compare(m, z[perm], (z @ rot)[perm]) == pytest.approx(1, abs=1e-6)
            assert repsim.compare(m, z[perm], z2[perm]) == pytest.approx(repsim.compare(m, z, z2), abs=1e-6)
        c, shift = float(rng.uniform(0.01, 100)), rng.standard_normal(d) * 50
        assert repsim.distance_correlation(z, c * z + shift) == pytest.approx(1, abs=1e-8)
        assert repsim.distance_correlation(c * z + shift, z2) == pytest.approx(
            repsim.distance_correlation(z, z2), abs=1e-8)


# -- C4 --------------------------------------------------------------------


def _onehot(classes, c=3):
    return np.eye(c)[classes]


def test_c4_functional_fixtures(record_property):
    record_property("acceptance", "C4 functional fixtures exact; JSD 0.215762 (1e-6) and <= ln 2 on 10,000 rows")
    assert funcsim.hard_predictions([[0.2, 0.5, 0.3], [0.5, 0.5, 0.0], [1, 0, 0]]).tolist() == [1, 0, 0]
    o = _onehot([0, 1, 2, 0])
    assert funcsim.disagreement(o, o) == 0.0
    assert funcsim.disagreement(o, _onehot([1, 2, 0, 1])) == 1.0
    assert funcsim.disagreement(o, _onehot([0, 2, 2, 1])) == 0.5

    y10 = [0] * 10
    assert funcsim.error_rate(_onehot([1, 1] + [0] * 8), y10) == 0.2
    assert funcsim.error_rate(_onehot(y10), y10) == 0.0
    assert funcsim.error_rate(_onehot([2] * 10), y10) == 1.0
    # e1 = 0.2 (rows 0, 1), e2 = 0.3 (rows 0, 2, 3), disagreement on rows 1, 2, 3
    a = _onehot([1, 1, 0, 0, 0, 0, 0, 0, 0, 0])
    b = _onehot([1, 0, 1, 1, 0, 0, 0, 0, 0, 0])
    assert funcsim.disagreement(a, b) == pytest.approx(0.3)
    assert funcsim.minmax_normalized_disagreement(a, b, y10) == pytest.approx(0.5, abs=1e-15)
    assert funcsim.minmax_normalized_disagreement(a, a, y10) == 0.0
    with pytest.raises(DegenerateNormalizationError):
        funcsim.minmax_normalized_disagreement(_onehot(y10), _onehot(y10), y10)

    base = _onehot([0, 1, 2, 0])
    assert funcsim.stable_core([base, base, base]) == 1.0
    assert funcsim.stable_core([base, _onehot([0, 1, 1, 0]), base]) == 0.75
    assert funcsim.stable_core([base, base, _onehot([1, 2, 0, 1])]) == 0.0

    p = np.array([[0.1, 0.6, 0.3]])
    assert funcsim.mean_jsd(p, p) == 0.0
    assert funcsim.mean_jsd([[1.0, 0.0]], [[0.0, 1.0]]) == pytest.approx(math.log(2), abs=1e-9)
    want = 0.5 * math.log(4 / 3) + 0.5 * (0.5 * math.log(2 / 3) + 0.5 * math.log(2))
    got = funcsim.mean_jsd([[1.0, 0.0]], [[0.5, 0.5]])
    assert got == pytest.approx(0.215762, abs=1e-6)
    assert got == pytest.approx(want, abs=1e-9)

    rng = np.random.default_rng(404)
    worst = 0.0
    for i in range(10_000):
        c = int(rng.integers(2, 6))
        if i % 10 == 0:
            r1, r2 = np.eye(c)[rng.choice(c, 2, replace=False)]
        else:
            r1, r2 = rng.dirichlet(np.full(c, 0.2), size=2)
        worst = max(worst, funcsim.mean_jsd(r1[None], r2[None]))
    assert worst <= math.log(2)


# -- C5 --------------------------------------------------------------------


def _numeric_grad(w, b, x, y, l2, h=1e-6):
    def f(wv, bv):
        return loss_and_grad(wv, bv, x, y, l2)[0]
    gw, gb = np.zeros_like(w), np.zeros_like(b)
    for idx in np.ndindex(*w.shape):
        e = np.zeros_like(w)
        e[idx] = h
        gw[idx] = (f(w + e, b) - f(w - e, b)) / (2 * h)
    for i in range(len(b)):
        e = np.zeros_like(b)
        e[i] = h
        gb[i] = (f(w, b + e) - f(w, b - e)) / (2 * h)
    return gw, gb


def test_c5_classifier_correctness(record_property):
    record_property("acceptance", "C5 gradient rel. err < 1e-5 (20 instances); initial loss ln C; blobs reach 1.0")
    rng = np.random.default_rng(505)
    for _ in range(20):
        n, d, c = int(rng.integers(2, 21)), int(rng.integers(1, 6)), int(rng.integers(2, 5))
        x, y = rng.standard_normal((n, d)), rng.integers(0, c, n)
        w, b, l2 = rng.standard_normal((c, d)), rng.standard_normal(c), float(rng.uniform(0, 1))
        _, gw, gb = loss_and_grad(w, b, x, y, l2)
        nw, nb = _numeric_grad(w, b, x, y, l2)
        analytic, numeric = np.concatenate([gw.ravel(), gb]), np.concatenate([nw.ravel(), nb])
        assert np.linalg.norm(analytic - numeric) / max(np.linalg.norm(numeric), 1e-12) < 1e-5
        loss0, _, _ = loss_and_grad(np.zeros((c, d)), np.zeros(c), x, y, l2)
        assert abs(loss0 - math.log(c)) <= 1e-12

    x = np.vstack([rng.normal([-3, -3], 0.5, (50, 2)), rng.normal([3, 3], 0.5, (50, 2))])
    y = np.repeat([0, 1], 50)
    split = SplitSpec(np.ones(100, bool), np.zeros(100, bool), np.zeros(100, bool))
    model = train_logreg(x, y, split, TrainConfig(l2_strength=1e-4, max_epochs=200))
    assert accuracy(predict_proba(model, x), y) == 1.0


# -- C6 --------------------------------------------------------------------


def test_c6_spectral_oracle_sweep(record_property):
    record_property("acceptance", "C6 spectral SBM sweep: representational = 1 (1e-6), stable core = 1, < 2 min")
    cfg = load_config(CONFIGS / "sbm_spectral.json")
    assert cfg.dims == (4, 8, 16, 32) and cfg.runs_per_dim == 5 and cfg.method == "spectral"
    t0 = time.perf_counter()
    report = run_sweep(cfg)
    assert time.perf_counter() - t0 < 120
    for dim in cfg.dims:
        for m in REPRESENTATIONAL:
            assert report.value(m, dim) == pytest.approx(1, abs=1e-6)
        assert report.value("stable_core", dim) == 1.0


# -- C7 --------------------------------------------------------------------


@pytest.mark.slow
def test_c7_node2vec_protocol_shape(record_property, n2v_sweep):
    record_property("acceptance", "C7 node2vec_lite sweep: acc(64) >= acc(4), a measure varies > 0.02, < 5 min")
    path, seconds = n2v_sweep
    report = read_report(path)
    assert tuple(sorted({r.dim for r in report.rows})) == N2V_DIMS
    print(f"\nC7 sweep wall time: {seconds:.1f} s")
    assert seconds < 300
    acc = {dim: report.value("accuracy", dim) for dim in N2V_DIMS}
    print("C7 accuracy by dim:", acc)
    assert acc[64] >= acc[4]
    spreads = {}
    for m in REPRESENTATIONAL:
        values = [report.value(m, dim) for dim in N2V_DIMS]
        spreads[m] = max(values) - min(values)
    print("C7 representational spread across dims:", spreads)
    assert max(spreads.values()) > 0.02


# -- C8 --------------------------------------------------------------------


@pytest.mark.slow
def test_c8_determinism_and_thread_independence(record_property, n2v_sweep, tmp_path):
    record_property("acceptance", "C8 rerun and --workers 1 vs 8 give byte-identical CSV")
    first, _ = n2v_sweep
    assert _sweep_cli(CONFIGS / "sbm_demo.json", tmp_path / "rerun.csv", 1)[0] == 0
    assert _sweep_cli(CONFIGS / "sbm_demo.json", tmp_path / "workers8.csv", 8)[0] == 0
    assert (tmp_path / "rerun.csv").read_bytes() == first.read_bytes()
    assert (tmp_path / "workers8.csv").read_bytes() == first.read_bytes()


# -- C9 --------------------------------------------------------------------


@pytest.mark.slow
def test_c9_pair_count_arithmetic(record_property, n2v_sweep, tmp_path):
    record_property("acceptance", "C9 n = R(R-1)/2 on pairwise rows (45 at R=10, 435 at R=30)")
    report = read_report(n2v_sweep[0])
    for r in report.rows:
        if r.measure in PAIRWISE and not r.is_error:
            assert r.n == 45
        if r.measure == "stable_core":
            assert r.n == 1
    for m in REPRESENTATIONAL + ("disagreement", "jsd"):
        assert all(not r.is_error for r in report.select(m))

    out = tmp_path / "r30.csv"
    assert _sweep_cli(CONFIGS / "pair_count_r30.json", out, 1)[0] == 0
    r30 = read_report(out)
    assert load_config(CONFIGS / "pair_count_r30.json").runs_per_dim == 30
    pairwise = [r for r in r30.rows if r.measure in PAIRWISE]
    assert len(pairwise) == 2 * len(PAIRWISE)
    assert all(r.n == 435 for r in pairwise)
    assert [r.n for r in r30.select("stable_core")] == [1, 1]
