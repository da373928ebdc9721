"""Acceptance gate: one criterion per test, one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines. The
paper-scale end-to-end criterion needs the converted public dataset under
``data/`` (or ``$SD2E_DATA_DIR``) and is skipped with a visible marker when
the files are absent.
"""

import functools
import json
import math
import os
import time
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np
import pytest
import torch

from sd2e import em as em_mod
from sd2e.correction import Method, run_method
from sd2e.data import SynthConfig, generate_synthetic, load_csv
from sd2e.feedback import make_labels
from sd2e.geometry import encode_path
from sd2e.metrics import Metrics
from sd2e.pipeline import LoopConfig, run
from sd2e.regressor import RegressorConfig, SequenceRegressor
from sd2e.reports import ablation, robustness_table, sweep_n
from sd2e.service import handlers, schemas

DATA_DIR = Path(os.environ.get("SD2E_DATA_DIR", Path(__file__).resolve().parent.parent / "data"))
TRAIN_CSV = DATA_DIR / "chap22_train.csv"
TEST_CSV = DATA_DIR / "chap22_test.csv"


def criterion(name):
    """Emit exactly one `ACCEPTANCE PASS|FAIL|SKIP <name>` line per test."""

    def wrap(fn):
        @functools.wraps(fn)
        def inner(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except pytest.skip.Exception:
                print(f"\nACCEPTANCE SKIP {name}")
                raise
            except BaseException:
                print(f"\nACCEPTANCE FAIL {name}")
                raise
            print(f"\nACCEPTANCE PASS {name}")

        return inner

    return wrap


def round3(value: float) -> float:
    return float(Decimal(repr(value)).quantize(Decimal("0.001"), rounding=ROUND_HALF_UP))


@criterion("robustness-table")
def test_robustness_table():
    # 25 x 15 box, N = 0..6: every printed radius reproduced at 3 decimals
    # (the reference combines the already-rounded per-axis radii into r_xy)
    expected = [
        (0, 25.000, 15.000, 29.155),
        (1, 12.500, 7.500, 14.577),
        (2, 6.250, 3.750, 7.289),
        (3, 3.125, 1.875, 3.644),
        (4, 1.563, 0.938, 1.823),
        (5, 0.781, 0.469, 0.911),
        (6, 0.391, 0.234, 0.456),
    ]
    t0 = time.perf_counter()
    rows = robustness_table(25.0, 15.0, 6)
    elapsed = time.perf_counter() - t0
    assert len(rows) == 7
    for row, (n, rx, ry, rxy) in zip(rows, expected):
        assert row["N"] == n
        assert round3(row["r_x"]) == rx
        assert round3(row["r_y"]) == ry
        assert round3(math.hypot(round3(row["r_x"]), round3(row["r_y"]))) == rxy
    assert elapsed < 1.0


@criterion("rmse-identity")
def test_rmse_aggregation_identity():
    # published per-axis pair combines to the published XY value
    assert abs(math.hypot(4.569, 2.974) - 5.452) <= 1e-3
    rng = np.random.default_rng(0)
    for _ in range(1000):
        rx, ry = rng.uniform(0, 100, size=2)
        assert Metrics.combine(rx, ry).rmse_xy == math.hypot(rx, ry)


@criterion("correction-guarantee")
def test_correction_guarantee():
    t0 = time.perf_counter()
    ds, _ = generate_synthetic(SynthConfig(sample_count=2000, seed=0))
    rng = np.random.default_rng(1)
    for n in range(1, 9):
        labels = make_labels(ds.positions, n)
        for axis in (0, 1):
            root = labels.root_for_axis(axis)
            preds = rng.uniform(root.min, root.max, size=2000)
            corrected, trace = run_method(preds, None, labels, axis, Method.GLOBAL, n)
            degen = {s for _, s in trace.degenerate}
            truth = ds.positions[:, axis]
            bound = root.extent / 2**n + 1e-12
            keep = np.setdiff1d(np.arange(2000), sorted(degen))
            assert np.all(np.abs(corrected[keep] - truth[keep]) <= bound)
            bits = labels.bits_for_axis(axis)
            for k in keep[:: max(1, len(keep) // 200)]:
                assert encode_path(corrected[k], root, n).bits == tuple(bits[k])
    assert time.perf_counter() - t0 < 10.0


def _dense_posterior(features, params):
    k = features.shape[0]
    obs_prec = float(np.sum(params.a**2 / params.obs_noise))
    proj = (features - params.mu) @ (params.a / params.obs_noise)
    prec = np.zeros((k, k))
    lin = np.zeros(k)
    prec[0, 0] += 1.0 / params.p0
    lin[0] += params.z0 / params.p0
    w = 1.0 / params.state_noise
    for i in range(1, k):
        prec[i, i] += w
        prec[i - 1, i - 1] += w
        prec[i, i - 1] -= w
        prec[i - 1, i] -= w
    prec += np.eye(k) * obs_prec
    means = np.linalg.solve(prec, lin + proj)
    variances = np.diag(np.linalg.inv(prec))
    return means, variances


@criterion("em-oracle")
def test_em_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    for _ in range(50):
        k = int(rng.integers(2, 9))
        d = int(rng.integers(1, 4))
        features = rng.normal(size=(k, d))
        params = em_mod.SSMParams(
            a=rng.normal(size=d),
            mu=rng.normal(size=d),
            state_noise=float(rng.uniform(0.2, 3.0)),
            obs_noise=rng.uniform(0.3, 2.0, size=d),
            z0=float(rng.normal()),
            p0=float(rng.uniform(0.5, 5.0)),
        )
        post = em_mod.e_step(features, params)
        means, variances = _dense_posterior(features, params)
        np.testing.assert_allclose(post.means, means, atol=1e-8)
        np.testing.assert_allclose(post.variances, variances, atol=1e-8)

    hits = 0
    for seed in range(10):
        ds, truth = generate_synthetic(SynthConfig(seed=seed))
        result = em_mod.run_em(ds.features, em_mod.default_params(42), 8)
        if abs(np.corrcoef(result.posterior.means, truth[:, 0])[0, 1]) >= 0.9:
            hits += 1
    assert hits >= 9, f"only {hits}/10 seeds reached |corr| >= 0.9"
    assert time.perf_counter() - t0 < 30.0


@criterion("gradient-check")
def test_gradient_check():
    t0 = time.perf_counter()
    step = 1e-5
    rng = np.random.default_rng(7)
    for trial in range(20):
        torch.manual_seed(trial)
        model = SequenceRegressor(3, 4, 2)
        seq = torch.from_numpy(rng.normal(size=(2, 5, 3)))
        tgt = torch.from_numpy(rng.normal(size=(2, 5)))

        def loss_value():
            return ((model(seq) - tgt) ** 2).mean()

        loss_value().backward()
        params = list(model.parameters())
        p = params[trial % len(params)]
        flat = p.detach().view(-1)
        idx = int(rng.integers(flat.numel()))
        analytic = float(p.grad.view(-1)[idx])
        with torch.no_grad():
            orig = float(flat[idx])
            flat[idx] = orig + step
            up = float(loss_value())
            flat[idx] = orig - step
            down = float(loss_value())
            flat[idx] = orig
        numeric = (up - down) / (2 * step)
        scale = max(abs(analytic), abs(numeric), 1e-8)
        assert abs(analytic - numeric) / scale <= 1e-4
    assert time.perf_counter() - t0 < 10.0


@criterion("sweep-shape")
def test_sweep_shape():
    t0 = time.perf_counter()
    train, _ = generate_synthetic(SynthConfig(seed=0))
    test, _ = generate_synthetic(SynthConfig(seed=0, trajectory_seed=1))
    cfg = LoopConfig(
        mode="closed",
        outer_iterations=2,
        em_iterations=4,
        lookback=10,
        regressor=RegressorConfig(kind="linear", seed=0),
        seed=0,
    )
    rows = {r["N"]: r for r in sweep_n(train, test, cfg, 3)}
    assert all(rows[n]["error"] == "" for n in range(4))
    e0 = rows[0]["train_corrected_rmse_xy"]
    e1 = rows[1]["train_corrected_rmse_xy"]
    e3 = rows[3]["train_corrected_rmse_xy"]
    assert e1 <= 0.7 * e0, f"N=1 {e1:.3f} vs 0.7*N=0 {0.7 * e0:.3f}"
    assert e3 <= e1, f"N=3 {e3:.3f} vs N=1 {e1:.3f}"
    assert time.perf_counter() - t0 < 120.0


@criterion("paper-scale-end-to-end")
def test_paper_scale_end_to_end():
    if not (TRAIN_CSV.exists() and TEST_CSV.exists()):
        pytest.skip(
            f"SKIPPED: converted dataset not found at {TRAIN_CSV} / {TEST_CSV}; "
            "run the frontend converter on the public .mat files first"
        )
    train = load_csv(TRAIN_CSV)
    test = load_csv(TEST_CSV)
    assert train.features.shape == (3103, 42)
    cfg = LoopConfig(
        mode="closed",
        method=Method.GLOBAL,
        n_levels=3,
        outer_iterations=8,
        lookback=10,
        regressor=RegressorConfig(kind="recurrent", hidden_size=70, layer_count=3, seed=0),
        seed=0,
    )
    t0 = time.perf_counter()
    report = run(train, test, cfg)
    rows = {r["algorithm"]: r for r in ablation(train, test, cfg)}
    elapsed = time.perf_counter() - t0
    un_em = rows["Un-EM"]["test_rmse_xy"]
    print(f"test RMSE(XY) = {report.test.rmse_xy:.3f}, Un-EM = {un_em:.3f}, {elapsed:.0f}s")
    assert report.test.rmse_xy <= 4.6
    assert report.test.rmse_xy < un_em
    assert (
        rows["full(G)"]["test_rmse_xy"]
        < rows["Un-EM&SD(G)"]["test_rmse_xy"]
        < rows["Un-EM&Exploitation"]["test_rmse_xy"]
        < un_em
    )
    assert elapsed <= 30 * 60


@criterion("cost-structure-counters")
def test_cost_structure_counters():
    train, _ = generate_synthetic(SynthConfig(sample_count=400, feature_dim=12, seed=0))
    test, _ = generate_synthetic(
        SynthConfig(sample_count=300, feature_dim=12, seed=0, trajectory_seed=1)
    )
    base = dict(
        n_levels=2, em_iterations=2, lookback=3,
        regressor=RegressorConfig(kind="linear", seed=0), seed=0,
    )
    closed = run(train, test, LoopConfig(mode="closed", outer_iterations=3, **base))
    for c in closed.counters.values():
        assert c.exploitation_trainings == 3
        assert c.sd_passes == 3
    open_rep = run(train, test, LoopConfig(mode="open", **base))
    for c in open_rep.counters.values():
        assert c.exploitation_trainings == 1
        assert c.sd_passes == 1
    for rep in (closed, open_rep):
        print(
            f"{rep.mode}: predicted {rep.cost.predicted_total:.4f}s "
            f"vs measured {rep.cost.measured_total:.4f}s"
        )
        assert rep.cost.predicted_total == pytest.approx(rep.cost.measured_total, rel=1e-6)


@criterion("decode-determinism")
def test_decode_determinism():
    req = schemas.DecodeRequest(
        data=schemas.DatasetSource(
            synthetic=schemas.SynthRequest(sample_count=300, feature_dim=12, seed=0)
        ),
        n_levels=2,
        outer_iterations=2,
        em_iterations=2,
        lookback=3,
        regressor=schemas.RegressorOptions(kind="linear"),
    )
    j1 = handlers.decode(req).to_json()
    j2 = handlers.decode(req).to_json()
    assert j1 == j2
    json.loads(j1)  # well-formed


@criterion("converter-round-trip")
def test_converter_round_trip():
    # [SECONDARY] the frontend converter's own suite checks byte-identical
    # idempotence; here the converted artifact is validated against the
    # published shape when present
    if not TRAIN_CSV.exists():
        pytest.skip(
            f"SKIPPED: converted dataset not found at {TRAIN_CSV}; "
            "run the frontend converter on the public .mat files first"
        )
    ds = load_csv(TRAIN_CSV)
    assert ds.features.shape == (3103, 42)
    assert ds.positions.shape == (3103, 2)
