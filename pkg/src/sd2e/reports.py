"""Table and sweep generation over the decode pipeline.

Everything returns plain row dicts ready for tidy CSV/JSON emission; no
plotting is embedded.
"""

from __future__ import annotations

import copy
from dataclasses import asdict

import numpy as np

from . import em as em_mod
from .correction import Method, run_method
from .data import Dataset
from .errors import InputError, Sd2eError
from .feedback import make_labels
from .geometry import AxisBounds, fault_tolerance
from .metrics import Metrics, rmse
from .pipeline import LoopConfig, RunReport, run
from .regressor import build_windows


def robustness_table(length: float, width: float, n_max: int) -> list[dict]:
    """Closed-form fault-tolerance radii for N = 0..n_max."""
    if length <= 0 or width <= 0:
        raise InputError("box extents must be positive")
    root_x = AxisBounds(0.0, length)
    root_y = AxisBounds(0.0, width)
    rows = []
    for n in range(n_max + 1):
        ft = fault_tolerance(root_x, root_y, n)
        rows.append({"N": n, "r_x": ft.r_x, "r_y": ft.r_y, "r_xy": ft.r_xy})
    return rows


def sweep_n(train_set: Dataset, test_set: Dataset, cfg: LoopConfig, n_max: int) -> list[dict]:
    """Run the configured loop at every N = 0..n_max with the same seed.

    Per-N failures are recorded in the row and the sweep continues.
    """
    rows = []
    for n in range(n_max + 1):
        cfg_n = copy.deepcopy(cfg)
        cfg_n.n_levels = n
        row = {"N": n}
        try:
            report = run(train_set, test_set, cfg_n)
            row.update({
                "train_corrected_rmse_xy": report.corrected_train.rmse_xy,
                "train_corrected_rmse_x": report.corrected_train.rmse_x,
                "train_corrected_rmse_y": report.corrected_train.rmse_y,
                "test_rmse_xy": report.test.rmse_xy,
                "test_rmse_x": report.test.rmse_x,
                "test_rmse_y": report.test.rmse_y,
                "error": "",
            })
        except Sd2eError as exc:
            row["error"] = str(exc)
        rows.append(row)
    return rows


def _em_means(windows: np.ndarray, cfg: LoopConfig) -> np.ndarray:
    init = em_mod.default_params(
        windows.shape[1], state_noise=cfg.em_state_noise, z0=cfg.em_z0, p0=cfg.em_p0
    )
    return em_mod.run_em(windows, init, cfg.em_iterations, variant=cfg.denom_variant).posterior.means


def _per_axis_metrics(preds_by_axis, positions) -> Metrics:
    return Metrics.combine(
        rmse(preds_by_axis[0], positions[:, 0]),
        rmse(preds_by_axis[1], positions[:, 1]),
    )


ABLATION_ROWS = [
    "Un-EM",
    "Un-EM&Exploitation",
    "Un-EM&SD(L)",
    "Un-EM&SD(G)",
    "full(L)",
    "full(G)",
]


def ablation(train_set: Dataset, test_set: Dataset, cfg: LoopConfig) -> list[dict]:
    """Six-pipeline ablation with a shared seed.

    Un-EM rows score raw exploration posterior means; SD rows score corrected
    exploration outputs (no exploitation). Because the evaluation protocol of
    the intermediate rows is underdetermined, both a train-set column and a
    test-set column (test-side EM/correction) are emitted.
    """
    train_windows = build_windows(train_set.features, train_set.positions[:, 0], cfg.lookback).inputs
    test_windows = build_windows(test_set.features, test_set.positions[:, 0], cfg.lookback).inputs
    train_labels = make_labels(train_set.positions, cfg.n_levels)
    test_labels = make_labels(test_set.positions, cfg.n_levels)

    em_train = {a: _em_means(train_windows, cfg) for a in (0, 1)}
    em_test = {a: _em_means(test_windows, cfg) for a in (0, 1)}

    def corrected(method):
        tr = {
            a: run_method(em_train[a], train_windows, train_labels, a, method, cfg.n_levels, cfg.local_em)[0]
            for a in (0, 1)
        }
        te = {
            a: run_method(em_test[a], test_windows, test_labels, a, method, cfg.n_levels, cfg.local_em)[0]
            for a in (0, 1)
        }
        return tr, te

    rows = []

    def add(name, train_metrics, test_metrics):
        rows.append({
            "algorithm": name,
            "train_rmse_x": train_metrics.rmse_x,
            "train_rmse_y": train_metrics.rmse_y,
            "train_rmse_xy": train_metrics.rmse_xy,
            "test_rmse_x": test_metrics.rmse_x,
            "test_rmse_y": test_metrics.rmse_y,
            "test_rmse_xy": test_metrics.rmse_xy,
        })

    add(
        "Un-EM",
        _per_axis_metrics(em_train, train_set.positions),
        _per_axis_metrics(em_test, test_set.positions),
    )

    cfg0 = copy.deepcopy(cfg)
    cfg0.n_levels = 0
    rep0 = run(train_set, test_set, cfg0)
    add("Un-EM&Exploitation", rep0.corrected_train, rep0.test)

    for method, tag in ((Method.LOCAL, "L"), (Method.GLOBAL, "G")):
        tr, te = corrected(method)
        add(
            f"Un-EM&SD({tag})",
            _per_axis_metrics(tr, train_set.positions),
            _per_axis_metrics(te, test_set.positions),
        )

    for method, tag in ((Method.LOCAL, "L"), (Method.GLOBAL, "G")):
        cfg_full = copy.deepcopy(cfg)
        cfg_full.method = method
        rep = run(train_set, test_set, cfg_full)
        add(f"full({tag})", rep.corrected_train, rep.test)

    return rows


def correction_table(reports: list[RunReport]) -> list[dict]:
    """Uncorrected/corrected train and test RMSE(XY) per run, plus the mean row."""
    if not reports:
        raise InputError("need at least one report")
    rows = []
    for rep in reports:
        rows.append({
            "run": f"{rep.mode}/{rep.method}/N={rep.n_levels}",
            "uncorrected_train_xy": rep.uncorrected_train.rmse_xy,
            "corrected_train_xy": rep.corrected_train.rmse_xy,
            "test_xy": rep.test.rmse_xy,
        })
    rows.append({
        "run": "mean",
        "uncorrected_train_xy": float(np.mean([r["uncorrected_train_xy"] for r in rows])),
        "corrected_train_xy": float(np.mean([r["corrected_train_xy"] for r in rows])),
        "test_xy": float(np.mean([r["test_xy"] for r in rows])),
    })
    return rows


def config_echo(cfg: LoopConfig) -> dict:
    d = asdict(cfg)
    d["method"] = cfg.method.value
    return d
