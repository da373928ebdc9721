"""Open- and closed-loop orchestration of exploration, correction, exploitation.

Open loop: the exploration self-iterates to convergence, the space-division
correction runs once, and the exploitation trains once per axis.

Closed loop: per outer iteration, one exploration e/m cycle runs, the
correction and exploitation follow, and the exploitation's training-set
predictions replace the posterior means in the next weight update (the last
smoothed variances are carried along, as the only covariance available).

X and Y axes run as fully independent pipelines over the same windowed
features.
"""

from __future__ import annotations

import csv
import json
import time
import uuid
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import em as em_mod
from .correction import CorrectionTrace, LocalEmConfig, Method, run_method
from .errors import ConfigError
from .data import Dataset
from .feedback import ViFLabels, make_labels
from .metrics import Metrics, rmse
from .regressor import RegressorConfig, TrainedRegressor, WindowedDataset, build_windows, predict, train


@dataclass
class LoopConfig:
    mode: str = "closed"            # "open" or "closed"
    method: Method = Method.GLOBAL
    n_levels: int = 3
    outer_iterations: int = 8       # n1; ignored (forced to 1) in open mode
    em_iterations: int = 8          # n2, the exploration's self-iterations
    lookback: int = 10
    denom_variant: str = "ols"
    em_state_noise: float = 2.0
    em_z0: float = 10.0
    em_p0: float = 10.0
    regressor: RegressorConfig = field(default_factory=RegressorConfig)
    local_em: LocalEmConfig = field(default_factory=LocalEmConfig)
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("open", "closed"):
            raise ConfigError(f"mode must be 'open' or 'closed', got {self.mode!r}")
        if isinstance(self.method, str):
            self.method = Method(self.method)
        if self.outer_iterations < 1 or self.em_iterations < 1:
            raise ConfigError("iteration counts must be >= 1")
        if self.n_levels < 0:
            raise ConfigError("n_levels must be >= 0")


@dataclass
class AxisCounters:
    em_iterations: int = 0
    local_em_runs: int = 0
    sd_passes: int = 0
    exploitation_trainings: int = 0
    regions_processed: int = 0
    t_explore: float = 0.0
    t_sd: float = 0.0
    t_exploit: float = 0.0


@dataclass
class CostModel:
    """Invocation counts and mean stage durations, plus the closed-form total.

    n1/n2/n3 mirror the run's structure: in the open loop n1 is the number of
    exploration iterations and n2/n3 count whole exploitation trainings and
    space-division passes; in the closed loop n1 is the outer iteration count
    and n2/n3 are the per-outer-iteration unit counts.
    """

    n1: int
    n2: int
    n3: int
    t1: float
    t2: float
    t3: float
    predicted_total: float
    measured_total: float


@dataclass
class AxisResult:
    uncorrected: np.ndarray
    corrected: np.ndarray
    test_pred: np.ndarray
    trace: CorrectionTrace
    counters: AxisCounters
    model: TrainedRegressor


@dataclass
class RunReport:
    mode: str
    method: str
    n_levels: int
    seed: int
    uncorrected_train: Metrics
    corrected_train: Metrics
    test: Metrics
    traces: dict
    counters: dict
    cost: CostModel
    config: dict
    run_id: str = ""

    def to_dict(self, include_timing: bool = False) -> dict:
        """Deterministic report payload; wall-clock fields are opt-in."""
        out = {
            "mode": self.mode,
            "method": self.method,
            "n_levels": self.n_levels,
            "seed": self.seed,
            "uncorrected_train": self.uncorrected_train.as_dict(),
            "corrected_train": self.corrected_train.as_dict(),
            "test": self.test.as_dict(),
            "traces": self.traces,
            "counters": {
                axis: {
                    k: v
                    for k, v in asdict(c).items()
                    if include_timing or not k.startswith("t_")
                }
                for axis, c in self.counters.items()
            },
            "config": self.config,
        }
        cost = asdict(self.cost)
        if not include_timing:
            cost = {k: cost[k] for k in ("n1", "n2", "n3")}
        out["cost"] = cost
        return out

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing=include_timing), sort_keys=True, indent=2) + "\n"


def _axis_regressor_config(cfg: LoopConfig, axis: int) -> RegressorConfig:
    rc = RegressorConfig(**asdict(cfg.regressor))
    rc.seed = cfg.regressor.seed + cfg.seed + axis
    return rc


def _trace_summary(trace: CorrectionTrace, truth: np.ndarray) -> dict:
    return {
        "flips": list(trace.flips),
        "level_rmse": [rmse(v, truth) for v in trace.level_values],
        "degenerate": [[int(a), int(b)] for a, b in trace.degenerate],
        "empty_regions": [[int(a), b] for a, b in trace.empty_regions],
        "em_calls": trace.em_calls,
        "regions_processed": trace.regions_processed,
    }


def _run_axis(
    windows: np.ndarray,
    test_windows: np.ndarray,
    truth_axis: np.ndarray,
    labels: ViFLabels,
    axis: int,
    cfg: LoopConfig,
) -> AxisResult:
    counters = AxisCounters()
    dim = windows.shape[1]
    init = em_mod.default_params(dim, state_noise=cfg.em_state_noise, z0=cfg.em_z0, p0=cfg.em_p0)
    reg_cfg = _axis_regressor_config(cfg, axis)

    def correct(preds):
        t0 = time.perf_counter()
        corrected, trace = run_method(
            preds, windows, labels, axis, cfg.method, cfg.n_levels, cfg.local_em
        )
        counters.t_sd += time.perf_counter() - t0
        counters.sd_passes += 1
        counters.local_em_runs += trace.em_calls
        counters.regions_processed += trace.regions_processed
        return corrected, trace

    def exploit(corrected) -> TrainedRegressor:
        t0 = time.perf_counter()
        model = train(WindowedDataset(windows, corrected, cfg.lookback), reg_cfg)
        counters.t_exploit += time.perf_counter() - t0
        counters.exploitation_trainings += 1
        return model

    if cfg.mode == "open":
        t0 = time.perf_counter()
        emrun = em_mod.run_em(windows, init, cfg.em_iterations, variant=cfg.denom_variant)
        counters.t_explore += time.perf_counter() - t0
        counters.em_iterations += emrun.e_steps
        uncorrected = emrun.posterior.means
        corrected, trace = correct(uncorrected)
        model = exploit(corrected)
    else:
        params = init
        feedback_means = None
        uncorrected = None
        corrected = trace = model = None
        for _ in range(cfg.outer_iterations):
            t0 = time.perf_counter()
            posterior = em_mod.e_step(windows, params)
            z_hat = posterior.means if feedback_means is None else feedback_means
            a_new, mu_new = em_mod.m_step(
                windows,
                em_mod.Posterior(means=z_hat, variances=posterior.variances),
                variant=cfg.denom_variant,
            )
            params = em_mod.set_weights(params, a_new, mu_new)
            counters.t_explore += time.perf_counter() - t0
            counters.em_iterations += 1
            uncorrected = posterior.means
            corrected, trace = correct(uncorrected)
            model = exploit(corrected)
            feedback_means = predict(model, windows)

    test_pred = predict(model, test_windows)
    return AxisResult(
        uncorrected=uncorrected,
        corrected=corrected,
        test_pred=test_pred,
        trace=trace,
        counters=counters,
        model=model,
    )


def cost_report(counters: dict, mode: str) -> CostModel:
    """Fill the cost model from the per-axis counters and stage timers."""
    total_em = sum(c.em_iterations for c in counters.values())
    total_sd = sum(c.sd_passes for c in counters.values())
    total_tr = sum(c.exploitation_trainings for c in counters.values())
    t_explore = sum(c.t_explore for c in counters.values())
    t_sd = sum(c.t_sd for c in counters.values())
    t_exploit = sum(c.t_exploit for c in counters.values())
    measured = t_explore + t_sd + t_exploit

    axes = max(len(counters), 1)
    t1 = t_explore / total_em if total_em else 0.0
    t2 = t_exploit / total_tr if total_tr else 0.0
    t3 = t_sd / total_sd if total_sd else 0.0
    if mode == "open":
        # n1 = exploration iterations per axis; one training and one SD pass each.
        n1, n2, n3 = total_em // axes, total_tr // axes, total_sd // axes
        predicted = (t1 * n1 + t2 * n2 + t3 * n3) * axes
    else:
        # n1 = outer iterations per axis; one of each unit inside every iteration.
        n1 = total_tr // axes
        n2 = total_tr // (n1 * axes) if n1 else 0
        n3 = total_sd // (n1 * axes) if n1 else 0
        predicted = (t1 + t2 * n2 + t3 * n3) * n1 * axes
    return CostModel(
        n1=n1, n2=n2, n3=n3, t1=t1, t2=t2, t3=t3,
        predicted_total=predicted, measured_total=measured,
    )


def run(train_set: Dataset, test_set: Dataset, cfg: LoopConfig) -> RunReport:
    """Execute one full decode (both axes) and assemble the report."""
    labels = make_labels(train_set.positions, cfg.n_levels)
    windows = build_windows(
        train_set.features, train_set.positions[:, 0], cfg.lookback
    ).inputs
    test_windows = build_windows(
        test_set.features, test_set.positions[:, 0], cfg.lookback
    ).inputs

    results = {}
    for axis, name in ((0, "x"), (1, "y")):
        results[name] = _run_axis(
            windows, test_windows, train_set.positions[:, axis], labels, axis, cfg
        )

    def metrics_of(attr, positions):
        vals = []
        for axis, name in ((0, "x"), (1, "y")):
            pred = getattr(results[name], attr)
            vals.append(rmse(pred, positions[:, axis]))
        return Metrics.combine(*vals)

    uncorr = metrics_of("uncorrected", train_set.positions)
    corr = metrics_of("corrected", train_set.positions)
    test_m = metrics_of("test_pred", test_set.positions)

    counters = {name: results[name].counters for name in ("x", "y")}
    traces = {
        name: _trace_summary(results[name].trace, train_set.positions[:, axis])
        for axis, name in ((0, "x"), (1, "y"))
    }
    cfg_dict = asdict(cfg)
    cfg_dict["method"] = cfg.method.value
    return RunReport(
        mode=cfg.mode,
        method=cfg.method.value,
        n_levels=cfg.n_levels,
        seed=cfg.seed,
        uncorrected_train=uncorr,
        corrected_train=corr,
        test=test_m,
        traces=traces,
        counters=counters,
        cost=cost_report(counters, cfg.mode),
        config=cfg_dict,
        run_id=uuid.uuid4().hex,
    )


def run_open_loop(train_set: Dataset, test_set: Dataset, cfg: LoopConfig) -> RunReport:
    if cfg.mode != "open":
        raise ConfigError("run_open_loop requires cfg.mode == 'open'")
    return run(train_set, test_set, cfg)


def run_closed_loop(train_set: Dataset, test_set: Dataset, cfg: LoopConfig) -> RunReport:
    if cfg.mode != "closed":
        raise ConfigError("run_closed_loop requires cfg.mode == 'closed'")
    return run(train_set, test_set, cfg)


LEDGER_FIELDS = [
    "run_id", "timestamp", "mode", "method", "n_levels", "n1",
    "train_uncorr_rmse_x", "train_uncorr_rmse_y", "train_uncorr_rmse_xy",
    "train_corr_rmse_x", "train_corr_rmse_y", "train_corr_rmse_xy",
    "test_rmse_x", "test_rmse_y", "test_rmse_xy",
    "t1", "t2", "t3",
]


def append_ledger(report: RunReport, path) -> None:
    """One-row CSV append to the results ledger (timestamped, not deterministic)."""
    path = Path(path)
    new_file = not path.exists()
    with open(path, "a", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=LEDGER_FIELDS, lineterminator="\n")
        if new_file:
            writer.writeheader()
        writer.writerow({
            "run_id": report.run_id,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
            "mode": report.mode,
            "method": report.method,
            "n_levels": report.n_levels,
            "n1": report.cost.n1,
            "train_uncorr_rmse_x": report.uncorrected_train.rmse_x,
            "train_uncorr_rmse_y": report.uncorrected_train.rmse_y,
            "train_uncorr_rmse_xy": report.uncorrected_train.rmse_xy,
            "train_corr_rmse_x": report.corrected_train.rmse_x,
            "train_corr_rmse_y": report.corrected_train.rmse_y,
            "train_corr_rmse_xy": report.corrected_train.rmse_xy,
            "test_rmse_x": report.test.rmse_x,
            "test_rmse_y": report.test.rmse_y,
            "test_rmse_xy": report.test.rmse_xy,
            "t1": report.cost.t1,
            "t2": report.cost.t2,
            "t3": report.cost.t3,
        })
