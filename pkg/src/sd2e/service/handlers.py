"""Request handlers shared by the HTTP app and the in-process CLI client."""

from __future__ import annotations

from .. import reports
from ..data import Dataset, SynthConfig, experiment_split, generate_synthetic, load_csv
from ..errors import ConfigError
from ..metrics import rmse
from ..pipeline import LoopConfig, RunReport, run
from ..regressor import RegressorConfig
from . import schemas


def robustness(req: schemas.RobustnessRequest) -> schemas.RobustnessResponse:
    rows = reports.robustness_table(req.length, req.width, req.n_max)
    return schemas.RobustnessResponse(rows=[schemas.RobustnessRow(**r) for r in rows])


def rmse_handler(req: schemas.RmseRequest) -> schemas.RmseResponse:
    return schemas.RmseResponse(rmse=rmse(req.pred, req.truth))


def synth_config(req: schemas.SynthRequest) -> SynthConfig:
    return SynthConfig(
        sample_count=req.sample_count,
        feature_dim=req.feature_dim,
        trajectory=req.trajectory,
        tuning=req.tuning,
        noise_sd=req.noise_sd,
        poisson=req.poisson,
        seed=req.seed,
    )


def resolve_datasets(src: schemas.DatasetSource) -> tuple[Dataset, Dataset]:
    if src.synthetic is not None:
        cfg = synth_config(src.synthetic)
        train_ds, _ = generate_synthetic(cfg)
        test_seed = src.synthetic_test_seed
        if test_seed is None:
            test_seed = cfg.seed + 1
        # Same neuron ensemble, fresh trajectory for the held-out set.
        test_cfg = synth_config(src.synthetic)
        test_cfg.trajectory_seed = test_seed
        test_ds, _ = generate_synthetic(test_cfg)
        return train_ds, test_ds
    if not (src.train_csv and src.test_csv):
        raise ConfigError("need either a synthetic config or both train_csv and test_csv")
    d1 = load_csv(src.train_csv)
    d2 = load_csv(src.test_csv)
    return experiment_split(d1, d2, src.experiment)


def loop_config(req: schemas.DecodeRequest) -> LoopConfig:
    reg = RegressorConfig(
        kind=req.regressor.kind,
        hidden_size=req.regressor.hidden_size,
        layer_count=req.regressor.layer_count,
        learning_rate=req.regressor.learning_rate,
        max_epochs=req.regressor.max_epochs,
        eval_period=req.regressor.eval_period,
        standardize=req.regressor.standardize,
        seed=req.seed,
    )
    return LoopConfig(
        mode=req.mode,
        method=req.method,
        n_levels=req.n_levels,
        outer_iterations=req.outer_iterations,
        em_iterations=req.em_iterations,
        lookback=req.lookback,
        denom_variant=req.denom_variant,
        regressor=reg,
        seed=req.seed,
    )


def decode(req: schemas.DecodeRequest) -> RunReport:
    train_ds, test_ds = resolve_datasets(req.data)
    return run(train_ds, test_ds, loop_config(req))


def sweep(req: schemas.SweepRequest) -> list[dict]:
    train_ds, test_ds = resolve_datasets(req.data)
    return reports.sweep_n(train_ds, test_ds, loop_config(req), req.n_max)


def ablate(req: schemas.AblationRequest) -> list[dict]:
    train_ds, test_ds = resolve_datasets(req.data)
    return reports.ablation(train_ds, test_ds, loop_config(req))
