"""Pydantic request/response models for the decode service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class RobustnessRequest(BaseModel):
    length: float = Field(25.0, gt=0, description="active-space extent on X")
    width: float = Field(15.0, gt=0, description="active-space extent on Y")
    n_max: int = Field(6, ge=0)


class RobustnessRow(BaseModel):
    N: int
    r_x: float
    r_y: float
    r_xy: float


class RobustnessResponse(BaseModel):
    rows: list[RobustnessRow]


class RmseRequest(BaseModel):
    pred: list[float]
    truth: list[float]


class RmseResponse(BaseModel):
    rmse: float


class SynthRequest(BaseModel):
    sample_count: int = 1000
    feature_dim: int = 42
    trajectory: str = "smooth-random-walk"
    tuning: str = "cosine"
    noise_sd: float = 1.0
    poisson: bool = False
    seed: int = 0


class DatasetSource(BaseModel):
    """Either a pair of CSV paths on the server or a synthetic config."""

    train_csv: str | None = None
    test_csv: str | None = None
    experiment: str = "A"
    synthetic: SynthRequest | None = None
    synthetic_test_seed: int | None = None


class RegressorOptions(BaseModel):
    kind: str = "recurrent"
    hidden_size: int = 70
    layer_count: int = 3
    learning_rate: float = 0.02
    max_epochs: int = 1000
    eval_period: int = 10
    standardize: bool = True


class DecodeRequest(BaseModel):
    data: DatasetSource
    mode: str = "closed"
    method: str = "global"
    n_levels: int = 3
    outer_iterations: int = 8
    em_iterations: int = 8
    lookback: int = 10
    denom_variant: str = "ols"
    seed: int = 0
    regressor: RegressorOptions = RegressorOptions()


class DecodeResponse(BaseModel):
    report: dict


class SweepRequest(DecodeRequest):
    n_max: int = 6


class SweepResponse(BaseModel):
    rows: list[dict]


class AblationRequest(DecodeRequest):
    pass


class AblationResponse(BaseModel):
    rows: list[dict]
