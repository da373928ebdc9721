"""HTTP surface of the decoder: FastAPI app wrapping the core package."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from ..errors import ConfigError, DataError, InputError, NumericalError, Sd2eError
from . import handlers, schemas

app = FastAPI(title="sd2e decode service", version="0.1.0")


def _http_error(exc: Sd2eError) -> HTTPException:
    if isinstance(exc, (ConfigError, InputError)):
        return HTTPException(status_code=422, detail=str(exc))
    if isinstance(exc, DataError):
        return HTTPException(status_code=400, detail=str(exc))
    if isinstance(exc, NumericalError):
        return HTTPException(status_code=500, detail=str(exc))
    return HTTPException(status_code=500, detail=str(exc))


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/robustness", response_model=schemas.RobustnessResponse)
def robustness(req: schemas.RobustnessRequest):
    try:
        return handlers.robustness(req)
    except Sd2eError as exc:
        raise _http_error(exc) from exc


@app.post("/rmse", response_model=schemas.RmseResponse)
def rmse(req: schemas.RmseRequest):
    try:
        return handlers.rmse_handler(req)
    except Sd2eError as exc:
        raise _http_error(exc) from exc


@app.post("/decode", response_model=schemas.DecodeResponse)
def decode(req: schemas.DecodeRequest):
    try:
        report = handlers.decode(req)
    except Sd2eError as exc:
        raise _http_error(exc) from exc
    return schemas.DecodeResponse(report=report.to_dict())


@app.post("/sweep", response_model=schemas.SweepResponse)
def sweep(req: schemas.SweepRequest):
    try:
        return schemas.SweepResponse(rows=handlers.sweep(req))
    except Sd2eError as exc:
        raise _http_error(exc) from exc


@app.post("/ablate", response_model=schemas.AblationResponse)
def ablate(req: schemas.AblationRequest):
    try:
        return schemas.AblationResponse(rows=handlers.ablate(req))
    except Sd2eError as exc:
        raise _http_error(exc) from exc
