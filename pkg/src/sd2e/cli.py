"""Command-line surface: a thin client over the service handlers.

Every subcommand builds the same request models the HTTP API accepts and
either executes them in-process (default) or forwards them to a running
service instance (``--server http://...``). Exit codes: 0 success, 2 config
error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import click

from . import reports
from .config import build_synth_config, load_config_file
from .data import generate_synthetic, write_csv
from .errors import ConfigError, DataError, NumericalError, Sd2eError
from .pipeline import append_ledger, run
from .service import handlers, schemas

_DECODE_KEYS = (
    "mode", "method", "n_levels", "outer_iterations", "em_iterations",
    "lookback", "denom_variant", "seed",
)
_REG_KEYS = (
    "kind", "hidden_size", "layer_count", "learning_rate", "max_epochs",
    "eval_period", "standardize",
)
_SYNTH_KEYS = (
    "sample_count", "feature_dim", "trajectory", "tuning", "noise_sd",
    "poisson", "seed",
)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _rows_text(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def _emit(ctx, rows_or_text, filename: str) -> None:
    out_dir = ctx.obj.get("out")
    fmt = ctx.obj.get("format", "csv")
    if isinstance(rows_or_text, str):
        text = rows_or_text
    else:
        text = _rows_text(rows_or_text, fmt)
        filename = filename.rsplit(".", 1)[0] + "." + fmt
    if out_dir:
        target = Path(out_dir) / filename
        _atomic_write(target, text)
        click.echo(f"wrote {target}")
    else:
        click.echo(text, nl=False)


def _config_entries(ctx) -> dict:
    return dict(ctx.obj.get("config", {}))


def _request_fields(entries: dict, seed) -> dict:
    fields = {k: entries[k] for k in _DECODE_KEYS if k in entries}
    for key in ("n_levels", "outer_iterations", "em_iterations", "lookback", "seed"):
        if key in fields:
            fields[key] = int(fields[key])
    reg = {k: entries[k] for k in _REG_KEYS if k in entries}
    for key in ("hidden_size", "layer_count", "max_epochs", "eval_period"):
        if key in reg:
            reg[key] = int(reg[key])
    if "learning_rate" in reg:
        reg["learning_rate"] = float(reg["learning_rate"])
    if "standardize" in reg:
        reg["standardize"] = reg["standardize"].lower() in ("1", "true", "yes", "on")
    if reg:
        fields["regressor"] = schemas.RegressorOptions(**reg)
    if seed is not None:
        fields["seed"] = seed
    return fields


def _data_source(entries: dict, train_csv, test_csv, experiment, synth: bool, seed) -> schemas.DatasetSource:
    if synth:
        synth_entries = {k: entries[k] for k in _SYNTH_KEYS if k in entries}
        cfg = build_synth_config(synth_entries)
        req = schemas.SynthRequest(
            sample_count=cfg.sample_count,
            feature_dim=cfg.feature_dim,
            trajectory=cfg.trajectory,
            tuning=cfg.tuning,
            noise_sd=cfg.noise_sd,
            poisson=cfg.poisson,
            seed=cfg.seed if seed is None else seed,
        )
        return schemas.DatasetSource(synthetic=req)
    if not (train_csv and test_csv):
        raise ConfigError("pass --train-csv and --test-csv, or --synth")
    return schemas.DatasetSource(train_csv=train_csv, test_csv=test_csv, experiment=experiment)


def _remote(server: str, path: str, payload: dict) -> dict:
    import httpx

    resp = httpx.post(server.rstrip("/") + path, json=payload, timeout=None)
    if resp.status_code != 200:
        raise Sd2eError(f"server returned {resp.status_code}: {resp.text}")
    return resp.json()


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="key = value configuration file")
@click.option("--seed", type=int, default=None, help="override every seed")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="output directory")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--server", default=None, help="forward compute requests to a running service")
@click.pass_context
def main(ctx, config_path, seed, out, fmt, server):
    """Weakly-supervised 2-D trajectory decoder."""
    ctx.ensure_object(dict)
    ctx.obj["config"] = load_config_file(config_path) if config_path else {}
    ctx.obj["seed"] = seed
    ctx.obj["out"] = out
    ctx.obj["format"] = fmt
    ctx.obj["server"] = server


@main.command()
@click.option("--train-csv", default=None)
@click.option("--test-csv", default=None)
@click.option("--experiment", type=click.Choice(["A", "B"]), default="A")
@click.option("--synth", is_flag=True, help="decode the configured synthetic dataset")
@click.option("--ledger", default=None, help="append a summary row to this CSV ledger")
@click.pass_context
def decode(ctx, train_csv, test_csv, experiment, synth, ledger):
    """Run one full decode and emit its report as JSON."""
    entries = _config_entries(ctx)
    seed = ctx.obj["seed"]
    req = schemas.DecodeRequest(
        data=_data_source(entries, train_csv, test_csv, experiment, synth, seed),
        **_request_fields(entries, seed),
    )
    if ctx.obj["server"]:
        payload = _remote(ctx.obj["server"], "/decode", req.model_dump())
        _emit(ctx, json.dumps(payload["report"], sort_keys=True, indent=2) + "\n", "report.json")
        return
    report = handlers.decode(req)
    if ledger:
        append_ledger(report, ledger)
    _emit(ctx, report.to_json(), "report.json")


@main.command("sweep-n")
@click.option("--train-csv", default=None)
@click.option("--test-csv", default=None)
@click.option("--experiment", type=click.Choice(["A", "B"]), default="A")
@click.option("--synth", is_flag=True)
@click.option("--n-max", type=int, default=6)
@click.pass_context
def sweep_n(ctx, train_csv, test_csv, experiment, synth, n_max):
    """Decode at every division depth N = 0..n_max."""
    entries = _config_entries(ctx)
    seed = ctx.obj["seed"]
    req = schemas.SweepRequest(
        data=_data_source(entries, train_csv, test_csv, experiment, synth, seed),
        n_max=n_max,
        **_request_fields(entries, seed),
    )
    if ctx.obj["server"]:
        rows = _remote(ctx.obj["server"], "/sweep", req.model_dump())["rows"]
    else:
        rows = handlers.sweep(req)
    _emit(ctx, rows, "sweep_n.csv")


@main.command()
@click.option("--train-csv", default=None)
@click.option("--test-csv", default=None)
@click.option("--experiment", type=click.Choice(["A", "B"]), default="A")
@click.option("--synth", is_flag=True)
@click.pass_context
def ablate(ctx, train_csv, test_csv, experiment, synth):
    """Six-pipeline ablation table with a shared seed."""
    entries = _config_entries(ctx)
    seed = ctx.obj["seed"]
    req = schemas.AblationRequest(
        data=_data_source(entries, train_csv, test_csv, experiment, synth, seed),
        **_request_fields(entries, seed),
    )
    if ctx.obj["server"]:
        rows = _remote(ctx.obj["server"], "/ablate", req.model_dump())["rows"]
    else:
        rows = handlers.ablate(req)
    _emit(ctx, rows, "ablation.csv")


@main.command()
@click.option("--L", "length", type=float, required=True)
@click.option("--B", "width", type=float, required=True)
@click.option("--n-max", type=int, default=6)
@click.pass_context
def robustness(ctx, length, width, n_max):
    """Closed-form fault-tolerance table for a given active-space box."""
    rows = reports.robustness_table(length, width, n_max)
    _emit(ctx, rows, "robustness.csv")


@main.command("correction-table")
@click.option("--train-csv", default=None)
@click.option("--test-csv", default=None)
@click.option("--experiment", type=click.Choice(["A", "B"]), default="A")
@click.option("--synth", is_flag=True)
@click.pass_context
def correction_table(ctx, train_csv, test_csv, experiment, synth):
    """Uncorrected/corrected train and test errors of all four run variants."""
    entries = _config_entries(ctx)
    seed = ctx.obj["seed"]
    run_reports = []
    for mode in ("closed", "open"):
        for method in ("local", "global"):
            req = schemas.DecodeRequest(
                data=_data_source(entries, train_csv, test_csv, experiment, synth, seed),
                **{**_request_fields(entries, seed), "mode": mode, "method": method},
            )
            train_ds, test_ds = handlers.resolve_datasets(req.data)
            run_reports.append(run(train_ds, test_ds, handlers.loop_config(req)))
    _emit(ctx, reports.correction_table(run_reports), "correction_table.csv")


@main.command()
@click.argument("target", type=click.Path(dir_okay=False))
@click.pass_context
def synth(ctx, target):
    """Emit a synthetic dataset CSV from the configured generator."""
    entries = _config_entries(ctx)
    if ctx.obj["seed"] is not None:
        entries["seed"] = str(ctx.obj["seed"])
    cfg = build_synth_config(entries)
    dataset, _ = generate_synthetic(cfg)
    write_csv(dataset, target)
    click.echo(f"wrote {target} ({dataset.sample_count} samples, {dataset.feature_dim} features)")


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host, port):
    """Launch the HTTP service."""
    import uvicorn

    uvicorn.run("sd2e.service.app:app", host=host, port=port)


def entrypoint() -> None:
    try:
        main(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(2)
    except click.Abort:
        sys.exit(1)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(3)
    except NumericalError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(4)
    except Sd2eError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    entrypoint()
