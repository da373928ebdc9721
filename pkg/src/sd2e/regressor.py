"""Supervised exploitation: look-back windowing plus sequence regressors.

Two interchangeable regressor kinds fit (windowed features -> corrected
target) per axis:

* "linear"    - ridge regression, closed form; fast oracle/CI path.
* "recurrent" - stacked gated recurrent cells (input/forget/output gates and
  a cell state) with a scalar head, trained by plain gradient descent with
  norm clipping, float64 throughout for determinism and gradient checks.

Inputs are z-scored per column (fit on training windows only); targets are
internally z-scored as well and restored at prediction time.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, field

import numpy as np
import torch

from .errors import InputError, NumericalError

MAGIC = b"SD2E"
FORMAT_VERSION = 1
STD_FLOOR = 1e-8


@dataclass(frozen=True)
class WindowedDataset:
    """Look-back-stacked inputs (K x feature_dim*T) paired with one axis of targets."""

    inputs: np.ndarray
    targets: np.ndarray
    lookback: int


@dataclass
class RegressorConfig:
    kind: str = "recurrent"
    hidden_size: int = 70
    layer_count: int = 3
    learning_rate: float = 0.02
    max_epochs: int = 1000
    eval_period: int = 10
    seed: int = 0
    standardize: bool = True
    ridge_lambda: float = 1e-3
    clip_norm: float = 1.0
    chunk_len: int = 64

    def __post_init__(self):
        if self.kind not in ("recurrent", "linear"):
            raise InputError(f"unknown regressor kind {self.kind!r}")
        if self.hidden_size < 1 or self.layer_count < 1:
            raise InputError("hidden_size and layer_count must be >= 1")
        if self.learning_rate <= 0:
            raise InputError("learning_rate must be > 0")


def build_windows(features: np.ndarray, targets: np.ndarray, lookback: int) -> WindowedDataset:
    """Row k stacks feature rows k-T+1..k, zero-padded before time 0."""
    features = np.asarray(features, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if features.ndim != 2:
        raise InputError(f"features must be 2-D, got shape {features.shape}")
    k, d = features.shape
    if targets.shape != (k,):
        raise InputError(f"targets must be length {k}, got {targets.shape}")
    if lookback < 1:
        raise InputError(f"lookback must be >= 1, got {lookback}")
    if lookback > k:
        raise InputError(f"lookback {lookback} exceeds sample count {k}")
    inputs = np.zeros((k, d * lookback))
    for t in range(lookback):
        # offset t holds features from time k - (lookback - 1 - t)
        shift = lookback - 1 - t
        inputs[shift:, t * d : (t + 1) * d] = features[: k - shift]
    return WindowedDataset(inputs=inputs, targets=targets, lookback=lookback)


class GatedCell(torch.nn.Module):
    """One gated recurrent cell: input/forget/output gates plus cell state."""

    def __init__(self, input_dim: int, hidden_dim: int):
        super().__init__()
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        bound = 1.0 / np.sqrt(hidden_dim)
        self.weight_x = torch.nn.Parameter(
            torch.empty(4 * hidden_dim, input_dim, dtype=torch.float64).uniform_(-bound, bound)
        )
        self.weight_h = torch.nn.Parameter(
            torch.empty(4 * hidden_dim, hidden_dim, dtype=torch.float64).uniform_(-bound, bound)
        )
        self.bias = torch.nn.Parameter(
            torch.empty(4 * hidden_dim, dtype=torch.float64).uniform_(-bound, bound)
        )

    def forward(self, x, h, c):
        gates = x @ self.weight_x.T + h @ self.weight_h.T + self.bias
        i, f, g, o = gates.chunk(4, dim=-1)
        i = torch.sigmoid(i)
        f = torch.sigmoid(f)
        g = torch.tanh(g)
        o = torch.sigmoid(o)
        c_new = f * c + i * g
        h_new = o * torch.tanh(c_new)
        return h_new, c_new


class SequenceRegressor(torch.nn.Module):
    """Stacked gated cells over a (batch, steps, width) sequence, scalar head."""

    def __init__(self, input_dim: int, hidden_dim: int, layers: int):
        super().__init__()
        self.cells = torch.nn.ModuleList(
            [GatedCell(input_dim if i == 0 else hidden_dim, hidden_dim) for i in range(layers)]
        )
        self.head = torch.nn.Linear(hidden_dim, 1, dtype=torch.float64)

    def forward(self, seq):
        batch, steps, _ = seq.shape
        hidden = [
            seq.new_zeros(batch, cell.hidden_dim) for cell in self.cells
        ]
        cell_state = [seq.new_zeros(batch, cell.hidden_dim) for cell in self.cells]
        outputs = []
        for t in range(steps):
            x = seq[:, t]
            for i, cell in enumerate(self.cells):
                hidden[i], cell_state[i] = cell(x, hidden[i], cell_state[i])
                x = hidden[i]
            outputs.append(self.head(x).squeeze(-1))
        return torch.stack(outputs, dim=1)


@dataclass
class TrainedRegressor:
    """Immutable fitted model: weights plus the scalers fit on training data."""

    config: RegressorConfig
    input_width: int
    arrays: dict
    training_loss_curve: list = field(default_factory=list)

    def _torch_model(self) -> SequenceRegressor:
        model = SequenceRegressor(self.input_width, self.config.hidden_size, self.config.layer_count)
        state = {k[len("net."):]: torch.from_numpy(v) for k, v in self.arrays.items() if k.startswith("net.")}
        model.load_state_dict(state)
        return model


def _scalers(data: WindowedDataset, cfg: RegressorConfig):
    if cfg.standardize:
        x_mean = data.inputs.mean(axis=0)
        x_std = np.maximum(data.inputs.std(axis=0), STD_FLOOR)
    else:
        x_mean = np.zeros(data.inputs.shape[1])
        x_std = np.ones(data.inputs.shape[1])
    y_mean = float(data.targets.mean())
    y_std = max(float(data.targets.std()), STD_FLOOR)
    return x_mean, x_std, y_mean, y_std


def _chunk(x: np.ndarray, chunk_len: int):
    """Pad rows to a multiple of chunk_len and reshape to (chunks, chunk_len, ...)."""
    k = x.shape[0]
    n_chunks = (k + chunk_len - 1) // chunk_len
    pad = n_chunks * chunk_len - k
    if pad:
        x = np.concatenate([x, np.zeros((pad,) + x.shape[1:])], axis=0)
    mask = np.ones(n_chunks * chunk_len)
    if pad:
        mask[-pad:] = 0.0
    return x.reshape((n_chunks, chunk_len) + x.shape[1:]), mask.reshape(n_chunks, chunk_len)


def _train_linear(xs: np.ndarray, ys: np.ndarray, cfg: RegressorConfig):
    d = xs.shape[1]
    gram = xs.T @ xs + cfg.ridge_lambda * np.eye(d)
    w = np.linalg.solve(gram, xs.T @ ys)
    return w


def _train_recurrent(xs: np.ndarray, ys: np.ndarray, cfg: RegressorConfig):
    torch.manual_seed(cfg.seed)
    model = SequenceRegressor(xs.shape[1], cfg.hidden_size, cfg.layer_count)
    seq_np, mask_np = _chunk(xs, cfg.chunk_len)
    tgt_np, _ = _chunk(ys, cfg.chunk_len)
    seq = torch.from_numpy(seq_np)
    tgt = torch.from_numpy(tgt_np)
    mask = torch.from_numpy(mask_np)
    n_valid = mask.sum()
    opt = torch.optim.SGD(model.parameters(), lr=cfg.learning_rate)
    curve = []
    for epoch in range(cfg.max_epochs):
        opt.zero_grad()
        pred = model(seq)
        loss = (((pred - tgt) ** 2) * mask).sum() / n_valid
        if not torch.isfinite(loss):
            raise NumericalError(f"training diverged at epoch {epoch}")
        loss.backward()
        torch.nn.utils.clip_grad_norm_(model.parameters(), cfg.clip_norm)
        opt.step()
        if epoch % cfg.eval_period == 0 or epoch == cfg.max_epochs - 1:
            curve.append(float(loss.detach()))
    return model, curve


def train(data: WindowedDataset, cfg: RegressorConfig) -> TrainedRegressor:
    """Fit one regressor; deterministic given (data, cfg, seed)."""
    if data.inputs.shape[0] == 0:
        raise InputError("empty training set")
    if not np.isfinite(data.targets).all():
        raise InputError("targets contain non-finite values")
    x_mean, x_std, y_mean, y_std = _scalers(data, cfg)
    xs = (data.inputs - x_mean) / x_std
    ys = (data.targets - y_mean) / y_std

    arrays = {
        "x_mean": x_mean,
        "x_std": x_std,
        "y_scale": np.array([y_mean, y_std]),
    }
    if cfg.kind == "linear":
        baseline = float((ys**2).mean())
        w = _train_linear(xs, ys, cfg)
        resid = ys - xs @ w
        arrays["weights"] = w
        curve = [baseline * y_std**2, float((resid**2).mean()) * y_std**2]
    else:
        model, raw_curve = _train_recurrent(xs, ys, cfg)
        for name, tensor in model.state_dict().items():
            arrays["net." + name] = tensor.detach().numpy().copy()
        curve = [c * y_std**2 for c in raw_curve]
    return TrainedRegressor(
        config=cfg,
        input_width=data.inputs.shape[1],
        arrays=arrays,
        training_loss_curve=curve,
    )


def predict(model: TrainedRegressor, inputs: np.ndarray) -> np.ndarray:
    """Deterministic forward pass over a batch of windowed rows."""
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 2:
        raise InputError(f"inputs must be 2-D, got shape {inputs.shape}")
    if inputs.shape[0] == 0:
        return np.empty(0)
    if inputs.shape[1] != model.input_width:
        raise InputError(f"input width {inputs.shape[1]} != training width {model.input_width}")
    y_mean, y_std = model.arrays["y_scale"]
    xs = (inputs - model.arrays["x_mean"]) / model.arrays["x_std"]
    if model.config.kind == "linear":
        out = xs @ model.arrays["weights"]
    else:
        net = model._torch_model()
        seq_np, mask_np = _chunk(xs, model.config.chunk_len)
        with torch.no_grad():
            pred = net(torch.from_numpy(seq_np)).numpy()
        out = pred.reshape(-1)[mask_np.reshape(-1) > 0]
    return out * y_std + y_mean


def save_model(model: TrainedRegressor, path) -> None:
    """Flat binary weight store (magic, version, dimension table) + JSON sidecar."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", FORMAT_VERSION))
        fh.write(struct.pack("<I", len(model.arrays)))
        for name in sorted(model.arrays):
            arr = np.ascontiguousarray(model.arrays[name], dtype=np.float64)
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<B", arr.ndim))
            for dim in arr.shape:
                fh.write(struct.pack("<I", dim))
            fh.write(arr.tobytes())
    sidecar = {
        "config": asdict(model.config),
        "input_width": model.input_width,
        "training_loss_curve": model.training_loss_curve,
    }
    with open(str(path) + ".json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2)
        fh.write("\n")


def load_model(path) -> TrainedRegressor:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise InputError(f"{path} is not a model file (bad magic)")
        (version,) = struct.unpack("<H", fh.read(2))
        if version != FORMAT_VERSION:
            raise InputError(f"unsupported model format version {version}")
        (count,) = struct.unpack("<I", fh.read(4))
        arrays = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<H", fh.read(2))
            name = fh.read(name_len).decode("utf-8")
            (ndim,) = struct.unpack("<B", fh.read(1))
            shape = tuple(struct.unpack("<I", fh.read(4))[0] for _ in range(ndim))
            n_items = int(np.prod(shape)) if shape else 1
            arrays[name] = np.frombuffer(fh.read(8 * n_items), dtype=np.float64).reshape(shape).copy()
    with open(str(path) + ".json", encoding="utf-8") as fh:
        sidecar = json.load(fh)
    return TrainedRegressor(
        config=RegressorConfig(**sidecar["config"]),
        input_width=sidecar["input_width"],
        arrays=arrays,
        training_loss_curve=sidecar["training_loss_curve"],
    )
