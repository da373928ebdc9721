"""Dataset I/O, experiment splits, and the synthetic oracle generator.

Canonical on-disk format: UTF-8 CSV, header ``f0,...,f41,x,y`` (feature count
may differ for synthetic data), one sample per line, full round-trip decimal
floats, LF endings.

The synthetic generator draws a smooth 2-D trajectory inside a 25 x 15 box
(matching the real active space, so the fault-tolerance radii transfer) and
emits per-feature responses with known tuning, providing exact ground truth
for every statistical test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, InputError


@dataclass(frozen=True)
class Dataset:
    """Spike-count features (K x D) and 2-D positions (K x 2)."""

    features: np.ndarray
    positions: np.ndarray
    name: str = ""

    def __post_init__(self):
        f = np.asarray(self.features, dtype=float)
        p = np.asarray(self.positions, dtype=float)
        if f.ndim != 2 or p.ndim != 2 or p.shape[1] != 2:
            raise InputError(f"bad dataset shapes: features {f.shape}, positions {p.shape}")
        if f.shape[0] != p.shape[0] or f.shape[0] < 1:
            raise InputError(f"row mismatch: {f.shape[0]} features vs {p.shape[0]} positions")
        if not (np.isfinite(f).all() and np.isfinite(p).all()):
            raise DataError("dataset contains non-finite values")
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "positions", p)

    @property
    def sample_count(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]


@dataclass
class SynthConfig:
    sample_count: int = 1000
    feature_dim: int = 42
    trajectory: str = "smooth-random-walk"  # or "lissajous"
    tuning: str = "cosine"                  # or "linear"
    tuning_gain_range: tuple = (2.0, 6.0)
    # Fraction by which Y-loadings are attenuated in the tuning directions.
    # The default makes X the dominant decodable state so the generator is a
    # well-posed oracle for the single-state exploration; set 0 for isotropic
    # tuning.
    axis_bias: float = 0.75
    baseline: float = 8.0
    noise_sd: float = 1.0
    poisson: bool = False
    box: tuple = (25.0, 15.0)
    seed: int = 0
    # Trajectory/noise draw; defaults to `seed`. Two configs sharing `seed`
    # but differing here describe the same neuron ensemble recorded on
    # different trajectories (train/test pairs).
    trajectory_seed: int | None = None

    def __post_init__(self):
        if self.sample_count < 2:
            raise InputError("sample_count must be >= 2")
        if self.feature_dim < 1:
            raise InputError("feature_dim must be >= 1")
        if self.noise_sd < 0:
            raise InputError("noise_sd must be >= 0")
        if self.trajectory not in ("smooth-random-walk", "lissajous"):
            raise InputError(f"unknown trajectory {self.trajectory!r}")
        if self.tuning not in ("cosine", "linear"):
            raise InputError(f"unknown tuning {self.tuning!r}")


def load_csv(path) -> Dataset:
    """Read the canonical CSV; the last two columns are x and y."""
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        header = fh.readline().rstrip("\n")
        cols = header.split(",")
        if len(cols) < 3 or cols[-2:] != ["x", "y"]:
            raise DataError(f"{path}: header must end in ',x,y', got {header!r}")
        n_features = len(cols) - 2
        for j in range(n_features):
            if cols[j] != f"f{j}":
                raise DataError(f"{path}: expected feature column f{j}, got {cols[j]!r}")
        features = []
        positions = []
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != n_features + 2:
                raise DataError(
                    f"{path}:{lineno}: expected {n_features + 2} columns, got {len(parts)}"
                )
            try:
                values = [float(v) for v in parts]
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
            features.append(values[:n_features])
            positions.append(values[n_features:])
    if not features:
        raise DataError(f"{path}: no data rows")
    try:
        return Dataset(np.array(features), np.array(positions), name=str(path))
    except InputError as exc:
        raise DataError(f"{path}: {exc}") from exc


def write_csv(dataset: Dataset, path) -> None:
    """Full-precision decimal serialization; round-trips doubles bit-exactly."""
    d = dataset.feature_dim
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join([f"f{j}" for j in range(d)] + ["x", "y"]) + "\n")
        for k in range(dataset.sample_count):
            row = [repr(float(v)) for v in dataset.features[k]]
            row += [repr(float(v)) for v in dataset.positions[k]]
            fh.write(",".join(row) + "\n")


def experiment_split(d1: Dataset, d2: Dataset, which: str) -> tuple[Dataset, Dataset]:
    """Experiment A trains on d1 and tests on d2; Experiment B swaps them."""
    if which == "A":
        return d1, d2
    if which == "B":
        return d2, d1
    raise InputError(f"experiment must be 'A' or 'B', got {which!r}")


def _trajectory(cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    length, width = cfg.box
    k = cfg.sample_count
    if cfg.trajectory == "lissajous":
        t = np.arange(k) * 0.05
        x = length / 2 * (1 + np.sin(1.0 * t))
        y = width / 2 * (1 + np.sin(1.7 * t + 0.5))
        return np.column_stack([x, y])
    # Smooth random walk: AR(1) velocity, reflective box walls.
    pos = np.empty((k, 2))
    pos[0] = (length / 2, width / 2)
    vel = np.zeros(2)
    scale = np.array([length, width]) / 25.0
    for i in range(1, k):
        vel = 0.9 * vel + rng.normal(0.0, 0.25, size=2) * scale
        nxt = pos[i - 1] + vel
        for axis, hi in enumerate((length, width)):
            if nxt[axis] < 0:
                nxt[axis] = -nxt[axis]
                vel[axis] = -vel[axis]
            if nxt[axis] > hi:
                nxt[axis] = 2 * hi - nxt[axis]
                vel[axis] = -vel[axis]
            nxt[axis] = min(max(nxt[axis], 0.0), hi)
        pos[i] = nxt
    return pos


def generate_synthetic(cfg: SynthConfig) -> tuple[Dataset, np.ndarray]:
    """Seed-deterministic synthetic dataset plus its exact ground truth.

    Feature j responds to the position projected on its preferred direction:
    linearly ("linear") or rectified ("cosine"). Noise is Gaussian by default,
    Poisson behind cfg.poisson.
    """
    rng_tuning = np.random.default_rng(cfg.seed)
    traj_seed = cfg.seed if cfg.trajectory_seed is None else cfg.trajectory_seed
    rng = np.random.default_rng(traj_seed)
    truth = _trajectory(cfg, rng)
    length, width = cfg.box
    center = np.array([length / 2, width / 2])
    half = np.array([length / 2, width / 2])
    normed = (truth - center) / half  # each axis in [-1, 1]

    angles = rng_tuning.uniform(0.0, 2 * np.pi, size=cfg.feature_dim)
    dirs = np.column_stack([np.cos(angles), (1.0 - cfg.axis_bias) * np.sin(angles)])
    gains = rng_tuning.uniform(*cfg.tuning_gain_range, size=cfg.feature_dim)
    drive = normed @ dirs.T  # (K, D)
    if cfg.tuning == "cosine":
        rates = cfg.baseline + gains * np.maximum(drive, 0.0)
    else:
        rates = cfg.baseline + gains * drive
    if cfg.poisson:
        features = rng.poisson(np.maximum(rates, 0.0)).astype(float)
    else:
        features = rates + rng.normal(0.0, cfg.noise_sd, size=rates.shape)
    return Dataset(features, truth.copy(), name=f"synthetic-{cfg.seed}"), truth
