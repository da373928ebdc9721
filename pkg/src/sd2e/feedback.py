"""Vision-feedback side: turn ground-truth trajectories into weak supervision.

The weak labels are per-sample, per-axis 0/1 region paths to depth N plus the
root active-space bounds extracted from the training targets. No magnitudes
leak through: 2*N bits per sample is all the supervision the decoder sees.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundsError, InputError
from .geometry import AxisBounds

SATURATION_DEPTH = 64  # beyond this the bit grid is finer than a double ulp


@dataclass(frozen=True)
class ViFLabels:
    """Weak supervision for one training set: roots plus K x N bit matrices."""

    root_x: AxisBounds
    root_y: AxisBounds
    depth: int
    bits_x: np.ndarray
    bits_y: np.ndarray

    def __post_init__(self):
        for name, bits in (("bits_x", self.bits_x), ("bits_y", self.bits_y)):
            if bits.ndim != 2 or bits.shape[1] != self.depth:
                raise InputError(f"{name} must be K x {self.depth}, got {bits.shape}")
            if bits.size and not np.isin(bits, (0, 1)).all():
                raise InputError(f"{name} contains non-binary entries")
        if self.bits_x.shape[0] != self.bits_y.shape[0]:
            raise InputError("bits_x and bits_y row counts differ")

    @property
    def sample_count(self) -> int:
        return self.bits_x.shape[0]

    def bits_for_axis(self, axis: int) -> np.ndarray:
        return self.bits_x if axis == 0 else self.bits_y

    def root_for_axis(self, axis: int) -> AxisBounds:
        return self.root_x if axis == 0 else self.root_y


def extract_active_bounds(targets: np.ndarray) -> tuple[AxisBounds, AxisBounds]:
    """Per-axis (min, max) of the training targets.

    Test-set targets must never be passed here; the active space is defined
    by what the decoder was trained against.
    """
    targets = np.asarray(targets, dtype=float)
    if targets.ndim != 2 or targets.shape[1] != 2:
        raise InputError(f"targets must be K x 2, got shape {targets.shape}")
    if targets.shape[0] < 2:
        raise InputError("need at least 2 samples to extract bounds")
    if not np.isfinite(targets).all():
        raise InputError("targets contain non-finite values")
    roots = []
    for axis, name in ((0, "X"), (1, "Y")):
        lo = float(targets[:, axis].min())
        hi = float(targets[:, axis].max())
        if lo == hi:
            raise BoundsError(f"degenerate bounds on {name}-axis: constant value {lo}")
        roots.append(AxisBounds(lo, hi))
    return roots[0], roots[1]


def _encode_paths_vec(values: np.ndarray, root: AxisBounds, n_levels: int) -> np.ndarray:
    """Vectorized per-sample bit paths; returns K x N uint8."""
    k = values.shape[0]
    bits = np.zeros((k, n_levels), dtype=np.uint8)
    lo = np.full(k, root.min)
    hi = np.full(k, root.max)
    for level in range(n_levels):
        mid = (lo + hi) / 2.0
        b = values >= mid
        bits[:, level] = b
        lo = np.where(b, mid, lo)
        hi = np.where(b, hi, mid)
    return bits


def make_labels(targets: np.ndarray, n_levels: int) -> ViFLabels:
    """Encode every training target to depth n_levels against the active space."""
    if n_levels < 0:
        raise InputError(f"depth must be >= 0, got {n_levels}")
    targets = np.asarray(targets, dtype=float)
    root_x, root_y = extract_active_bounds(targets)
    bits_x = _encode_paths_vec(targets[:, 0], root_x, n_levels)
    bits_y = _encode_paths_vec(targets[:, 1], root_y, n_levels)
    return ViFLabels(root_x=root_x, root_y=root_y, depth=n_levels, bits_x=bits_x, bits_y=bits_y)


def supervision_degree(n_levels: int, saturation: int = SATURATION_DEPTH) -> str:
    """Classify depth N: 0 is unsupervised, finite N weak, >= saturation ~supervised."""
    if n_levels < 0:
        raise InputError(f"depth must be >= 0, got {n_levels}")
    if n_levels == 0:
        return "unsupervised"
    if n_levels >= saturation:
        return "asymptotically-supervised"
    return "weakly-supervised"


def labels_to_csv(labels: ViFLabels, path) -> None:
    """Write one row per sample: k, bits_x as a 0/1 string, bits_y likewise."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("k,bits_x,bits_y\n")
        for k in range(labels.sample_count):
            bx = "".join(str(int(b)) for b in labels.bits_x[k])
            by = "".join(str(int(b)) for b in labels.bits_y[k])
            fh.write(f"{k},{bx},{by}\n")
