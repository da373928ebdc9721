"""Space-division correction of exploration outputs against weak 0/1 labels.

Global method: reflect the running predictions level by level inside the
subspace addressed by each sample's true-bit prefix. Local method: inside each
subspace (level >= 2), re-run the unsupervised exploration on the
subspace-restricted neural signals and correct those fresh predictions
instead. After each level, the per-group outputs are scattered back into a
single vector over the original sample order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import em as em_mod
from .errors import InputError, NumericalError
from .feedback import ViFLabels
from .geometry import AxisBounds, descend


class Method(str, Enum):
    GLOBAL = "global"
    LOCAL = "local"


@dataclass
class LocalEmConfig:
    """Settings for the per-subspace re-exploration of the local method."""

    iterations: int = 8
    state_noise: float = 2.0
    z0: float = 10.0
    p0: float = 10.0
    variant: str = "ols"
    min_samples: int = 20
    warm_start: bool = False  # inherit parent weights instead of a fresh init


@dataclass
class CorrectionTrace:
    """Per-level record of a correction run on one axis."""

    level_values: list = field(default_factory=list)   # K-vector after each level
    flips: list = field(default_factory=list)          # reflected samples per level
    degenerate: list = field(default_factory=list)     # (level, sample) midline ties
    empty_regions: list = field(default_factory=list)  # (level, prefix) fallbacks
    em_calls: int = 0
    regions_processed: int = 0


def global_unit(preds: np.ndarray, true_bits: np.ndarray, bounds: AxisBounds):
    """Reflect every prediction whose bit disagrees with its true bit.

    Returns (corrected, flip_count, degenerate_indices). Degenerate indices
    are samples sitting exactly on the midline with true bit 0: reflection is
    a no-op there and the value is carried unchanged.
    """
    preds = np.asarray(preds, dtype=float)
    true_bits = np.asarray(true_bits)
    if preds.shape != true_bits.shape:
        raise InputError(f"preds/bits shape mismatch: {preds.shape} vs {true_bits.shape}")
    mid = bounds.mid
    pred_bits = (preds >= mid).astype(np.uint8)
    mismatch = pred_bits != true_bits
    on_mid = preds == mid
    corrected = np.where(mismatch, 2.0 * mid - preds, preds)
    flips = int(np.count_nonzero(mismatch & ~on_mid))
    degenerate = np.nonzero(on_mid & (true_bits == 0))[0]
    return corrected, flips, degenerate


def local_unit(
    features: np.ndarray,
    true_bits: np.ndarray,
    bounds: AxisBounds,
    cfg: LocalEmConfig,
    parent_params=None,
):
    """Fresh exploration of a subspace's signals, then a global correction.

    Returns None when the group is thinner than cfg.min_samples (caller falls
    back to correcting the inherited values).
    """
    k = features.shape[0]
    if k < cfg.min_samples:
        return None
    if cfg.warm_start and parent_params is not None:
        init = parent_params
    else:
        init = em_mod.default_params(
            features.shape[1], state_noise=cfg.state_noise, z0=cfg.z0, p0=cfg.p0
        )
    run = em_mod.run_em(features, init, cfg.iterations, variant=cfg.variant)
    corrected, flips, degen = global_unit(run.posterior.means, true_bits, bounds)
    return corrected, flips, degen, run.params


def run_method(
    preds0: np.ndarray,
    features: np.ndarray,
    labels: ViFLabels,
    axis: int,
    method: Method,
    n_levels: int,
    em_cfg: LocalEmConfig | None = None,
) -> tuple[np.ndarray, CorrectionTrace]:
    """Correct one axis of exploration outputs down to depth n_levels.

    Level 1 corrects everything over the root bounds. At level L >= 2, samples
    are grouped by their true-bit prefix of length L-1 and corrected inside
    the subspace that prefix addresses; the local method re-explores each
    group's neural signals first. Grouping always follows the true bits: after
    the level-(L-1) correction every non-degenerate prediction already sits in
    its true subspace, so the weak labels are the only well-defined key.
    """
    preds0 = np.asarray(preds0, dtype=float)
    k = preds0.shape[0]
    if labels.sample_count != k:
        raise InputError(f"labels carry {labels.sample_count} samples, preds {k}")
    if labels.depth < n_levels:
        raise InputError(f"labels depth {labels.depth} < requested {n_levels}")
    if method is Method.LOCAL and em_cfg is None:
        em_cfg = LocalEmConfig()

    bits = labels.bits_for_axis(axis)
    root = labels.root_for_axis(axis)
    trace = CorrectionTrace()
    current = preds0.copy()

    for level in range(1, n_levels + 1):
        new = current.copy()
        level_flips = 0
        if level == 1:
            groups = [((), np.arange(k))]
        else:
            prefixes = [tuple(row) for row in bits[:, : level - 1]]
            index = {}
            for i, pfx in enumerate(prefixes):
                index.setdefault(pfx, []).append(i)
            groups = [(pfx, np.asarray(idx)) for pfx, idx in sorted(index.items())]

        for prefix, idx in groups:
            bounds = descend(root, prefix)
            true_bits = bits[idx, level - 1]
            trace.regions_processed += 1

            result = None
            if method is Method.LOCAL and level >= 2:
                try:
                    result = local_unit(features[idx], true_bits, bounds, em_cfg)
                except NumericalError:
                    result = None  # degenerate subspace EM: fall back to global
                if result is None:
                    trace.empty_regions.append((level, "".join(map(str, prefix))))
                else:
                    trace.em_calls += 1
            if result is not None:
                corrected, flips, degen, _ = result
            else:
                corrected, flips, degen = global_unit(current[idx], true_bits, bounds)
            new[idx] = corrected
            level_flips += flips
            for d in degen:
                trace.degenerate.append((level, int(idx[d])))

        current = new
        trace.level_values.append(current.copy())
        trace.flips.append(level_flips)

    return current, trace
