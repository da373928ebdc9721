"""Recursive equal bisection of a 1-D active interval.

Bit encoding against the interval midline, reflection correction of a
prediction onto the side named by a feedback bit, descent into half-interval
children, and the closed-form fault-tolerance radii of a depth-N division.
All functions are pure and operate on immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import BoundsError, InputError

# Guard for region_count / fault_tolerance: depths past this are never
# meaningful (2^-1024 underflows a double).
MAX_DEPTH = 1024


@dataclass(frozen=True)
class AxisBounds:
    """A finite 1-D interval [min, max) used as the active space of one axis."""

    min: float
    max: float

    def __post_init__(self):
        if not (math.isfinite(self.min) and math.isfinite(self.max)):
            raise BoundsError(f"bounds must be finite, got [{self.min}, {self.max}]")
        if not self.min < self.max:
            raise BoundsError(f"bounds must satisfy min < max, got [{self.min}, {self.max}]")

    @property
    def extent(self) -> float:
        return self.max - self.min

    @property
    def mid(self) -> float:
        return (self.min + self.max) / 2.0


@dataclass(frozen=True)
class RegionCode:
    """Per-level 0/1 path identifying a subspace of one axis (level 1 first)."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise InputError(f"region bits must be 0/1, got {self.bits}")

    @property
    def depth(self) -> int:
        return len(self.bits)


@dataclass(frozen=True)
class FaultTolerance:
    """Per-axis and Euclidean maximum error radii of a depth-N division."""

    r_x: float
    r_y: float
    r_xy: float

    def __post_init__(self):
        if self.r_x < 0 or self.r_y < 0 or self.r_xy < 0:
            raise InputError("fault-tolerance radii must be nonnegative")
        expected = math.hypot(self.r_x, self.r_y)
        if abs(self.r_xy - expected) > 1e-12 * max(1.0, expected):
            raise InputError(f"r_xy {self.r_xy} inconsistent with hypot {expected}")


def midline(bounds: AxisBounds) -> float:
    """Central axis of the interval: (min + max) / 2."""
    return bounds.mid


def encode_bit(z: float, bounds: AxisBounds) -> int:
    """1 if z lies at or above the midline, else 0.

    z may fall outside the bounds (predictions can escape the active space);
    the comparison is against the midline regardless.
    """
    if not math.isfinite(z):
        raise InputError(f"position must be finite, got {z}")
    return 1 if z >= bounds.mid else 0


def reflect_correct(z_pred: float, true_bit: int, bounds: AxisBounds) -> float:
    """Reflect z_pred across the midline when its bit disagrees with true_bit.

    When z_pred sits exactly on the midline and true_bit is 0 the reflection
    is a no-op and the returned value still encodes to 1; callers track such
    ties separately.
    """
    if encode_bit(z_pred, bounds) == true_bit:
        return z_pred
    return 2.0 * bounds.mid - z_pred


def child_bounds(bounds: AxisBounds, bit: int) -> AxisBounds:
    """Half-interval selected by bit: 0 -> lower half, 1 -> upper half."""
    if bit == 0:
        return AxisBounds(bounds.min, bounds.mid)
    if bit == 1:
        return AxisBounds(bounds.mid, bounds.max)
    raise InputError(f"bit must be 0 or 1, got {bit}")


def descend(root: AxisBounds, bits) -> AxisBounds:
    """Follow a bit path from the root down to the addressed subinterval."""
    b = root
    for bit in bits:
        b = child_bounds(b, int(bit))
    return b


def region_count(n_levels: int) -> int:
    """Number of 2-D quadrants after n_levels equal divisions: 4^N."""
    if n_levels < 0:
        raise InputError(f"depth must be >= 0, got {n_levels}")
    if n_levels > MAX_DEPTH:
        raise InputError(f"depth {n_levels} exceeds supported range {MAX_DEPTH}")
    return 1 << (2 * n_levels)


def fault_tolerance(root_x: AxisBounds, root_y: AxisBounds, n_levels: int) -> FaultTolerance:
    """Maximum per-axis and Euclidean error after depth-N correction.

    r = extent / 2^N per axis; the power-of-two scaling is exact in binary
    floating point.
    """
    if n_levels < 0:
        raise InputError(f"depth must be >= 0, got {n_levels}")
    if n_levels > MAX_DEPTH:
        raise InputError(f"depth {n_levels} exceeds supported range {MAX_DEPTH}")
    r_x = math.ldexp(root_x.extent, -n_levels)
    r_y = math.ldexp(root_y.extent, -n_levels)
    return FaultTolerance(r_x=r_x, r_y=r_y, r_xy=math.hypot(r_x, r_y))


def encode_path(z: float, root: AxisBounds, n_levels: int) -> RegionCode:
    """Bit path of z to depth n_levels, descending one half-interval per level."""
    if not math.isfinite(z):
        raise InputError(f"position must be finite, got {z}")
    if n_levels < 0:
        raise InputError(f"depth must be >= 0, got {n_levels}")
    bits = []
    bounds = root
    for _ in range(n_levels):
        bit = encode_bit(z, bounds)
        bits.append(bit)
        bounds = child_bounds(bounds, bit)
    return RegionCode(bits=tuple(bits))
