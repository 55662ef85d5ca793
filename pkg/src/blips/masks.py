"""Deterministic, seedable undersampling mask generators.

Three families: 1D variable-density (random phase-encode columns plus a
fully sampled center block), 2D Poisson-disk on the Cartesian grid, and
1D equidistant.  Same spec (including seed) always yields a bit-identical
mask.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import GenerationFailureError, InvalidArgumentError
from .fourier import SamplingMask

VARIABLE_DENSITY_1D = "variable_density_1d"
POISSON_DISK_2D = "poisson_disk_2d"
EQUIDISTANT_1D = "equidistant_1d"
MASK_KINDS = (VARIABLE_DENSITY_1D, POISSON_DISK_2D, EQUIDISTANT_1D)


@dataclass(frozen=True)
class MaskSpec:
    kind: str
    height: int
    width: int
    acceleration: float
    acs_lines: int = 0
    acs_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in MASK_KINDS:
            raise InvalidArgumentError(
                f"unknown mask kind {self.kind!r}; expected one of {MASK_KINDS}"
            )
        if self.height < 1 or self.width < 1:
            raise InvalidArgumentError("mask dimensions must be positive")
        if self.acceleration < 1.0:
            raise InvalidArgumentError("acceleration must be >= 1")
        if self.acs_lines < 0 or self.acs_lines > self.width:
            raise InvalidArgumentError("acs_lines must be in [0, width]")
        if not 0.0 <= self.acs_fraction <= 1.0:
            raise InvalidArgumentError("acs_fraction must be in [0, 1]")


def _center_block(width: int, count: int) -> slice:
    start = (width - count) // 2
    return slice(start, start + count)


def mask_1d_variable_density(spec: MaskSpec) -> SamplingMask:
    """Fully sampled center columns plus uniform-random outer columns.

    Total sampled columns = round(width / acceleration), the centermost
    ``acs_lines`` of them always included.
    """
    if spec.kind != VARIABLE_DENSITY_1D:
        raise InvalidArgumentError(f"spec kind {spec.kind!r} is not {VARIABLE_DENSITY_1D!r}")
    total = int(round(spec.width / spec.acceleration))
    if total < spec.acs_lines:
        raise InvalidArgumentError(
            f"round(width/acceleration) = {total} is fewer than acs_lines = {spec.acs_lines}"
        )
    cols = np.zeros(spec.width, dtype=bool)
    cols[_center_block(spec.width, spec.acs_lines)] = True
    outside = np.flatnonzero(~cols)
    extra = total - spec.acs_lines
    rng = np.random.default_rng(spec.seed)
    chosen = rng.choice(outside, size=extra, replace=False)
    cols[chosen] = True
    keep = np.broadcast_to(cols, (spec.height, spec.width)).copy()
    return SamplingMask(keep)


def mask_equidistant(spec: MaskSpec) -> SamplingMask:
    """Every acceleration-th column from offset seed mod acceleration,
    plus round(acs_fraction * width) fully sampled center columns."""
    if spec.kind != EQUIDISTANT_1D:
        raise InvalidArgumentError(f"spec kind {spec.kind!r} is not {EQUIDISTANT_1D!r}")
    accel = spec.acceleration
    if accel != int(accel):
        raise InvalidArgumentError("equidistant masks require an integer acceleration")
    accel = int(accel)
    cols = np.zeros(spec.width, dtype=bool)
    offset = spec.seed % accel
    cols[offset::accel] = True
    acs = int(round(spec.acs_fraction * spec.width))
    cols[_center_block(spec.width, acs)] = True
    keep = np.broadcast_to(cols, (spec.height, spec.width)).copy()
    return SamplingMask(keep)


def _acs_square(height: int, width: int):
    side = math.ceil(0.02 * min(height, width))
    return _center_block(height, side), _center_block(width, side)


def _poisson_trial(spec: MaskSpec, radius: float) -> np.ndarray:
    """Dart-throw at a fixed radius; returns the boolean mask including ACS."""
    rows, cols = _acs_square(spec.height, spec.width)
    ii, jj = np.meshgrid(
        np.arange(spec.height), np.arange(spec.width), indexing="ij"
    )
    in_acs = np.zeros((spec.height, spec.width), dtype=bool)
    in_acs[rows, cols] = True
    candidates = np.stack([ii[~in_acs], jj[~in_acs]], axis=1).astype(np.int64)
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(candidates.shape[0])
    candidates = np.ascontiguousarray(candidates[order])
    accepted = _kernels.dart_throw(candidates, radius, spec.height, spec.width)
    keep = in_acs.copy()
    pts = candidates[accepted]
    keep[pts[:, 0], pts[:, 1]] = True
    return keep


def mask_poisson_disk_2d(spec: MaskSpec) -> SamplingMask:
    """On-grid Poisson-disk sampling with a fully sampled center square.

    The disk radius is calibrated by bisection until the sampled fraction
    lands within 10% of 1/acceleration.  Samples outside the ACS square
    are pairwise at least the final radius apart.
    """
    if spec.kind != POISSON_DISK_2D:
        raise InvalidArgumentError(f"spec kind {spec.kind!r} is not {POISSON_DISK_2D!r}")
    target = 1.0 / spec.acceleration
    lo, hi = 1.0, float(np.hypot(spec.height, spec.width))
    radius = lo
    for _ in range(50):
        keep = _poisson_trial(spec, radius)
        frac = keep.mean()
        if 0.9 * target <= frac <= 1.1 * target:
            return SamplingMask(keep)
        if frac > 1.1 * target:
            lo = radius
        else:
            hi = radius
        radius = 0.5 * (lo + hi)
    raise GenerationFailureError(
        f"poisson-disk calibration failed to reach fraction {target:.4f} "
        f"within 50 bisection steps (last fraction {frac:.4f})"
    )


def generate_mask(spec: MaskSpec) -> SamplingMask:
    """Dispatch on spec.kind."""
    if spec.kind == VARIABLE_DENSITY_1D:
        return mask_1d_variable_density(spec)
    if spec.kind == POISSON_DISK_2D:
        return mask_poisson_disk_2d(spec)
    return mask_equidistant(spec)
