"""Centered unitary 2D FFT and the multicoil sampling model.

Images and k-space grids are 2D complex128 arrays.  The forward model for
coil c is mask-select-in-grid of the centered FFT of the coil-weighted
image; undersampled locations are kept on the grid as zeros, which is
equivalent to row selection for every objective in this toolkit.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError


def as_complex_image(data) -> np.ndarray:
    """Validate and return a 2D complex128 copy-on-need view of data."""
    arr = np.asarray(data)
    if arr.ndim != 2:
        raise InvalidArgumentError(f"expected a 2D array, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvalidArgumentError("image dimensions must be nonzero")
    arr = np.ascontiguousarray(arr, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("image contains non-finite entries")
    return arr


def fft2c(img: np.ndarray) -> np.ndarray:
    """Centered unitary 2D DFT (DC at the grid center); preserves the l2 norm."""
    img = as_complex_image(img)
    return np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(img), norm="ortho"))


def ifft2c(ksp: np.ndarray) -> np.ndarray:
    """Exact inverse of fft2c."""
    ksp = as_complex_image(ksp)
    return np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(ksp), norm="ortho"))


class CoilSet:
    """Stack of coil sensitivity maps, sum-of-squares normalized.

    maps: (n_coils, H, W) complex.  Construction rejects maps whose
    pixelwise sum of |V_c|^2 deviates from 1 by more than 1e-3 unless
    ``normalize=True``, in which case they are rescaled; either way the
    stored maps satisfy the invariant to within 1e-6.
    """

    def __init__(self, maps, *, normalize: bool = False):
        maps = np.ascontiguousarray(np.asarray(maps), dtype=np.complex128)
        if maps.ndim != 3 or maps.shape[0] < 1:
            raise InvalidArgumentError(
                f"coil maps must be (n_coils, H, W), got shape {maps.shape}"
            )
        if not np.all(np.isfinite(maps)):
            raise InvalidArgumentError("coil maps contain non-finite entries")
        sos = np.sum(np.abs(maps) ** 2, axis=0)
        dev = float(np.max(np.abs(sos - 1.0)))
        if dev > 1e-3 and not normalize:
            raise InvalidArgumentError(
                f"coil maps are not sum-of-squares normalized (max deviation {dev:.2e}); "
                "pass normalize=True to rescale"
            )
        if dev > 0.0:
            if np.any(sos <= 0.0):
                raise InvalidArgumentError("coil maps vanish jointly at some pixel")
            maps = maps / np.sqrt(sos)[None, :, :]
        self.maps = maps

    @property
    def n_coils(self) -> int:
        return self.maps.shape[0]

    @property
    def shape(self):
        return self.maps.shape[1:]


@dataclass(frozen=True)
class SamplingMask:
    """Boolean k-space grid; True marks a sampled location."""

    keep: np.ndarray

    def __post_init__(self):
        keep = np.ascontiguousarray(np.asarray(self.keep), dtype=bool)
        if keep.ndim != 2:
            raise InvalidArgumentError(f"mask must be 2D, got shape {keep.shape}")
        if not keep.any():
            raise InvalidArgumentError("mask has no sampled locations")
        object.__setattr__(self, "keep", keep)

    @property
    def shape(self):
        return self.keep.shape

    @property
    def sampled_fraction(self) -> float:
        return float(self.keep.mean())


@dataclass(frozen=True)
class MultiCoilSystem:
    """Coil sensitivities plus a sampling mask: the per-coil forward model."""

    coils: CoilSet
    mask: SamplingMask

    def __post_init__(self):
        if self.coils.shape != self.mask.shape:
            raise InvalidArgumentError(
                f"coil grid {self.coils.shape} and mask grid {self.mask.shape} disagree"
            )

    @property
    def shape(self):
        return self.mask.shape

    @property
    def n_coils(self) -> int:
        return self.coils.n_coils


def apply_forward(system: MultiCoilSystem, x: np.ndarray) -> np.ndarray:
    """Per-coil sampled k-space of image x, shape (n_coils, H, W).

    Unsampled locations are zero.
    """
    x = as_complex_image(x)
    if x.shape != system.shape:
        raise InvalidArgumentError(
            f"image shape {x.shape} does not match system grid {system.shape}"
        )
    out = np.empty((system.n_coils,) + system.shape, dtype=np.complex128)
    keep = system.mask.keep
    for c in range(system.n_coils):
        out[c] = np.where(keep, fft2c(system.coils.maps[c] * x), 0.0)
    return out


def apply_adjoint(system: MultiCoilSystem, y: np.ndarray) -> np.ndarray:
    """Adjoint of apply_forward: sum of conj-coil-weighted inverse FFTs."""
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim != 3 or y.shape[0] != system.n_coils:
        raise InvalidArgumentError(
            f"expected {system.n_coils} coil k-space grids, got shape {y.shape}"
        )
    if y.shape[1:] != system.shape:
        raise InvalidArgumentError(
            f"k-space grid {y.shape[1:]} does not match system grid {system.shape}"
        )
    keep = system.mask.keep
    out = np.zeros(system.shape, dtype=np.complex128)
    for c in range(system.n_coils):
        out += np.conj(system.coils.maps[c]) * ifft2c(np.where(keep, y[c], 0.0))
    return out


def apply_normal(system: MultiCoilSystem, x: np.ndarray) -> np.ndarray:
    """The self-adjoint PSD composition adjoint(forward(x))."""
    return apply_adjoint(system, apply_forward(system, x))


def zero_filled_recon(system: MultiCoilSystem, y: np.ndarray) -> np.ndarray:
    """Adjoint reconstruction with unsampled k-space treated as zero."""
    return apply_adjoint(system, y)
