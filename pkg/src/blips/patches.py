"""Overlapping patch extraction/aggregation and the overcomplete IDCT init.

Patches are extracted at stride 1 with periodic wrap, so every pixel lies
in exactly r = patch_side^2 patches and aggregate(extract(x)) == r * x.
Patch j (column j of the patch matrix) is the row-major vectorized
patch anchored at pixel j (row-major anchor order).
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidArgumentError
from .fourier import as_complex_image


@dataclass(frozen=True)
class PatchConfig:
    patch_side: int = 6
    stride: int = 1
    boundary: str = "wrap"

    def __post_init__(self):
        if self.patch_side < 1:
            raise InvalidArgumentError("patch_side must be >= 1")
        if self.stride != 1:
            raise InvalidArgumentError("only stride 1 is supported")
        if self.boundary != "wrap":
            raise InvalidArgumentError("only periodic ('wrap') boundaries are supported")

    @property
    def patch_len(self) -> int:
        return self.patch_side * self.patch_side


def extract_patches(x: np.ndarray, cfg: PatchConfig) -> np.ndarray:
    """Patch matrix of shape (patch_len, H*W)."""
    x = as_complex_image(x)
    if cfg.patch_side > min(x.shape):
        raise InvalidArgumentError(
            f"patch_side {cfg.patch_side} exceeds image extent {min(x.shape)}"
        )
    return _kernels.extract_patches(x, cfg.patch_side)


def aggregate_patches(pmat: np.ndarray, cfg: PatchConfig, height: int, width: int) -> np.ndarray:
    """Adjoint of extract_patches: add each patch back at its anchor."""
    pmat = np.ascontiguousarray(np.asarray(pmat), dtype=np.complex128)
    if pmat.ndim != 2 or pmat.shape != (cfg.patch_len, height * width):
        raise InvalidArgumentError(
            f"patch matrix shape {pmat.shape} does not match "
            f"({cfg.patch_len}, {height * width})"
        )
    return _kernels.aggregate_patches(pmat, cfg.patch_side, height, width)


def _idct_1d(n_rows: int, n_cols: int) -> np.ndarray:
    """First n_rows rows of the n_cols-point orthonormal inverse DCT-II."""
    i = np.arange(n_rows)[:, None]
    k = np.arange(n_cols)[None, :]
    mat = np.cos(np.pi * (2 * i + 1) * k / (2 * n_cols))
    mat *= np.sqrt(2.0 / n_cols)
    mat[:, 0] *= np.sqrt(0.5)
    return mat


def init_overcomplete_idct(r: int, n_atoms: int) -> np.ndarray:
    """Separable overcomplete inverse-DCT dictionary with unit-norm atoms.

    r and n_atoms must be perfect squares.  When r == n_atoms this is the
    orthonormal 2D inverse DCT basis; the first atom is always the
    constant atom.
    """
    sr = int(round(np.sqrt(r)))
    su = int(round(np.sqrt(n_atoms)))
    if sr * sr != r or su * su != n_atoms:
        raise InvalidArgumentError(
            f"patch length {r} and atom count {n_atoms} must be perfect squares"
        )
    if su < sr:
        raise InvalidArgumentError("atom count must be at least the patch length")
    base = _idct_1d(sr, su)
    atoms = np.kron(base, base)
    atoms = atoms / np.linalg.norm(atoms, axis=0, keepdims=True)
    return np.ascontiguousarray(atoms, dtype=np.complex128)
