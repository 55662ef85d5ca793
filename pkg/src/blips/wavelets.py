"""Orthogonal Daubechies-4 (8-tap) discrete wavelet transform, periodic.

Multi-level 2D Mallat decomposition on a single array of the same shape
as the (internally zero-padded) input.  The transform is an isometry:
coefficient and image l2 norms agree to machine precision, and
idwt2(dwt2(x)) recovers x exactly.
"""

import numpy as np

from .errors import InvalidArgumentError

# Orthonormal Daubechies lowpass filter with four vanishing moments.
_DB4_LO = np.array(
    [
        0.230377813308855230,
        0.714846570552541500,
        0.630880767929590400,
        -0.027983769416983850,
        -0.187034811718881140,
        0.030841381835986965,
        0.032883011666982945,
        -0.010597401784997278,
    ]
)
_DB4_HI = (_DB4_LO[::-1] * (-1.0) ** np.arange(len(_DB4_LO))).copy()


def _analysis_1d(a: np.ndarray, axis: int) -> np.ndarray:
    """One periodic analysis step along axis: [lowpass | highpass] halves."""
    a = np.moveaxis(a, axis, 0)
    n = a.shape[0]
    taps = len(_DB4_LO)
    idx = (2 * np.arange(n // 2)[:, None] + np.arange(taps)[None, :]) % n
    windows = a[idx]  # (n//2, taps, ...)
    lo = np.tensordot(_DB4_LO, np.moveaxis(windows, 1, 0), axes=(0, 0))
    hi = np.tensordot(_DB4_HI, np.moveaxis(windows, 1, 0), axes=(0, 0))
    return np.moveaxis(np.concatenate([lo, hi], axis=0), 0, axis)


def _synthesis_1d(c: np.ndarray, axis: int) -> np.ndarray:
    """Inverse of _analysis_1d."""
    c = np.moveaxis(c, axis, 0)
    n = c.shape[0]
    half = n // 2
    taps = len(_DB4_LO)
    lo, hi = c[:half], c[half:]
    out = np.zeros_like(c)
    idx = (2 * np.arange(half)[:, None] + np.arange(taps)[None, :]) % n
    flat_idx = idx.ravel()
    contrib = (
        lo[:, None] * _DB4_LO.reshape(1, taps, *([1] * (c.ndim - 1)))
        + hi[:, None] * _DB4_HI.reshape(1, taps, *([1] * (c.ndim - 1)))
    )
    np.add.at(out, flat_idx, contrib.reshape(half * taps, *c.shape[1:]))
    return np.moveaxis(out, 0, axis)


def _pad_shape(shape, levels: int):
    m = 2 ** levels
    return tuple(-(-s // m) * m for s in shape)


def dwt2(x: np.ndarray, levels: int = 3) -> np.ndarray:
    """Multi-level 2D DWT.  Input is zero-padded up to a multiple of
    2**levels per axis; the coefficient array has the padded shape."""
    if levels < 1:
        raise InvalidArgumentError("levels must be >= 1")
    x = np.asarray(x)
    ph, pw = _pad_shape(x.shape, levels)
    if min(ph, pw) // 2 ** (levels - 1) < 2:
        raise InvalidArgumentError("image too small for the requested level count")
    c = np.zeros((ph, pw), dtype=np.result_type(x.dtype, np.float64))
    c[: x.shape[0], : x.shape[1]] = x
    h, w = ph, pw
    for _ in range(levels):
        band = _analysis_1d(c[:h, :w], 0)
        c[:h, :w] = _analysis_1d(band, 1)
        h //= 2
        w //= 2
    return c

def idwt2(c: np.ndarray, levels: int = 3, orig_shape=None) -> np.ndarray:
    """Inverse multi-level 2D DWT; crops to orig_shape when given."""
    c = np.array(c)
    ph, pw = c.shape
    sizes = [(ph // 2 ** l, pw // 2 ** l) for l in range(levels)]
    for h, w in reversed(sizes):
        band = _synthesis_1d(c[:h, :w], 1)
        c[:h, :w] = _synthesis_1d(band, 0)
    if orig_shape is not None:
        c = c[: orig_shape[0], : orig_shape[1]]
    return c
