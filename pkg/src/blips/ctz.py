"""The .ctz tensor file format and simple image previews.

A .ctz file is one JSON header line, a newline, then the raw payload in
little-endian order::

    {"dtype": "c64", "shape": [4, 64, 64], "version": 1}\n<payload bytes>

Supported dtypes: ``c64`` (interleaved float32 real/imag pairs), ``f32``
(float32) and ``b8`` (one byte per element, 0 or 1).  Previews are written
as 8-bit binary PGM (images) or PBM (masks).
"""

import json

import numpy as np

from .errors import InvalidArgumentError

_DTYPES = {
    "c64": np.dtype("<c8"),
    "f32": np.dtype("<f4"),
    "b8": np.dtype("<u1"),
}


def _dtype_tag(arr: np.ndarray) -> str:
    if np.iscomplexobj(arr):
        return "c64"
    if arr.dtype == np.bool_ or arr.dtype.kind == "u" and arr.dtype.itemsize == 1:
        return "b8"
    if arr.dtype.kind in "fiu":
        return "f32"
    raise InvalidArgumentError(f"no .ctz dtype for array of dtype {arr.dtype}")


def save_ctz(path, arr: np.ndarray) -> None:
    """Write ``arr`` to ``path``, casting to the closest .ctz dtype."""
    arr = np.asarray(arr)
    tag = _dtype_tag(arr)
    payload = np.ascontiguousarray(arr.astype(_DTYPES[tag], copy=False))
    header = json.dumps(
        {"dtype": tag, "shape": list(arr.shape), "version": 1}, sort_keys=True
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(b"\n")
        fh.write(payload.tobytes())


def load_ctz(path) -> np.ndarray:
    """Read a .ctz file. b8 tensors come back as boolean arrays."""
    with open(path, "rb") as fh:
        header_line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(header_line.decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InvalidArgumentError(f"bad .ctz header in {path}: {exc}") from exc
    if header.get("version") != 1:
        raise InvalidArgumentError(f"unsupported .ctz version in {path}")
    tag = header.get("dtype")
    if tag not in _DTYPES:
        raise InvalidArgumentError(f"unsupported .ctz dtype {tag!r} in {path}")
    shape = tuple(header.get("shape", ()))
    arr = np.frombuffer(payload, dtype=_DTYPES[tag])
    if arr.size != int(np.prod(shape, dtype=np.int64)):
        raise InvalidArgumentError(f"payload size mismatch in {path}")
    arr = arr.reshape(shape)
    if tag == "b8":
        return arr.astype(bool)
    return arr.copy()


def to_gray8(img: np.ndarray) -> np.ndarray:
    """Min-max window a real 2D array into uint8 gray levels."""
    img = np.asarray(img, dtype=np.float64)
    lo, hi = float(img.min()), float(img.max())
    if hi <= lo:
        return np.zeros(img.shape, dtype=np.uint8)
    return np.round(255.0 * (img - lo) / (hi - lo)).astype(np.uint8)


def save_pgm(path, img: np.ndarray) -> None:
    """Write a real 2D array as a binary PGM preview (min-max windowed)."""
    gray = to_gray8(img)
    h, w = gray.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(gray.tobytes())


def save_pbm(path, mask: np.ndarray) -> None:
    """Write a boolean 2D array as a binary PBM preview (1 = sampled)."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    # PBM convention: 1 is black; invert so sampled locations render white.
    bits = np.packbits(~mask, axis=1)
    with open(path, "wb") as fh:
        fh.write(f"P4\n{w} {h}\n".encode("ascii"))
        fh.write(bits.tobytes())
