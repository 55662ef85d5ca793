"""Hot-kernel dispatch: numba-jitted fast path with a pure-numpy fallback.

The numba path is the default.  Set ``BLIPS_DISABLE_NUMBA=1`` (before
import) to force the numpy implementations, e.g. on platforms without a
working numba install.  ``benchmarks/bench_kernels.py`` compares the two.
"""

import os

from . import numpy_impl

_disable = os.environ.get("BLIPS_DISABLE_NUMBA", "").strip().lower()
if _disable in ("1", "true", "yes", "on"):
    _impl = numpy_impl
else:
    try:
        from . import numba_impl as _impl
    except ImportError:  # pragma: no cover - numba missing entirely
        _impl = numpy_impl

BACKEND = "numpy" if _impl is numpy_impl else "numba"

soup_sweep = _impl.soup_sweep
extract_patches = _impl.extract_patches
aggregate_patches = _impl.aggregate_patches
conv3x3_forward = _impl.conv3x3_forward
conv3x3_backward = _impl.conv3x3_backward
dart_throw = _impl.dart_throw
