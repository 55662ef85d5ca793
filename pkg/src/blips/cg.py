"""Conjugate gradient for self-adjoint positive-definite image operators."""

from dataclasses import dataclass

import numpy as np

from .errors import NumericFailureError


@dataclass(frozen=True)
class CgReport:
    iterations: int
    relative_residual: float


def cg_solve(apply_m, rhs: np.ndarray, tol: float = 1e-6, max_iter: int = 30,
             x0: np.ndarray | None = None):
    """Solve apply_m(x) = rhs to a relative residual of tol.

    apply_m must be self-adjoint positive definite on the image space.
    Returns (x, CgReport).  A zero rhs returns zeros immediately; x0 warm
    starts the iteration.
    """
    rhs = np.asarray(rhs, dtype=np.complex128)
    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm == 0.0:
        return np.zeros_like(rhs), CgReport(0, 0.0)
    if x0 is None:
        x = np.zeros_like(rhs)
        r = rhs.copy()
    else:
        x = np.array(x0, dtype=np.complex128)
        r = rhs - apply_m(x)
    p = r.copy()
    rs = float(np.vdot(r, r).real)
    report = CgReport(0, float(np.sqrt(rs)) / rhs_norm)
    if report.relative_residual <= tol:
        return x, report
    for k in range(1, max_iter + 1):
        mp = apply_m(p)
        p_mp = float(np.vdot(p, mp).real)
        if not np.isfinite(p_mp):
            raise NumericFailureError("CG operator produced non-finite values")
        if p_mp <= 0.0:
            # Search direction annihilated; operator not PD at working precision.
            report = CgReport(k, float(np.sqrt(rs)) / rhs_norm)
            break
        alpha = rs / p_mp
        x += alpha * p
        r -= alpha * mp
        rs_new = float(np.vdot(r, r).real)
        report = CgReport(k, float(np.sqrt(rs_new)) / rhs_norm)
        if report.relative_residual <= tol:
            break
        p = r + (rs_new / rs) * p
        rs = rs_new
    if not np.all(np.isfinite(x)):
        raise NumericFailureError("CG produced a non-finite iterate")
    return x, report
