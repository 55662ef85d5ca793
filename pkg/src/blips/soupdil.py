"""Sum-of-outer-products blind dictionary learning (atom-wise BCD).

The dictionary D (r x U, unit-norm atoms) and sparse codes Z (U x N) are
plain complex matrices.  One inner iteration sweeps the atoms
sequentially; for each atom it re-solves the codes of that atom's row by
hard thresholding and then re-fits the atom as a normalized rank-one
factor of the residual.  The patch-domain objective

    sum_j ||p_j - D z_j||^2 + lam^2 * ||z_j||_0

never increases across a sweep.
"""

import numpy as np

from . import _kernels
from .errors import InvalidArgumentError


def validate_dictionary(D: np.ndarray, tol: float = 1e-10) -> None:
    """Raise unless every atom has unit l2 norm within tol."""
    norms = np.linalg.norm(D, axis=0)
    worst = float(np.max(np.abs(norms - 1.0)))
    if worst > tol:
        raise InvalidArgumentError(f"dictionary atoms not unit norm (max deviation {worst:.2e})")


def soup_dil_inner_iteration(P, D, Z, lam, update_atoms: bool = True):
    """One full atom sweep; returns updated (D, Z) without mutating inputs.

    With update_atoms=False only the sparse codes move (fixed-dictionary
    variant).
    """
    if lam <= 0:
        raise InvalidArgumentError("threshold lam must be positive")
    P = np.ascontiguousarray(P, dtype=np.complex128)
    D = np.ascontiguousarray(D, dtype=np.complex128)
    Z = np.ascontiguousarray(Z, dtype=np.complex128)
    if D.shape[0] != P.shape[0] or Z.shape != (D.shape[1], P.shape[1]):
        raise InvalidArgumentError(
            f"shape mismatch: P {P.shape}, D {D.shape}, Z {Z.shape}"
        )
    D = D.copy()
    Z = Z.copy()
    _kernels.soup_sweep(P, D, Z, float(lam), update_atoms)
    return D, Z


def dl_objective(P, D, Z, lam) -> float:
    """Patch fit error plus the counting penalty lam^2 * nnz(Z)."""
    P = np.asarray(P)
    resid = P - D @ Z
    return float(np.sum(np.abs(resid) ** 2) + lam * lam * np.count_nonzero(Z))
