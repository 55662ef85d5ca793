"""Blind dictionary-learning reconstruction.

Alternates inner sweeps of sum-of-outer-products dictionary learning on
the patches of the current image with a conjugate-gradient data-consistent
image update.  With stride-1 periodic patches the normal operator of the
image update is nu * A^H A + r * I, which is well conditioned.
"""

from dataclasses import dataclass

import numpy as np

from .cg import cg_solve
from .errors import InvalidArgumentError
from .fourier import (
    MultiCoilSystem,
    apply_adjoint,
    apply_forward,
    apply_normal,
    zero_filled_recon,
)
from .patches import PatchConfig, aggregate_patches, extract_patches, init_overcomplete_idct
from .soupdil import dl_objective, soup_dil_inner_iteration


@dataclass(frozen=True)
class ReconConfig:
    """Knobs of the blind reconstruction loop.

    Defaults follow the reference operating point: 20 outer iterations of
    5 dictionary-learning sweeps with threshold 0.2 and data weight 8e-4,
    a 36x144 dictionary on 6x6 patches.  Note the data weight is
    convention dependent (it balances against the patch term r*I under a
    unitary FFT); desk-scale experiment configs retune it.
    """

    nu: float = 8e-4
    lam: float = 0.2
    outer_iters: int = 20
    inner_iters: int = 5
    cg_iters: int = 30
    cg_tol: float = 1e-6
    n_atoms: int = 144

    def __post_init__(self):
        if self.nu < 0:
            raise InvalidArgumentError("nu must be >= 0")
        if self.lam <= 0:
            raise InvalidArgumentError("lam must be positive")
        if self.outer_iters < 0:
            raise InvalidArgumentError("outer_iters must be >= 0")
        if self.inner_iters < 1:
            raise InvalidArgumentError("inner_iters must be >= 1")
        if self.cg_iters < 1:
            raise InvalidArgumentError("cg_iters must be >= 1")
        if self.cg_tol <= 0:
            raise InvalidArgumentError("cg_tol must be positive")


def blind_image_update(system: MultiCoilSystem, y, D, Z, cfg: ReconConfig,
                       pcfg: PatchConfig, x0=None) -> np.ndarray:
    """Data-consistent image update for fixed dictionary and codes.

    Solves (nu A^H A + r I) x = nu A^H y + aggregate(D Z) by CG.
    """
    h, w = system.shape
    r = pcfg.patch_len
    rhs = aggregate_patches(D @ Z, pcfg, h, w)
    if cfg.nu > 0:
        rhs = rhs + cfg.nu * apply_adjoint(system, y)

        def apply_m(v):
            return cfg.nu * apply_normal(system, v) + r * v

    else:

        def apply_m(v):
            return r * v

    x, _ = cg_solve(apply_m, rhs, tol=cfg.cg_tol, max_iter=cfg.cg_iters, x0=x0)
    return x


def full_objective(system, y, x, P, D, Z, cfg: ReconConfig) -> float:
    """Data-fidelity term plus the dictionary-learning regularizer."""
    fit = dl_objective(P, D, Z, cfg.lam)
    resid = apply_forward(system, x) - y
    return float(cfg.nu * np.sum(np.abs(resid) ** 2) + fit)


def _blind_loop(system, y, cfg, pcfg, update_atoms, trace=None):
    x = zero_filled_recon(system, y)
    D = init_overcomplete_idct(pcfg.patch_len, cfg.n_atoms)
    Z = np.zeros((cfg.n_atoms, x.size), dtype=np.complex128)
    for _ in range(cfg.outer_iters):
        x, D, Z = blind_outer_iteration(
            system, y, x, D, Z, cfg, pcfg, update_atoms=update_atoms, trace=trace
        )
    return x, D, Z


def blind_outer_iteration(system, y, x, D, Z, cfg: ReconConfig, pcfg: PatchConfig,
                          update_atoms: bool = True, trace=None):
    """One outer iteration: inner DL sweeps on patches of x, then the
    image update.  Returns (x_next, D_next, Z_next)."""
    P = extract_patches(x, pcfg)
    if trace is not None:
        trace.append(full_objective(system, y, x, P, D, Z, cfg))
    for _ in range(cfg.inner_iters):
        D, Z = soup_dil_inner_iteration(P, D, Z, cfg.lam, update_atoms=update_atoms)
    x_next = blind_image_update(system, y, D, Z, cfg, pcfg, x0=x)
    return x_next, D, Z


def blind_recon(system: MultiCoilSystem, y, cfg: ReconConfig, pcfg: PatchConfig) -> np.ndarray:
    """Blind dictionary-learning reconstruction from a zero-filled start."""
    x, _, _ = _blind_loop(system, y, cfg, pcfg, update_atoms=True)
    return x


def fixed_dict_recon(system: MultiCoilSystem, y, cfg: ReconConfig, pcfg: PatchConfig) -> np.ndarray:
    """Like blind_recon but the dictionary stays at its IDCT initialization."""
    x, _, _ = _blind_loop(system, y, cfg, pcfg, update_atoms=False)
    return x
