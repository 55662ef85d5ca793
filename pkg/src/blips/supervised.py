"""Unrolled supervised reconstruction and the blind/supervised pipelines.

One supervised iteration applies the residual denoiser and then a
CG-solved data-consistency step:

    x_next = argmin_x  nu_s * sum_c ||A_c x - y_c||^2 + ||x - (D(x_l) + x_l)||^2

The denoiser weights are shared across all unrolled iterations.  Three
pipeline flavors combine this with blind dictionary learning:

    p1: zero-filled -> K blind iterations -> L supervised iterations
    p2: like p1, but each iteration anchors data consistency to the blind
        output directly (no residual connection to the current iterate)
    p3: L1 supervised iterations -> exactly one blind iteration ->
        L2 supervised iterations, with separate weights per stage
"""

from dataclasses import dataclass, field

import numpy as np

from .blind import ReconConfig, blind_outer_iteration, blind_recon
from .cg import cg_solve
from .denoiser import DenoiserParams, _forward_cached, denoiser_backward
from .errors import InvalidArgumentError
from .fourier import MultiCoilSystem, apply_adjoint, apply_normal, zero_filled_recon
from .patches import PatchConfig, init_overcomplete_idct


@dataclass(frozen=True)
class SupervisedConfig:
    """Unrolled module knobs: data weight 2, reference unroll count 6
    (desk-scale default 3 keeps finite-difference tests tractable)."""

    nu_s: float = 2.0
    unrolls: int = 3
    cg_iters: int = 30
    cg_tol: float = 1e-6

    def __post_init__(self):
        if self.nu_s < 0:
            raise InvalidArgumentError("nu_s must be >= 0")
        if self.unrolls < 0:
            raise InvalidArgumentError("unrolls must be >= 0")


P1, P2, P3 = "p1", "p2", "p3"


@dataclass(frozen=True)
class PipelineSpec:
    kind: str
    blind: ReconConfig = field(default_factory=ReconConfig)
    patch: PatchConfig = field(default_factory=PatchConfig)
    supervised: SupervisedConfig = field(default_factory=SupervisedConfig)
    supervised2: SupervisedConfig | None = None

    def __post_init__(self):
        if self.kind not in (P1, P2, P3):
            raise InvalidArgumentError(f"unknown pipeline kind {self.kind!r}")
        if self.kind == P3 and self.blind.outer_iters != 1:
            raise InvalidArgumentError("p3 uses exactly one blind iteration between stages")

    @property
    def stage2(self) -> SupervisedConfig:
        return self.supervised2 if self.supervised2 is not None else self.supervised


def p3_default_blind() -> ReconConfig:
    """Single blind iteration operating point used between p3 stages."""
    return ReconConfig(nu=0.5, lam=0.8, outer_iters=1)


def _dc_operator(system, nu_s):
    def apply_m(v):
        return nu_s * apply_normal(system, v) + v

    return apply_m


def supervised_iteration(params: DenoiserParams, x, system: MultiCoilSystem, y,
                         scfg: SupervisedConfig) -> np.ndarray:
    """One residual-denoiser + data-consistency step."""
    x_next, _ = _supervised_iteration_cached(params, x, system, y, scfg)
    return x_next


def _supervised_iteration_cached(params, x, system, y, scfg, anchor=None):
    """Forward step keeping what the backward pass needs.

    anchor=None gives the residual form z = x + D(x); an explicit anchor
    gives the p2 form z = anchor + D(x).
    """
    residual, dcache = _forward_cached(params, x)
    z = (x if anchor is None else anchor) + residual
    rhs = z if scfg.nu_s == 0 else scfg.nu_s * apply_adjoint(system, y) + z
    x_next, _ = cg_solve(
        _dc_operator(system, scfg.nu_s), rhs, tol=scfg.cg_tol, max_iter=scfg.cg_iters
    )
    return x_next, (x, dcache)


def _supervised_iteration_backward(params, system, scfg, upstream, cache,
                                   residual_connection=True):
    """Map an upstream gradient through the CG solve and the denoiser.

    Returns (param grads, gradient w.r.t. the iteration input).
    """
    x_in, dcache = cache
    v, _ = cg_solve(
        _dc_operator(system, scfg.nu_s), upstream, tol=scfg.cg_tol, max_iter=scfg.cg_iters
    )
    grads, gx = denoiser_backward(params, x_in, v, cache=dcache)
    if residual_connection:
        gx = gx + v
    return grads, gx


def supervised_iteration_backward(params, x, system, y, scfg, upstream):
    """Standalone backward of supervised_iteration at input x."""
    _, cache = _supervised_iteration_cached(params, x, system, y, scfg)
    return _supervised_iteration_backward(params, system, scfg, upstream, cache)


def supervised_stage_forward(params, x0, system, y, scfg, unrolls=None, anchor=None):
    """Run the unrolled stage; returns (x_L, caches) for backprop."""
    n = scfg.unrolls if unrolls is None else unrolls
    x = x0
    caches = []
    for _ in range(n):
        x, cache = _supervised_iteration_cached(params, x, system, y, scfg, anchor=anchor)
        caches.append(cache)
    return x, caches


def supervised_stage_backward(params, system, scfg, caches, upstream, anchor=None):
    """Accumulate weight-shared gradients across all unrolled iterations."""
    total = params.zeros_like()
    g = upstream
    for cache in reversed(caches):
        grads, g = _supervised_iteration_backward(
            params, system, scfg, g, cache, residual_connection=anchor is None
        )
        for (tw, tb), (pw, pb) in zip(total.layers, grads.layers):
            tw += pw
            tb += pb
    return total, g


def pipeline_stage_input(spec: PipelineSpec, system, y):
    """The image fed to the (first) supervised stage: blind output for
    p1/p2 with K > 0, zero-filled otherwise."""
    if spec.kind in (P1, P2) and spec.blind.outer_iters > 0:
        return blind_recon(system, y, spec.blind, spec.patch)
    return zero_filled_recon(system, y)


def run_pipeline(spec: PipelineSpec, params, system: MultiCoilSystem, y) -> np.ndarray:
    """Reconstruct with a trained pipeline.

    params is a DenoiserParams for p1/p2 and a (theta1, theta2) pair for p3.
    """
    if spec.kind == P3:
        theta1, theta2 = params
        x = zero_filled_recon(system, y)
        x, _ = supervised_stage_forward(theta1, x, system, y, spec.supervised)
        x = run_p3_blind_stage(spec, system, y, x)
        x, _ = supervised_stage_forward(theta2, x, system, y, spec.stage2)
        return x
    x = pipeline_stage_input(spec, system, y)
    anchor = x if spec.kind == P2 else None
    x_out, _ = supervised_stage_forward(params, x, system, y, spec.supervised, anchor=anchor)
    return x_out


def run_p3_blind_stage(spec: PipelineSpec, system, y, x) -> np.ndarray:
    """The single blind iteration of p3, warm-started at x."""
    D = init_overcomplete_idct(spec.patch.patch_len, spec.blind.n_atoms)
    Z = np.zeros((spec.blind.n_atoms, x.size), dtype=np.complex128)
    x_next, _, _ = blind_outer_iteration(system, y, x, D, Z, spec.blind, spec.patch)
    return x_next
