import numpy as np
import pytest

from blips.blind import ReconConfig
from blips.denoiser import DenoiserConfig, denoiser_forward, init_denoiser
from blips.errors import InvalidArgumentError
from blips.fourier import apply_forward, zero_filled_recon
from blips.patches import PatchConfig
from blips.supervised import (
    P1,
    P2,
    P3,
    PipelineSpec,
    SupervisedConfig,
    p3_default_blind,
    run_pipeline,
    supervised_iteration,
    supervised_iteration_backward,
    supervised_stage_backward,
    supervised_stage_forward,
)
from blips.training import loss_cbeta, loss_cbeta_grad

from conftest import random_image, small_system


def _setup(rng, h=8, w=8, full=False, seed=0):
    system = small_system(seed=seed, h=h, w=w, n_coils=2, full=full)
    x_true = random_image(rng, h, w)
    y = apply_forward(system, x_true)
    return system, x_true, y


def test_nu_zero_reduces_to_residual_denoiser(rng):
    system, x_true, y = _setup(rng)
    params = init_denoiser(DenoiserConfig(channels=4, seed=1))
    scfg = SupervisedConfig(nu_s=0.0, cg_tol=1e-12, cg_iters=50)
    x_l = random_image(rng, 8, 8)
    out = supervised_iteration(params, x_l, system, y, scfg)
    expected = x_l + denoiser_forward(params, x_l)
    assert np.max(np.abs(out - expected)) < 1e-10


def test_large_nu_full_sampling_recovers_truth(rng):
    system, x_true, y = _setup(rng, full=True)
    params = init_denoiser(DenoiserConfig(channels=4, seed=2)).zeros_like()
    scfg = SupervisedConfig(nu_s=1e6, cg_tol=1e-12, cg_iters=80)
    out = supervised_iteration(params, random_image(rng, 8, 8), system, y, scfg)
    assert np.linalg.norm(out - x_true) / np.linalg.norm(x_true) < 1e-3


def test_default_data_weight_is_two():
    assert SupervisedConfig().nu_s == 2.0


def test_backward_nu_zero_is_identity_plus_denoiser(rng):
    from blips.denoiser import denoiser_backward

    system, _, y = _setup(rng)
    params = init_denoiser(DenoiserConfig(channels=4, seed=3))
    scfg = SupervisedConfig(nu_s=0.0, cg_tol=1e-12, cg_iters=50)
    x_l = random_image(rng, 8, 8)
    upstream = random_image(rng, 8, 8)
    grads, gx = supervised_iteration_backward(params, x_l, system, y, scfg, upstream)
    dgrads, dgx = denoiser_backward(params, x_l, upstream)
    assert np.max(np.abs(gx - (upstream + dgx))) < 1e-12
    for (gw, gb), (dw, db) in zip(grads.layers, dgrads.layers):
        assert np.allclose(gw, dw, atol=1e-12) and np.allclose(gb, db, atol=1e-12)


def test_zero_upstream_zero_gradients(rng):
    system, _, y = _setup(rng)
    params = init_denoiser(DenoiserConfig(channels=4, seed=5))
    scfg = SupervisedConfig(cg_tol=1e-10, cg_iters=60)
    grads, gx = supervised_iteration_backward(
        params, random_image(rng, 8, 8), system, y, scfg, np.zeros((8, 8), complex)
    )
    assert np.all(gx == 0)
    for gw, gb in grads.layers:
        assert np.all(gw == 0) and np.all(gb == 0)


def _stage_loss(params, x0, system, y, scfg, x_true, anchor=None):
    xl, _ = supervised_stage_forward(params, x0, system, y, scfg, anchor=anchor)
    return loss_cbeta(xl, x_true, 0.01)


def test_end_to_end_gradient_unrolled(rng):
    system, x_true, y = _setup(rng, seed=7)
    params = init_denoiser(DenoiserConfig(channels=4, seed=7))
    scfg = SupervisedConfig(nu_s=2.0, unrolls=2, cg_iters=200, cg_tol=1e-12)
    x0 = zero_filled_recon(system, y)
    xl, caches = supervised_stage_forward(params, x0, system, y, scfg)
    upstream = loss_cbeta_grad(xl, x_true, 0.01)
    grads, _ = supervised_stage_backward(params, system, scfg, caches, upstream)
    h = 1e-3
    worst = 0.0
    for _ in range(20):
        d = params.zeros_like()
        total = 0.0
        for dw, db in d.layers:
            dw += rng.standard_normal(dw.shape)
            db += rng.standard_normal(db.shape)
            total += np.sum(dw * dw) + np.sum(db * db)
        scale = np.sqrt(total)
        for dw, db in d.layers:
            dw /= scale
            db /= scale
        pp, pm = params.copy(), params.copy()
        for (w, b), (dw, db) in zip(pp.layers, d.layers):
            w += h * dw
            b += h * db
        for (w, b), (dw, db) in zip(pm.layers, d.layers):
            w -= h * dw
            b -= h * db
        fd = (
            _stage_loss(pp, x0, system, y, scfg, x_true)
            - _stage_loss(pm, x0, system, y, scfg, x_true)
        ) / (2 * h)
        an = sum(
            float(np.sum(gw * dw) + np.sum(gb * db))
            for (gw, gb), (dw, db) in zip(grads.layers, d.layers)
        )
        worst = max(worst, abs(fd - an) / max(abs(fd), 1e-12))
    assert worst <= 1e-3


def test_weight_sharing_sums_every_iteration(rng):
    """The stage backward equals the sum of per-iteration backward calls;
    dropping any iteration's contribution changes the gradient."""
    system, x_true, y = _setup(rng, seed=8)
    params = init_denoiser(DenoiserConfig(channels=4, seed=8))
    scfg = SupervisedConfig(nu_s=2.0, unrolls=3, cg_iters=200, cg_tol=1e-12)
    x0 = zero_filled_recon(system, y)
    xs = [x0]
    for _ in range(scfg.unrolls):
        xs.append(supervised_iteration(params, xs[-1], system, y, scfg))
    upstream = loss_cbeta_grad(xs[-1], x_true, 0.01)

    per_iter = []
    g = upstream
    for l in range(scfg.unrolls - 1, -1, -1):
        grads_l, g = supervised_iteration_backward(params, xs[l], system, y, scfg, g)
        per_iter.append(grads_l)
    manual = params.zeros_like()
    for grads_l in per_iter:
        for (tw, tb), (gw, gb) in zip(manual.layers, grads_l.layers):
            tw += gw
            tb += gb

    _, caches = supervised_stage_forward(params, x0, system, y, scfg)
    stage, _ = supervised_stage_backward(params, system, scfg, caches, upstream)
    for (mw, mb), (sw, sb) in zip(manual.layers, stage.layers):
        assert np.allclose(mw, sw, atol=1e-10)
        assert np.allclose(mb, sb, atol=1e-10)

    # zeroing one iteration's contribution changes the total
    for drop in range(scfg.unrolls):
        partial = params.zeros_like()
        for i, grads_l in enumerate(per_iter):
            if i == drop:
                continue
            for (tw, tb), (gw, gb) in zip(partial.layers, grads_l.layers):
                tw += gw
                tb += gb
        diff = max(
            float(np.max(np.abs(pw - sw)))
            for (pw, _), (sw, _) in zip(partial.layers, stage.layers)
        )
        assert diff > 1e-9


def test_p1_k0_byte_identical_to_strict_supervised(rng):
    for case in range(5):
        system, x_true, y = _setup(rng, seed=20 + case)
        params = init_denoiser(DenoiserConfig(channels=4, seed=case))
        scfg = SupervisedConfig(unrolls=2, cg_iters=40)
        spec = PipelineSpec(P1, ReconConfig(outer_iters=0), PatchConfig(patch_side=3),
                            scfg)
        via_pipeline = run_pipeline(spec, params, system, y)
        x0 = zero_filled_recon(system, y)
        strict, _ = supervised_stage_forward(params, x0, system, y, scfg)
        assert via_pipeline.tobytes() == strict.tobytes()


def test_p2_fixed_point_with_zero_denoiser(rng):
    system, x_true, y = _setup(rng, seed=30)
    params = init_denoiser(DenoiserConfig(channels=4, seed=0)).zeros_like()
    scfg = SupervisedConfig(nu_s=0.0, unrolls=4, cg_iters=50, cg_tol=1e-12)
    x_blind = random_image(rng, 8, 8)
    out, _ = supervised_stage_forward(params, x_blind, system, y, scfg, anchor=x_blind)
    assert np.max(np.abs(out - x_blind)) < 1e-10


def test_p3_spec_requires_single_blind_iteration():
    with pytest.raises(InvalidArgumentError):
        PipelineSpec(P3, ReconConfig(outer_iters=2), PatchConfig(), SupervisedConfig())
    blind = p3_default_blind()
    assert blind.outer_iters == 1
    assert blind.nu == 0.5 and blind.lam == 0.8


def test_p3_runs_and_uses_two_stage_params(rng):
    system, x_true, y = _setup(rng, h=16, w=16, seed=31)
    theta1 = init_denoiser(DenoiserConfig(channels=4, seed=1))
    theta2 = init_denoiser(DenoiserConfig(channels=4, seed=2))
    blind = ReconConfig(nu=0.5, lam=0.8, outer_iters=1, inner_iters=2, n_atoms=16)
    spec = PipelineSpec(P3, blind, PatchConfig(patch_side=4),
                        SupervisedConfig(unrolls=1, cg_iters=40),
                        SupervisedConfig(unrolls=2, cg_iters=40))
    out = run_pipeline(spec, (theta1, theta2), system, y)
    assert out.shape == (16, 16)
    assert np.all(np.isfinite(out))
    # swapping stage weights changes the output
    out_swapped = run_pipeline(spec, (theta2, theta1), system, y)
    assert not np.allclose(out, out_swapped)
