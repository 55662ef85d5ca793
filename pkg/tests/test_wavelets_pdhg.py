import numpy as np
import pytest

from blips.errors import InvalidArgumentError
from blips.fourier import MultiCoilSystem, SamplingMask, apply_forward, zero_filled_recon
from blips.pdhg import cs_pdhg_recon, estimate_opnorm
from blips.phantom import make_coils
from blips.wavelets import dwt2, idwt2

from conftest import random_image, small_system


def test_orthogonality_on_64(rng):
    x = random_image(rng, 64, 64)
    c = dwt2(x, levels=3)
    assert abs(np.linalg.norm(c) - np.linalg.norm(x)) <= 1e-10 * np.linalg.norm(x)
    back = idwt2(c, levels=3, orig_shape=(64, 64))
    assert np.max(np.abs(back - x)) < 1e-10


def test_perfect_reconstruction_with_padding(rng):
    x = random_image(rng, 50, 37)
    c = dwt2(x, levels=3)
    assert c.shape == (56, 40)
    back = idwt2(c, levels=3, orig_shape=(50, 37))
    assert np.max(np.abs(back - x)) < 1e-10
    # zero padding keeps the norm; the transform stays an isometry
    assert abs(np.linalg.norm(c) - np.linalg.norm(x)) <= 1e-10 * np.linalg.norm(x)


def test_dwt_is_linear_isometry_adjoint(rng):
    # <Wx, c> == <x, W^T c> with W^T = crop of inverse (orthogonal case)
    x = random_image(rng, 32, 32)
    c = random_image(rng, 32, 32)
    lhs = complex(np.vdot(c, dwt2(x, 2)))
    rhs = complex(np.vdot(idwt2(c, 2, orig_shape=(32, 32)), x))
    assert abs(lhs - rhs) <= 1e-10 * np.linalg.norm(x) * np.linalg.norm(c)


def test_levels_validation():
    with pytest.raises(InvalidArgumentError):
        dwt2(np.zeros((8, 8)), levels=0)
    with pytest.raises(InvalidArgumentError):
        dwt2(np.zeros((2, 2)), levels=3)


def test_opnorm_estimate_full_mask_unit():
    system = small_system(seed=1, h=16, w=16, full=True)
    assert abs(estimate_opnorm(system) - 1.0) < 1e-6


def test_pdhg_unregularized_full_sampling_matches_zero_filled(rng):
    system = small_system(seed=8, h=16, w=16, full=True)
    x_true = random_image(rng, 16, 16)
    y = apply_forward(system, x_true)
    x = cs_pdhg_recon(system, y, weight=0.0, iters=100)
    zf = zero_filled_recon(system, y)
    assert np.linalg.norm(x - zf) / np.linalg.norm(zf) < 1e-4


def test_pdhg_small_weight_near_identity(rng):
    system = small_system(seed=2, h=32, w=32, full=True)
    x_true = random_image(rng, 32, 32)
    y = apply_forward(system, x_true)
    x = cs_pdhg_recon(system, y, weight=1e-7, iters=30)
    assert np.linalg.norm(x - x_true) / np.linalg.norm(x_true) < 1e-3


def test_pdhg_rejects_negative_weight(rng):
    system = small_system(seed=2, h=16, w=16)
    with pytest.raises(InvalidArgumentError):
        cs_pdhg_recon(system, np.zeros((system.n_coils, 16, 16), complex), weight=-1.0)


def test_pdhg_improves_over_zero_filled_undersampled():
    from blips.masks import MaskSpec, VARIABLE_DENSITY_1D, generate_mask
    from blips.metrics import psnr
    from blips.phantom import default_phantom_spec, make_phantom, simulate_kspace

    h = w = 64
    coils = make_coils(h, w, 4, seed=1)
    mask = generate_mask(MaskSpec(VARIABLE_DENSITY_1D, h, w, 4.0, acs_lines=5, seed=1))
    system = MultiCoilSystem(coils, mask)
    x = make_phantom(default_phantom_spec(h, w, seed=9))
    y = simulate_kspace(x, system, 0.001, seed=9)
    x_cs = cs_pdhg_recon(system, y, weight=2e-3, iters=60)
    assert psnr(x_cs, x) > psnr(zero_filled_recon(system, y), x)
