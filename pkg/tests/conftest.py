import numpy as np
import pytest

from blips.fourier import CoilSet, MultiCoilSystem, SamplingMask
from blips.phantom import make_coils


def random_image(rng, h, w):
    return rng.standard_normal((h, w)) + 1j * rng.standard_normal((h, w))


def random_mask(rng, h, w, density=0.4):
    keep = rng.random((h, w)) < density
    keep[h // 2, w // 2] = True
    return SamplingMask(keep)


def small_system(seed=0, h=16, w=16, n_coils=3, density=0.4, full=False):
    rng = np.random.default_rng(seed)
    coils = make_coils(h, w, n_coils, seed=seed)
    if full:
        mask = SamplingMask(np.ones((h, w), dtype=bool))
    else:
        mask = random_mask(rng, h, w, density)
    return MultiCoilSystem(coils, mask)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
