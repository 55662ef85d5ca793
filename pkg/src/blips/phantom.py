"""Synthetic multicoil data: phantoms, coil maps, noise, planted features.

Everything here is seeded and deterministic.  Phantoms are sums of
ellipses plus a band-limited texture, carried on a smooth random phase;
coil maps are complex Gaussian bumps anchored at border points and then
sum-of-squares normalized.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .fourier import CoilSet, MultiCoilSystem, apply_forward


@dataclass(frozen=True)
class Ellipse:
    center_row: float
    center_col: float
    axis_row: float
    axis_col: float
    angle: float
    intensity: float

    def __post_init__(self):
        if not 0.0 <= self.intensity <= 1.0:
            raise InvalidArgumentError("ellipse intensity must be in [0, 1]")


@dataclass(frozen=True)
class PhantomSpec:
    height: int = 64
    width: int = 64
    ellipses: tuple = ()
    texture_amplitude: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.height < 32 or self.width < 32:
            raise InvalidArgumentError("phantom dimensions must be >= 32")
        if self.texture_amplitude < 0:
            raise InvalidArgumentError("texture amplitude must be >= 0")


def default_phantom_spec(height: int = 64, width: int = 64, seed: int = 0) -> PhantomSpec:
    """A 10-ellipse anatomy drawn deterministically from the seed: one big
    body ellipse plus nine internal features."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x9E11]))
    ellipses = [
        Ellipse(0.5, 0.5, 0.42, 0.38, float(rng.uniform(-0.3, 0.3)), 0.72)
    ]
    for _ in range(9):
        ellipses.append(
            Ellipse(
                center_row=float(rng.uniform(0.25, 0.75)),
                center_col=float(rng.uniform(0.25, 0.75)),
                axis_row=float(rng.uniform(0.04, 0.16)),
                axis_col=float(rng.uniform(0.04, 0.16)),
                angle=float(rng.uniform(0, math.pi)),
                intensity=float(rng.uniform(0.05, 0.22)),
            )
        )
    return PhantomSpec(height, width, tuple(ellipses), 0.05, seed)


def _ellipse_mask(h, w, e: Ellipse) -> np.ndarray:
    rows = (np.arange(h)[:, None] + 0.5) / h - e.center_row
    cols = (np.arange(w)[None, :] + 0.5) / w - e.center_col
    ca, sa = math.cos(e.angle), math.sin(e.angle)
    u = rows * ca + cols * sa
    v = -rows * sa + cols * ca
    return (u / e.axis_row) ** 2 + (v / e.axis_col) ** 2 <= 1.0


def _bandlimited_field(h, w, rng, band=(0.05, 0.45)) -> np.ndarray:
    """Real random field with spectral support on a mid-frequency annulus."""
    spec = rng.standard_normal((h, w)) + 1j * rng.standard_normal((h, w))
    fi = np.fft.fftshift(np.fft.fftfreq(h))[:, None]
    fj = np.fft.fftshift(np.fft.fftfreq(w))[None, :]
    rad = np.hypot(fi, fj)
    spec = np.where((rad >= band[0]) & (rad <= band[1]), spec, 0.0)
    f = np.real(np.fft.ifft2(np.fft.ifftshift(spec)))
    peak = np.max(np.abs(f))
    return f / peak if peak > 0 else f


def make_phantom(spec: PhantomSpec) -> np.ndarray:
    """Complex phantom image; magnitude in [0, 1], smooth random phase."""
    mag = np.zeros((spec.height, spec.width))
    for e in spec.ellipses:
        mag[_ellipse_mask(spec.height, spec.width, e)] += e.intensity
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 0x7A57]))
    if spec.texture_amplitude > 0:
        texture = _bandlimited_field(spec.height, spec.width, rng)
        mag = mag + spec.texture_amplitude * texture * (mag > 0)
    mag = np.clip(mag, 0.0, 1.0)
    phase_field = _bandlimited_field(spec.height, spec.width, rng, band=(0.0, 0.04))
    return mag * np.exp(1j * 0.5 * math.pi * phase_field)


def make_coils(height: int, width: int, n_coils: int, seed: int = 0) -> CoilSet:
    """Smooth complex Gaussian-bump coil profiles, SoS normalized."""
    if n_coils < 1:
        raise InvalidArgumentError("need at least one coil")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xC011]))
    rows = (np.arange(height)[:, None] + 0.5) / height
    cols = (np.arange(width)[None, :] + 0.5) / width
    sigma = 0.55
    maps = np.empty((n_coils, height, width), dtype=np.complex128)
    for c in range(n_coils):
        angle = 2.0 * math.pi * c / n_coils + float(rng.uniform(-0.2, 0.2))
        cr = 0.5 + 0.55 * math.sin(angle)
        cc = 0.5 + 0.55 * math.cos(angle)
        bump = np.exp(-((rows - cr) ** 2 + (cols - cc) ** 2) / (2 * sigma * sigma))
        ramp = float(rng.uniform(-1.5, 1.5))
        phase = ramp * (rows + cols - 1.0) + float(rng.uniform(0, 2 * math.pi))
        maps[c] = bump * np.exp(1j * phase)
    return CoilSet(maps, normalize=True)


def simulate_kspace(x, system: MultiCoilSystem, noise_sigma: float = 0.0,
                    seed: int = 0) -> np.ndarray:
    """Forward model plus complex Gaussian noise at sampled locations only."""
    if noise_sigma < 0:
        raise InvalidArgumentError("noise_sigma must be >= 0")
    y = apply_forward(system, x)
    if noise_sigma > 0:
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5EED]))
        noise = noise_sigma * (
            rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)
        )
        y = y + np.where(system.mask.keep[None, :, :], noise, 0.0)
    return y


_LETTER_BITMAPS = {
    "T": ["#####", "..#..", "..#..", "..#..", "..#.."],
    "L": ["#....", "#....", "#....", "#....", "#####"],
    "H": ["#...#", "#...#", "#####", "#...#", "#...#"],
    "X": ["#...#", ".#.#.", "..#..", ".#.#.", "#...#"],
    "+": ["..#..", "..#..", "#####", "..#..", "..#.."],
}


@dataclass(frozen=True)
class Feature:
    """A small geometric insert: disc, bar, or letter bitmap."""

    kind: str
    row: int
    col: int
    intensity: float
    radius: int = 3
    length: int = 7
    width: int = 2
    horizontal: bool = True
    letter: str = "T"
    scale: int = 1

    def __post_init__(self):
        if self.kind not in ("disc", "bar", "letter"):
            raise InvalidArgumentError(f"unknown feature kind {self.kind!r}")
        if self.kind == "letter" and self.letter not in _LETTER_BITMAPS:
            raise InvalidArgumentError(
                f"letter {self.letter!r} not in {sorted(_LETTER_BITMAPS)}"
            )

    def pixel_mask(self, h: int, w: int) -> np.ndarray:
        mask = np.zeros((h, w), dtype=bool)
        if self.kind == "disc":
            rr = np.arange(h)[:, None] - self.row
            cc = np.arange(w)[None, :] - self.col
            mask |= rr * rr + cc * cc <= self.radius * self.radius
        elif self.kind == "bar":
            if self.horizontal:
                r0, c0 = self.row - self.width // 2, self.col - self.length // 2
                mask[r0 : r0 + self.width, c0 : c0 + self.length] = True
            else:
                r0, c0 = self.row - self.length // 2, self.col - self.width // 2
                mask[r0 : r0 + self.length, c0 : c0 + self.width] = True
        else:
            bitmap = _LETTER_BITMAPS[self.letter]
            bh, bw = len(bitmap), len(bitmap[0])
            r0 = self.row - (bh * self.scale) // 2
            c0 = self.col - (bw * self.scale) // 2
            for i, line in enumerate(bitmap):
                for j, ch in enumerate(line):
                    if ch == "#":
                        mask[
                            r0 + i * self.scale : r0 + (i + 1) * self.scale,
                            c0 + j * self.scale : c0 + (j + 1) * self.scale,
                        ] = True
        return mask

    def bounds_ok(self, h: int, w: int) -> bool:
        if self.kind == "disc":
            return (
                self.row - self.radius >= 0
                and self.col - self.radius >= 0
                and self.row + self.radius < h
                and self.col + self.radius < w
            )
        if self.kind == "bar":
            dr = (self.width if self.horizontal else self.length) // 2
            dc = (self.length if self.horizontal else self.width) // 2
            ext_r = self.width if self.horizontal else self.length
            ext_c = self.length if self.horizontal else self.width
            return (
                self.row - dr >= 0
                and self.col - dc >= 0
                and self.row - dr + ext_r <= h
                and self.col - dc + ext_c <= w
            )
        bh = len(_LETTER_BITMAPS[self.letter]) * self.scale
        bw = len(_LETTER_BITMAPS[self.letter][0]) * self.scale
        r0 = self.row - bh // 2
        c0 = self.col - bw // 2
        return r0 >= 0 and c0 >= 0 and r0 + bh <= h and c0 + bw <= w


def plant_features(x: np.ndarray, features) -> np.ndarray:
    """Overwrite the magnitude inside each feature's pixel set, keeping phase."""
    x = np.asarray(x, dtype=np.complex128)
    out = x.copy()
    h, w = x.shape
    for feat in features:
        if not feat.bounds_ok(h, w):
            raise InvalidArgumentError(f"feature {feat} exceeds the {h}x{w} image")
        mask = feat.pixel_mask(h, w)
        mag = np.abs(out[mask])
        phase = np.where(mag > 0, out[mask] / np.where(mag > 0, mag, 1.0), 1.0)
        out[mask] = feat.intensity * phase
    return out
