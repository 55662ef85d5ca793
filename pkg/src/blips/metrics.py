"""PSNR, SSIM and the high-frequency error norm on magnitude images.

All three metrics compare |xhat| against |xtrue|, so they are invariant
to global phase.  PSNR uses peak = max|xtrue| and caps identical inputs
at 300 dB.  SSIM averages local scores over every fully interior 11x11
Gaussian window (sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range
max|xtrue|).  HFEN is the l2 norm of the Laplacian-of-Gaussian filtered
difference (15x15 kernel, sigma 1.5, mean-subtracted to sum exactly
zero, periodic convolution); a normalized variant divides by the filtered
reference norm.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

PSNR_CAP_DB = 300.0


@dataclass(frozen=True)
class MetricReport:
    psnr_db: float
    ssim: float
    hfen: float
    hfen_normalized: float


def _magnitudes(xhat, xtrue):
    xhat = np.asarray(xhat)
    xtrue = np.asarray(xtrue)
    if xhat.shape != xtrue.shape:
        raise InvalidArgumentError(f"shape mismatch {xhat.shape} vs {xtrue.shape}")
    return np.abs(xhat).astype(np.float64), np.abs(xtrue).astype(np.float64)


def psnr(xhat, xtrue) -> float:
    """10 log10(peak^2 / MSE) in dB over magnitude images, capped at 300."""
    mhat, mtrue = _magnitudes(xhat, xtrue)
    peak = float(mtrue.max())
    if peak == 0.0:
        raise InvalidArgumentError("PSNR reference image is identically zero")
    mse = float(np.mean((mhat - mtrue) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(10.0 * np.log10(peak * peak / mse), PSNR_CAP_DB)


def gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    half = (size - 1) / 2.0
    ax = np.arange(size) - half
    g = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2.0 * sigma * sigma))
    return g / g.sum()


def ssim(xhat, xtrue, window_size: int = 11, sigma: float = 1.5,
         k1: float = 0.01, k2: float = 0.03) -> float:
    """Mean local SSIM over interior windows of the magnitude images."""
    mhat, mtrue = _magnitudes(xhat, xtrue)
    h, w = mtrue.shape
    if h < window_size or w < window_size:
        raise InvalidArgumentError(
            f"images ({h}x{w}) smaller than the {window_size}x{window_size} SSIM window"
        )
    win = gaussian_window(window_size, sigma)
    dynamic_range = float(mtrue.max())
    c1 = (k1 * dynamic_range) ** 2
    c2 = (k2 * dynamic_range) ** 2

    def local(img):
        view = np.lib.stride_tricks.sliding_window_view(img, (window_size, window_size))
        return np.tensordot(view, win, axes=([2, 3], [0, 1]))

    mu_x = local(mhat)
    mu_y = local(mtrue)
    ex2 = local(mhat * mhat)
    ey2 = local(mtrue * mtrue)
    exy = local(mhat * mtrue)
    var_x = ex2 - mu_x * mu_x
    var_y = ey2 - mu_y * mu_y
    cov = exy - mu_x * mu_y
    score = ((2 * mu_x * mu_y + c1) * (2 * cov + c2)) / (
        (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    )
    return float(score.mean())


def log_kernel(size: int = 15, sigma: float = 1.5) -> np.ndarray:
    """Laplacian-of-Gaussian kernel, mean-subtracted to sum exactly zero."""
    half = (size - 1) / 2.0
    ax = np.arange(size) - half
    r2 = ax[:, None] ** 2 + ax[None, :] ** 2
    g = np.exp(-r2 / (2.0 * sigma * sigma))
    k = g * (r2 - 2.0 * sigma * sigma) / (sigma ** 4 * g.sum())
    return k - k.mean()


def periodic_correlate(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """2D cross-correlation with periodic boundary, same shape as img."""
    size = kernel.shape[0]
    half = size // 2
    out = np.zeros_like(img, dtype=np.float64)
    for a in range(size):
        for b in range(size):
            out += kernel[a, b] * np.roll(img, (half - a, half - b), axis=(0, 1))
    return out


def hfen(xhat, xtrue, normalized: bool = False) -> float:
    """l2 norm of the LoG-filtered magnitude difference."""
    mhat, mtrue = _magnitudes(xhat, xtrue)
    k = log_kernel()
    edge_hat = periodic_correlate(mhat, k)
    edge_true = periodic_correlate(mtrue, k)
    value = float(np.linalg.norm(edge_hat - edge_true))
    if normalized:
        ref = float(np.linalg.norm(edge_true))
        return value / ref if ref > 0 else value
    return value


def metric_report(xhat, xtrue) -> MetricReport:
    return MetricReport(
        psnr_db=psnr(xhat, xtrue),
        ssim=ssim(xhat, xtrue),
        hfen=hfen(xhat, xtrue),
        hfen_normalized=hfen(xhat, xtrue, normalized=True),
    )


def local_psnr(xhat, xtrue, center, window: int = 11) -> float:
    """PSNR restricted to a window x window box clipped to the image."""
    mhat, mtrue = _magnitudes(xhat, xtrue)
    r, c = center
    half = window // 2
    rs = slice(max(r - half, 0), min(r + half + 1, mtrue.shape[0]))
    cs = slice(max(c - half, 0), min(c + half + 1, mtrue.shape[1]))
    return psnr(mhat[rs, cs], mtrue[rs, cs])
