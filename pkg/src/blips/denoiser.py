"""Small residual convolutional denoiser with explicit backprop.

A complex image is normalized by the lower median of its magnitude,
split into real/imaginary channels, pushed through 3x3 periodic
convolutions with ReLU activations (channel plan 2 -> C -> ... -> C -> 2),
recombined to a complex residual and rescaled.  The residual connection
(x + residual) lives in the caller.

The backward pass returns exact gradients of <upstream, forward(x)>_real,
including the dependence of the normalization scale on the median pixel,
so central finite differences agree to first order everywhere off the
(measure-zero) median ties and ReLU kinks.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InvalidArgumentError


@dataclass(frozen=True)
class DenoiserConfig:
    channels: int = 16
    depth: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.channels < 1 or self.depth < 2:
            raise InvalidArgumentError("need channels >= 1 and depth >= 2")


@dataclass
class DenoiserParams:
    """Per-layer (kernel, bias) pairs; kernels are (out_c, in_c, 3, 3) float64."""

    layers: list = field(default_factory=list)

    @property
    def architecture(self) -> str:
        plan = [str(w.shape[1]) for w, _ in self.layers] + [str(self.layers[-1][0].shape[0])]
        plan[0] = "c" + plan[0]
        plan[-1] = "c" + plan[-1]
        return "-".join(plan) + "/k3/relu"

    def copy(self) -> "DenoiserParams":
        return DenoiserParams([(w.copy(), b.copy()) for w, b in self.layers])

    def zeros_like(self) -> "DenoiserParams":
        return DenoiserParams([(np.zeros_like(w), np.zeros_like(b)) for w, b in self.layers])


def init_denoiser(cfg: DenoiserConfig) -> DenoiserParams:
    """Seeded uniform init in +-1/sqrt(fan_in)."""
    rng = np.random.default_rng(cfg.seed)
    widths = [2] + [cfg.channels] * (cfg.depth - 1) + [2]
    layers = []
    for c_in, c_out in zip(widths[:-1], widths[1:]):
        bound = 1.0 / np.sqrt(c_in * 9)
        w = rng.uniform(-bound, bound, size=(c_out, c_in, 3, 3))
        b = rng.uniform(-bound, bound, size=c_out)
        layers.append((w, b))
    return DenoiserParams(layers)


@dataclass(frozen=True)
class NormContext:
    """Magnitude normalization scale: the lower median of |x| (1 if zero)."""

    scale: float
    median_index: int


def norm_context(x: np.ndarray) -> NormContext:
    mags = np.abs(x).ravel()
    k = (mags.size - 1) // 2
    order = np.argpartition(mags, k)
    idx = int(order[k])
    scale = float(mags[idx])
    if scale == 0.0:
        return NormContext(1.0, -1)
    return NormContext(scale, idx)


def _forward_cached(params: DenoiserParams, x: np.ndarray):
    ctx = norm_context(x)
    u = np.stack([x.real, x.imag]) / ctx.scale
    acts = [u]
    pre = []
    h = u
    n_layers = len(params.layers)
    for li, (w, b) in enumerate(params.layers):
        a = _kernels.conv3x3_forward(np.ascontiguousarray(h), w, b)
        pre.append(a)
        h = np.maximum(a, 0.0) if li < n_layers - 1 else a
        acts.append(h)
    residual = (h[0] + 1j * h[1]) * ctx.scale
    return residual, (ctx, acts, pre)


def denoiser_forward(params: DenoiserParams, x: np.ndarray) -> np.ndarray:
    """Residual r such that the denoised image is x + r."""
    residual, _ = _forward_cached(params, x)
    return residual


def denoiser_backward(params: DenoiserParams, x: np.ndarray, upstream: np.ndarray,
                      cache=None):
    """Gradients of L = <upstream, denoiser_forward(params, x)>_real.

    Returns (grads, gx) where grads is a DenoiserParams-shaped container
    and gx is complex with gx.real = dL/dRe(x), gx.imag = dL/dIm(x).
    """
    if cache is None:
        _, cache = _forward_cached(params, x)
    ctx, acts, pre = cache
    s = ctx.scale
    a_last = pre[-1]
    gy = np.stack([upstream.real, upstream.imag])
    # L = s * <gy, a_last>; direct scale sensitivity before the chain rule.
    dl_ds = float(np.sum(gy * a_last))
    g = s * gy
    grads = params.zeros_like()
    n_layers = len(params.layers)
    for li in range(n_layers - 1, -1, -1):
        w, _ = params.layers[li]
        if li < n_layers - 1:
            g = g * (pre[li] > 0.0)
        gx_layer, gw, gb = _kernels.conv3x3_backward(
            np.ascontiguousarray(acts[li]), w, np.ascontiguousarray(g)
        )
        grads.layers[li] = (gw, gb)
        g = gx_layer
    du = g
    # u = stack(Re x, Im x) / s: scale path through the normalized input.
    dl_ds -= float(np.sum(du * acts[0])) / s
    gx = (du[0] + 1j * du[1]) / s
    if ctx.median_index >= 0:
        m = ctx.median_index
        xm = x.ravel()[m]
        gx = gx.copy()
        gx.ravel()[m] += dl_ds * xm / abs(xm)
    return grads, gx


def accumulate_grads(total: DenoiserParams, part: DenoiserParams, weight: float = 1.0):
    for (tw, tb), (pw, pb) in zip(total.layers, part.layers):
        tw += weight * pw
        tb += weight * pb


def save_params(path, params: DenoiserParams) -> None:
    """Serialize to a .ctz bundle directory with a JSON manifest."""
    import json
    import os

    from .ctz import save_ctz

    os.makedirs(path, exist_ok=True)
    manifest = {"version": 1, "architecture": params.architecture, "layers": []}
    for i, (w, b) in enumerate(params.layers):
        wname, bname = f"layer{i}_kernel.ctz", f"layer{i}_bias.ctz"
        save_ctz(os.path.join(path, wname), w)
        save_ctz(os.path.join(path, bname), b)
        manifest["layers"].append(
            {"kernel": wname, "bias": bname, "shape": list(w.shape)}
        )
    with open(os.path.join(path, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)


def load_params(path) -> DenoiserParams:
    import json
    import os

    from .ctz import load_ctz

    with open(os.path.join(path, "manifest.json")) as fh:
        manifest = json.load(fh)
    layers = []
    for entry in manifest["layers"]:
        w = load_ctz(os.path.join(path, entry["kernel"])).astype(np.float64)
        b = load_ctz(os.path.join(path, entry["bias"])).astype(np.float64)
        layers.append((w, b))
    return DenoiserParams(layers)
