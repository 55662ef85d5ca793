"""Supervised training of the unrolled pipelines.

Adam with betas (0.5, 0.999) and a linearly decaying learning rate, on
the combined l2^2 + beta * l1 loss.  The blind stage has no trainable
parameters, so its outputs are precomputed once per sample (optionally
cached on disk keyed by a hash of the data and configuration).
"""

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .denoiser import DenoiserConfig, DenoiserParams, init_denoiser
from .errors import InvalidArgumentError, NumericFailureError
from .fourier import MultiCoilSystem, zero_filled_recon
from .supervised import (
    P2,
    P3,
    PipelineSpec,
    pipeline_stage_input,
    run_p3_blind_stage,
    supervised_stage_backward,
    supervised_stage_forward,
)


@dataclass(frozen=True)
class TrainConfig:
    beta: float = 0.01
    epochs: int = 40
    lr: float = 1e-4
    adam_betas: tuple = (0.5, 0.999)
    adam_eps: float = 1e-8
    batch_size: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.beta < 0:
            raise InvalidArgumentError("beta must be >= 0")
        if self.lr < 0:
            raise InvalidArgumentError("lr must be >= 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise InvalidArgumentError("epochs and batch_size must be >= 1")

    def lr_at(self, epoch: int) -> float:
        """Linear decay from lr to 0 over the epoch budget."""
        return self.lr * (1.0 - epoch / self.epochs)


@dataclass
class Sample:
    """One training/test case: measurements, system, and the target image."""

    y: np.ndarray
    system: MultiCoilSystem
    target: np.ndarray
    tag: str = ""


def loss_cbeta(xhat, xtrue, beta: float) -> float:
    """||xtrue - xhat||_2^2 + beta * sum of complex error magnitudes."""
    if xhat.shape != xtrue.shape:
        raise InvalidArgumentError(f"shape mismatch {xhat.shape} vs {xtrue.shape}")
    diff = xtrue - xhat
    return float(np.sum(np.abs(diff) ** 2) + beta * np.sum(np.abs(diff)))


def loss_cbeta_grad(xhat, xtrue, beta: float) -> np.ndarray:
    """Gradient of loss_cbeta w.r.t. xhat under the real inner product."""
    diff = xhat - xtrue
    mags = np.abs(diff)
    phase = np.where(mags > 0, diff / np.where(mags > 0, mags, 1.0), 0.0)
    return 2.0 * diff + beta * phase


class Adam:
    """Standard bias-corrected Adam over the layered parameter container."""

    def __init__(self, params: DenoiserParams, betas=(0.5, 0.999), eps=1e-8):
        self.b1, self.b2 = betas
        self.eps = eps
        self.t = 0
        self.m = params.zeros_like()
        self.v = params.zeros_like()

    def step(self, params: DenoiserParams, grads: DenoiserParams, lr: float):
        self.t += 1
        c1 = 1.0 - self.b1 ** self.t
        c2 = 1.0 - self.b2 ** self.t
        for (w, b), (gw, gb), (mw, mb), (vw, vb) in zip(
            params.layers, grads.layers, self.m.layers, self.v.layers
        ):
            for p, g, m, v in ((w, gw, mw, vw), (b, gb, mb, vb)):
                m *= self.b1
                m += (1.0 - self.b1) * g
                v *= self.b2
                v += (1.0 - self.b2) * g * g
                p -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def _cache_key(sample: Sample, cfg_blob: str) -> str:
    digest = hashlib.sha256()
    digest.update(sample.y.tobytes())
    digest.update(sample.system.mask.keep.tobytes())
    digest.update(sample.system.coils.maps.tobytes())
    digest.update(cfg_blob.encode())
    return digest.hexdigest()


def _stage_inputs(spec: PipelineSpec, dataset, cache_dir=None, params1=None, workers=1):
    """Per-sample input image to the trainable supervised stage.

    p1/p2: the blind reconstruction (zero-filled when K = 0).  p3 stage 2:
    the frozen stage-1 output pushed through the single blind iteration.
    Cached as full-precision .npy so cached and inline runs agree exactly.
    """
    cfg_blob = json.dumps(
        {
            "kind": spec.kind,
            "blind": vars(spec.blind),
            "patch": vars(spec.patch),
            "stage1": None if params1 is None else "theta1",
        },
        sort_keys=True,
        default=str,
    )

    def one(sample):
        key = None
        if cache_dir is not None:
            key = os.path.join(cache_dir, _cache_key(sample, cfg_blob) + ".npy")
            if os.path.exists(key):
                return np.load(key)
        if params1 is None:
            x = pipeline_stage_input(spec, sample.system, sample.y)
        else:
            x = zero_filled_recon(sample.system, sample.y)
            x, _ = supervised_stage_forward(
                params1, x, sample.system, sample.y, spec.supervised
            )
            x = run_p3_blind_stage(spec, sample.system, sample.y, x)
        if key is not None:
            os.makedirs(cache_dir, exist_ok=True)
            np.save(key, x)
        return x

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, dataset))
    return [one(sample) for sample in dataset]


@dataclass
class TrainResult:
    params: object
    loss_history: list = field(default_factory=list)  # (stage, epoch, mean loss)


def _sample_grad(params, scfg, sample, x_in, beta, anchored):
    anchor = x_in if anchored else None
    xhat, caches = supervised_stage_forward(
        params, x_in, sample.system, sample.y, scfg, anchor=anchor
    )
    loss = loss_cbeta(xhat, sample.target, beta)
    upstream = loss_cbeta_grad(xhat, sample.target, beta)
    grads, _ = supervised_stage_backward(
        params, sample.system, scfg, caches, upstream, anchor=anchor
    )
    return loss, grads


def _train_stage(params, spec, scfg, dataset, inputs, tcfg, stage: int,
                 history, anchored: bool, workers: int = 1):
    adam = Adam(params, betas=tcfg.adam_betas, eps=tcfg.adam_eps)
    rng = np.random.default_rng(tcfg.seed + 1000 * stage)
    n = len(dataset)
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for epoch in range(tcfg.epochs):
            order = rng.permutation(n)
            lr = tcfg.lr_at(epoch)
            epoch_losses = []
            for start in range(0, n, tcfg.batch_size):
                batch = order[start : start + tcfg.batch_size]

                def one(si):
                    return _sample_grad(
                        params, scfg, dataset[si], inputs[si], tcfg.beta, anchored
                    )

                results = list(pool.map(one, batch)) if pool else [one(si) for si in batch]
                total = params.zeros_like()
                batch_loss = 0.0
                # Reduce in batch order so the step is deterministic.
                for loss, grads in results:
                    if not np.isfinite(loss):
                        raise NumericFailureError(
                            f"non-finite training loss at stage {stage} epoch {epoch}"
                        )
                    batch_loss += loss
                    for (tw, tb), (gw, gb) in zip(total.layers, grads.layers):
                        tw += gw / len(batch)
                        tb += gb / len(batch)
                adam.step(params, total, lr)
                epoch_losses.append(batch_loss / len(batch))
            history.append((stage, epoch, float(np.mean(epoch_losses))))
    finally:
        if pool:
            pool.shutdown()
    return params


def train(spec: PipelineSpec, dataset, tcfg: TrainConfig,
          dcfg: DenoiserConfig | None = None, cache_dir=None, workers: int = 1) -> TrainResult:
    """Train a pipeline's denoiser weights; p3 trains two stages in sequence."""
    if not dataset:
        raise InvalidArgumentError("empty training dataset")
    dcfg = dcfg or DenoiserConfig()
    history = []
    if spec.kind == P3:
        theta1 = init_denoiser(dcfg)
        zf_inputs = [zero_filled_recon(s.system, s.y) for s in dataset]
        _train_stage(theta1, spec, spec.supervised, dataset, zf_inputs, tcfg,
                     stage=1, history=history, anchored=False, workers=workers)
        stage2_inputs = _stage_inputs(spec, dataset, cache_dir=cache_dir, params1=theta1,
                                      workers=workers)
        theta2 = init_denoiser(
            DenoiserConfig(dcfg.channels, dcfg.depth, seed=dcfg.seed + 1)
        )
        _train_stage(theta2, spec, spec.stage2, dataset, stage2_inputs, tcfg,
                     stage=2, history=history, anchored=False, workers=workers)
        return TrainResult((theta1, theta2), history)
    params = init_denoiser(dcfg)
    inputs = _stage_inputs(spec, dataset, cache_dir=cache_dir, workers=workers)
    _train_stage(params, spec, spec.supervised, dataset, inputs, tcfg,
                 stage=1, history=history, anchored=spec.kind == P2, workers=workers)
    return TrainResult(params, history)
