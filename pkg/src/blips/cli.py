"""Command-line interface.

Subcommands: phantom, mask, recon, train, metrics, experiment.  Exit codes:
0 on success, 2 on invalid arguments, 3 on numeric or generation failure.
"""

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from .blind import ReconConfig, blind_recon, fixed_dict_recon
from .ctz import load_ctz, save_ctz, save_pbm, save_pgm
from .denoiser import DenoiserConfig, load_params, save_params
from .errors import GenerationFailureError, InvalidArgumentError, NumericFailureError
from .experiment import ExperimentSpec, run_experiment
from .fourier import CoilSet, MultiCoilSystem, SamplingMask, zero_filled_recon
from .masks import MASK_KINDS, MaskSpec, generate_mask
from .metrics import metric_report
from .patches import PatchConfig
from .pdhg import cs_pdhg_recon
from .phantom import Feature, default_phantom_spec, make_coils, make_phantom
from .supervised import P1, P2, P3, PipelineSpec, SupervisedConfig, p3_default_blind, run_pipeline
from .training import Sample, TrainConfig, train


def _build(dc_type, blob, **overrides):
    """Construct a dataclass from a JSON dict, rejecting unknown keys."""
    blob = dict(blob or {})
    names = {f.name for f in dataclasses.fields(dc_type)}
    unknown = set(blob) - names
    if unknown:
        raise InvalidArgumentError(
            f"unknown {dc_type.__name__} keys: {sorted(unknown)}"
        )
    blob.update(overrides)
    if "adam_betas" in blob:
        blob["adam_betas"] = tuple(blob["adam_betas"])
    return dc_type(**blob)


def _load_json(path):
    if path is None:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=None, help="override the RNG seed")
    parser.add_argument("--out", default=None, help="output path or directory")
    parser.add_argument("--config", default=None, help="JSON configuration file")


def _cmd_phantom(args):
    seed = args.seed if args.seed is not None else 0
    spec = default_phantom_spec(args.height, args.width, seed)
    x = make_phantom(spec)
    out = args.out or "phantom.ctz"
    save_ctz(out, x)
    if args.preview:
        save_pgm(args.preview, np.abs(x))
    if args.coils:
        coils = make_coils(args.height, args.width, args.coils, seed=seed)
        save_ctz(args.coils_out, coils.maps)
    print(out)
    return 0


def _cmd_mask(args):
    cfg = _load_json(args.config)
    overrides = {
        "kind": args.kind,
        "height": args.height,
        "width": args.width,
        "acceleration": args.acceleration,
    }
    if args.acs_lines is not None:
        overrides["acs_lines"] = args.acs_lines
    if args.acs_fraction is not None:
        overrides["acs_fraction"] = args.acs_fraction
    if args.seed is not None:
        overrides["seed"] = args.seed
    spec = _build(MaskSpec, cfg, **overrides)
    mask = generate_mask(spec)
    out = args.out or "mask.ctz"
    save_ctz(out, mask.keep)
    if args.preview:
        save_pbm(args.preview, mask.keep)
    print(f"{out} fraction={mask.sampled_fraction:.4f}")
    return 0


def _load_system(args) -> MultiCoilSystem:
    coils = CoilSet(load_ctz(args.coils).astype(np.complex128), normalize=True)
    mask = SamplingMask(load_ctz(args.mask))
    return MultiCoilSystem(coils, mask)


def _cmd_recon(args):
    cfg = _load_json(args.config)
    system = _load_system(args)
    y = load_ctz(args.kspace).astype(np.complex128)
    blind_cfg = _build(ReconConfig, cfg.get("blind"))
    patch_cfg = _build(PatchConfig, cfg.get("patch"))
    sup_cfg = _build(SupervisedConfig, cfg.get("supervised"))
    method = args.method
    if method == "zf":
        x = zero_filled_recon(system, y)
    elif method == "cs":
        cs = cfg.get("cs", {})
        x = cs_pdhg_recon(system, y, cs.get("weight", 1e-7), cs.get("iters", 30))
    elif method == "dict-blind":
        x = blind_recon(system, y, blind_cfg, patch_cfg)
    elif method == "dict-fixed":
        x = fixed_dict_recon(system, y, blind_cfg, patch_cfg)
    else:
        if args.params is None:
            raise InvalidArgumentError(f"method {method!r} needs --params")
        if method == "blips-p3":
            p3b = _build(ReconConfig, cfg.get("blind")) if "blind" in cfg else p3_default_blind()
            spec = PipelineSpec(P3, p3b, patch_cfg, sup_cfg,
                                _build(SupervisedConfig, cfg.get("supervised2"))
                                if "supervised2" in cfg else None)
            params = (load_params(f"{args.params}/stage1"), load_params(f"{args.params}/stage2"))
        else:
            kind = P2 if method == "blips-p2" else P1
            if method == "supervised":
                blind_cfg = dataclasses.replace(blind_cfg, outer_iters=0)
            spec = PipelineSpec(kind, blind_cfg, patch_cfg, sup_cfg)
            params = load_params(args.params)
        x = run_pipeline(spec, params, system, y)
    out = args.out or "recon.ctz"
    save_ctz(out, x)
    if args.preview:
        save_pgm(args.preview, np.abs(x))
    print(out)
    return 0


def _load_manifest(path):
    blob = _load_json(path)
    samples = []
    for i, entry in enumerate(blob.get("samples", [])):
        coils = CoilSet(load_ctz(entry["coils"]).astype(np.complex128), normalize=True)
        mask = SamplingMask(load_ctz(entry["mask"]))
        system = MultiCoilSystem(coils, mask)
        samples.append(
            Sample(
                y=load_ctz(entry["kspace"]).astype(np.complex128),
                system=system,
                target=load_ctz(entry["target"]).astype(np.complex128),
                tag=entry.get("tag", f"sample-{i}"),
            )
        )
    if not samples:
        raise InvalidArgumentError(f"manifest {path} lists no samples")
    return samples


def _cmd_train(args):
    cfg = _load_json(args.config)
    dataset = _load_manifest(args.manifest)
    tcfg = _build(TrainConfig, cfg.get("train"),
                  **({"seed": args.seed} if args.seed is not None else {}))
    dcfg = _build(DenoiserConfig, cfg.get("denoiser"))
    patch_cfg = _build(PatchConfig, cfg.get("patch"))
    sup_cfg = _build(SupervisedConfig, cfg.get("supervised"))
    pipeline = args.pipeline
    if pipeline == "p3":
        p3b = _build(ReconConfig, cfg.get("blind")) if "blind" in cfg else p3_default_blind()
        spec = PipelineSpec(P3, p3b, patch_cfg, sup_cfg,
                            _build(SupervisedConfig, cfg.get("supervised2"))
                            if "supervised2" in cfg else None)
    else:
        blind_cfg = _build(ReconConfig, cfg.get("blind"))
        if pipeline == "s":
            blind_cfg = dataclasses.replace(blind_cfg, outer_iters=0)
        spec = PipelineSpec(P2 if pipeline == "p2" else P1, blind_cfg, patch_cfg, sup_cfg)
    out = args.out or f"trained_{pipeline}"
    os.makedirs(out, exist_ok=True)
    result = train(spec, dataset, tcfg, dcfg, cache_dir=os.path.join(out, "blind_cache"))
    if pipeline == "p3":
        save_params(os.path.join(out, "params", "stage1"), result.params[0])
        save_params(os.path.join(out, "params", "stage2"), result.params[1])
    else:
        save_params(os.path.join(out, "params"), result.params)
    with open(os.path.join(out, "loss.csv"), "w") as fh:
        fh.write("stage,epoch,loss\n")
        for stage, epoch, loss in result.loss_history:
            fh.write(f"{stage},{epoch},{loss:.6f}\n")
    print(os.path.join(out, "params"))
    return 0


def _cmd_metrics(args):
    ref = load_ctz(args.reference).astype(np.complex128)
    test = load_ctz(args.test).astype(np.complex128)
    rep = metric_report(test, ref)
    print("psnr_db,ssim,hfen,hfen_normalized")
    print(f"{rep.psnr_db:.6f},{rep.ssim:.6f},{rep.hfen:.6f},{rep.hfen_normalized:.6f}")
    return 0


def _cmd_experiment(args):
    cfg = _load_json(args.config)
    out = args.out or cfg.get("out_dir")
    if out is None:
        raise InvalidArgumentError("experiment needs --out or out_dir in the config")
    nested = {}
    for key, builder in (
        ("mask", MaskSpec), ("blind", ReconConfig), ("p3_blind", ReconConfig),
        ("patch", PatchConfig), ("supervised", SupervisedConfig),
        ("denoiser", DenoiserConfig), ("train", TrainConfig),
    ):
        if key in cfg:
            nested[key] = _build(builder, cfg.pop(key))
    if "planted" in cfg:
        nested["planted"] = tuple(_build(Feature, f) for f in cfg.pop("planted"))
    if "methods" in cfg:
        cfg["methods"] = tuple(cfg["methods"])
    cfg.pop("out_dir", None)
    overrides = {"out_dir": out}
    if args.seed is not None:
        overrides["seed"] = args.seed
    spec = _build(ExperimentSpec, {**cfg, **nested}, **overrides)
    summary = run_experiment(spec)
    for method, stats in summary.items():
        print(
            f"{method}: psnr={stats['psnr_db']:.2f}dB ssim={stats['ssim']:.4f} "
            f"hfen={stats['hfen']:.4f}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blips",
        description="Multicoil MRI reconstruction toolkit (blind dictionary "
                    "learning + unrolled supervised pipelines)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="generate a synthetic phantom")
    _add_common(p)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--preview", default=None, help="also write a PGM preview")
    p.add_argument("--coils", type=int, default=0, help="also write N coil maps")
    p.add_argument("--coils-out", default="coils.ctz")
    p.set_defaults(func=_cmd_phantom)

    p = sub.add_parser("mask", help="generate an undersampling mask")
    _add_common(p)
    p.add_argument("--kind", choices=MASK_KINDS, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--acceleration", type=float, required=True)
    p.add_argument("--acs-lines", type=int, default=None)
    p.add_argument("--acs-fraction", type=float, default=None)
    p.add_argument("--preview", default=None, help="also write a PBM preview")
    p.set_defaults(func=_cmd_mask)

    p = sub.add_parser("recon", help="reconstruct from measured k-space")
    _add_common(p)
    p.add_argument(
        "--method", required=True,
        choices=["zf", "cs", "dict-fixed", "dict-blind", "supervised",
                 "blips-p1", "blips-p2", "blips-p3"],
    )
    p.add_argument("--kspace", required=True, help=".ctz (n_coils, H, W)")
    p.add_argument("--coils", required=True, help=".ctz (n_coils, H, W)")
    p.add_argument("--mask", required=True, help=".ctz (H, W) boolean")
    p.add_argument("--params", default=None, help="trained params bundle directory")
    p.add_argument("--preview", default=None)
    p.set_defaults(func=_cmd_recon)

    p = sub.add_parser("train", help="train a pipeline's denoiser")
    _add_common(p)
    p.add_argument("--pipeline", choices=["p1", "p2", "p3", "s"], required=True)
    p.add_argument("--manifest", required=True, help="JSON dataset manifest")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("metrics", help="compare a reconstruction to a reference")
    _add_common(p)
    p.add_argument("reference", help="ground-truth .ctz image")
    p.add_argument("test", help="reconstruction .ctz image")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("experiment", help="run a full seeded experiment")
    _add_common(p)
    p.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericFailureError, GenerationFailureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
