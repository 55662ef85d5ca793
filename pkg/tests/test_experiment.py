import json
import os

import numpy as np
import pytest

from blips.blind import ReconConfig
from blips.ctz import load_ctz
from blips.denoiser import DenoiserConfig
from blips.errors import InvalidArgumentError
from blips.experiment import ExperimentSpec, build_datasets, run_experiment
from blips.masks import MaskSpec, VARIABLE_DENSITY_1D
from blips.patches import PatchConfig
from blips.phantom import Feature
from blips.supervised import SupervisedConfig
from blips.training import TrainConfig


def _tiny_spec(out_dir, methods=("zf",), **kw):
    defaults = dict(
        out_dir=str(out_dir),
        methods=methods,
        train_size=2,
        test_size=2,
        height=32,
        width=32,
        n_coils=2,
        noise_sigma=0.001,
        seed=3,
        mask=MaskSpec(VARIABLE_DENSITY_1D, 32, 32, acceleration=4.0, acs_lines=3, seed=3),
        blind=ReconConfig(nu=500.0, lam=0.2, outer_iters=1, inner_iters=1),
        supervised=SupervisedConfig(unrolls=1),
        denoiser=DenoiserConfig(channels=4, seed=0),
        train=TrainConfig(epochs=2, lr=1e-3, batch_size=2, seed=0),
    )
    defaults.update(kw)
    return ExperimentSpec(**defaults)


def test_zf_only_writes_reports_without_training(tmp_path):
    out = tmp_path / "run"
    summary = run_experiment(_tiny_spec(out))
    assert set(summary) == {"zf"}
    text = (out / "metrics.csv").read_text().strip().splitlines()
    assert text[0] == "method,slice,psnr_db,ssim,hfen,hfen_normalized"
    assert len(text) == 3  # header + 2 test slices
    assert all(row.startswith("zf,test-") for row in text[1:])
    assert not list(out.glob("loss_*.csv"))
    assert (out / "summary.csv").exists()
    assert (out / "mask.ctz").exists() and (out / "mask.pbm").exists()
    assert json.loads((out / "experiment.json").read_text())["seed"] == 3


def test_train_test_seed_partition_disjoint(tmp_path):
    spec = _tiny_spec(tmp_path / "x")
    from blips.fourier import MultiCoilSystem
    from blips.masks import generate_mask
    from blips.phantom import make_coils

    system = MultiCoilSystem(
        make_coils(32, 32, 2, seed=3), generate_mask(spec.resolved_mask())
    )
    trainset, testset = build_datasets(spec, system)
    train_targets = {s.target.tobytes() for s in trainset}
    test_targets = {s.target.tobytes() for s in testset}
    assert not train_targets & test_targets


def test_experiment_csv_byte_identical_across_runs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run_experiment(_tiny_spec(a, methods=("zf", "dict-blind", "supervised")))
    run_experiment(_tiny_spec(b, methods=("zf", "dict-blind", "supervised")))
    for name in ("metrics.csv", "summary.csv", "loss_supervised.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_trained_method_artifacts(tmp_path):
    out = tmp_path / "t"
    summary = run_experiment(_tiny_spec(out, methods=("zf", "blips-p1")))
    assert (out / "loss_blips-p1.csv").exists()
    assert (out / "params_blips-p1" / "manifest.json").exists()
    assert (out / "residual_p1_minus_blind.ctz").exists()
    rec = load_ctz(out / "recon_blips-p1.ctz")
    assert rec.shape == (32, 32)
    assert {"zf", "blips-p1"} == set(summary)


def test_ctz_outputs_roundtrip(tmp_path):
    from blips.ctz import save_ctz

    out = tmp_path / "rt"
    run_experiment(_tiny_spec(out))
    copies = tmp_path / "copies"
    copies.mkdir()
    paths = sorted(out.glob("*.ctz"))
    assert paths
    for path in paths:
        arr = load_ctz(path)
        save_ctz(copies / path.name, arr)
        assert load_ctz(copies / path.name).tobytes() == arr.tobytes()


def test_planted_features_reporting(tmp_path):
    out = tmp_path / "pf"
    feat = Feature("disc", row=16, col=16, intensity=0.9, radius=2)
    run_experiment(_tiny_spec(out, planted=(feat,)))
    rows = (out / "planted.csv").read_text().strip().splitlines()
    assert rows[0] == "method,slice,feature,kind,row,col,local_psnr_db"
    assert len(rows) == 3  # one per test slice for the single method
    assert all(",disc,16,16," in r for r in rows[1:])


def test_training_method_requires_train_slices(tmp_path):
    spec = _tiny_spec(tmp_path / "e", methods=("supervised",), train_size=0)
    with pytest.raises(InvalidArgumentError):
        run_experiment(spec)
    assert (tmp_path / "e" / "error.json").exists()


def test_unknown_method_rejected(tmp_path):
    with pytest.raises(InvalidArgumentError):
        _tiny_spec(tmp_path / "u", methods=("warp",))


def test_experiment_cli_roundtrip(tmp_path):
    from blips.cli import main

    cfg = {
        "methods": ["zf"],
        "train_size": 0,
        "test_size": 1,
        "height": 32,
        "width": 32,
        "n_coils": 2,
        "seed": 5,
        "mask": {"kind": VARIABLE_DENSITY_1D, "height": 32, "width": 32,
                 "acceleration": 4.0, "acs_lines": 3, "seed": 5},
    }
    cfg_path = tmp_path / "spec.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "cli_run"
    assert main(["experiment", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert (out / "metrics.csv").exists()
