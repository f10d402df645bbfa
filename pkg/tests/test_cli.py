import json

import numpy as np
import pytest

from hkge.cli import main
from hkge.config import apply_overrides, build_run_config, load_config, parse_config_text
from hkge.errors import ConfigError

from helpers import REPO, TOY


# -------------------------------------------------------------------- config

def test_parse_basic():
    raw = parse_config_text("dim = 8\n# comment\n\nmodel = robin  # trailing\n")
    assert raw == {"dim": "8", "model": "robin"}


def test_parse_rejects_unknown_key():
    with pytest.raises(ConfigError) as exc:
        parse_config_text("modle = robin\n")
    assert "modle" in str(exc.value) and ":1" in str(exc.value)


def test_parse_rejects_duplicates_and_garbage():
    with pytest.raises(ConfigError):
        parse_config_text("dim = 8\ndim = 9\n")
    with pytest.raises(ConfigError):
        parse_config_text("just some words\n")


def test_overrides():
    raw = apply_overrides({"dim": "8"}, ["dim=16", "seed=3"])
    assert raw == {"dim": "16", "seed": "3"}
    with pytest.raises(ConfigError):
        apply_overrides({}, ["nope=1"])
    with pytest.raises(ConfigError):
        apply_overrides({}, ["malformed"])


def test_build_run_config_types():
    cfg = build_run_config({
        "model": "lion", "dim": "16", "learning_rate": "0.5", "negatives": "-1",
        "lion_sources": "fasttext, doc2vec", "train": "x", "valid": "y", "test": "z",
    })
    assert cfg.model_kind == "lion"
    assert cfg.dim == 16
    assert cfg.learning_rate == 0.5
    assert cfg.negatives == -1
    assert cfg.lion_sources == ("fasttext", "doc2vec")
    assert cfg.paths["train"] == "x"


@pytest.mark.parametrize("raw", [
    {"dim": "zero"},
    {"learning_rate": "fast"},
    {"model": "resnet"},
    {"algebra": "octonion"},
    {"distance": "cosine"},
    {"dim": "0"},
    {"negatives": "0"},
])
def test_build_run_config_rejects(raw):
    with pytest.raises(ConfigError):
        build_run_config(raw)


def test_load_repo_configs():
    # every bundled config must parse cleanly
    for path in sorted((REPO / "configs").glob("*.cfg")):
        cfg = load_config(path)
        assert cfg.dim >= 1, path


# ----------------------------------------------------------------------- cli

def run_cli(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def quick_cfg(toy_config_path):
    """Config path plus standard fast-run overrides."""
    return toy_config_path, ["--set", "max_epochs=2", "--set", "dim=2", "--set", "eval_every=2"]


def test_train_writes_artifacts(tmp_path, quick_cfg):
    cfg_path, fast = quick_cfg
    out = tmp_path / "out"
    code = run_cli("train", "--config", cfg_path, "--out-dir", out, *fast)
    assert code == 0
    for artifact in ("checkpoint.bin", "run_config.json", "train_log.jsonl", "training_curve.png"):
        assert (out / artifact).exists(), artifact
    echo = json.loads((out / "run_config.json").read_text())
    assert echo["dim"] == 2 and echo["max_epochs"] == 2
    log = [json.loads(l) for l in (out / "train_log.jsonl").read_text().splitlines()]
    assert [r["epoch"] for r in log] == [1, 2]


def test_eval_analyze_export_pipeline(tmp_path, toy_config_path):
    out = tmp_path / "out"
    fast = ["--set", "max_epochs=3", "--set", "dim=2", "--set", "model=robin",
            "--set", "eval_every=3"]
    assert run_cli("train", "--config", toy_config_path, "--out-dir", out, *fast) == 0
    ckpt = out / "checkpoint.bin"
    assert run_cli("eval", "--config", toy_config_path, "--checkpoint", ckpt,
                   "--out-dir", out, *fast) == 0
    assert (out / "eval.json").exists()
    assert (out / "eval.tsv").exists()
    assert (out / "eval_metrics.png").exists()
    report = json.loads((out / "eval.json").read_text())
    assert report["n_queries"] == 38
    assert run_cli("analyze", "--config", toy_config_path, "--checkpoint", ckpt,
                   "--out-dir", out, *fast,
                   "--head", "alba", "--relation", "near", "--tail", "brinn") == 0
    assert (out / "part_cosine.png").exists()
    assert (out / "shapley.tsv").exists()
    assert run_cli("export", "--config", toy_config_path, "--checkpoint", ckpt,
                   "--out", out / "emb.tsv", *fast) == 0
    first = (out / "emb.tsv").read_text().splitlines()[0]
    assert first.startswith("#hkge-emb\tsource=hkge-export\tdim=8")


def test_exit_code_config_error(toy_config_path):
    assert run_cli("train", "--config", toy_config_path, "--set", "bogus=1") == 2
    assert run_cli("train", "--config", "/definitely/not/here.cfg") == 2


def test_exit_code_data_error(tmp_path, toy_config_path):
    broken = tmp_path / "broken.txt"
    broken.write_text("only\ttwo\n")
    code = run_cli("train", "--config", toy_config_path, "--set", f"train={broken}",
                   "--set", "max_epochs=1")
    assert code == 3


def test_exit_code_unknown_analysis_entity(tmp_path, quick_cfg):
    cfg_path, fast = quick_cfg
    out = tmp_path / "out"
    assert run_cli("train", "--config", cfg_path, "--out-dir", out, *fast) == 0
    code = run_cli("analyze", "--config", cfg_path, "--checkpoint", out / "checkpoint.bin",
                   "--out-dir", out, *fast,
                   "--head", "atlantis", "--relation", "near", "--tail", "brinn")
    assert code == 3


def test_exit_code_checkpoint_mismatch(tmp_path, quick_cfg):
    cfg_path, fast = quick_cfg
    out = tmp_path / "out"
    assert run_cli("train", "--config", cfg_path, "--out-dir", out, *fast) == 0
    # same graph plus one extra entity: vocabularies no longer line up
    grown = tmp_path / "train_grown.txt"
    grown.write_text((TOY / "train.txt").read_text() + "atlantis\tnear\talba\n")
    code = run_cli("eval", "--config", cfg_path, "--checkpoint", out / "checkpoint.bin",
                   "--out-dir", out, *fast, "--set", f"train={grown}")
    assert code == 5


def test_exit_code_bad_checkpoint_file(quick_cfg):
    cfg_path, fast = quick_cfg
    code = run_cli("eval", "--config", cfg_path, "--checkpoint", TOY / "train.txt", *fast)
    assert code == 5


def test_seed_flag_overrides_config(tmp_path, quick_cfg):
    cfg_path, fast = quick_cfg
    out1, out2, out3 = tmp_path / "s1", tmp_path / "s2", tmp_path / "s3"
    run_cli("train", "--config", cfg_path, "--out-dir", out1, "--seed", "5", *fast)
    run_cli("train", "--config", cfg_path, "--out-dir", out2, "--seed", "5", *fast)
    run_cli("train", "--config", cfg_path, "--out-dir", out3, "--seed", "6", *fast)
    b1 = (out1 / "checkpoint.bin").read_bytes()
    assert b1 == (out2 / "checkpoint.bin").read_bytes()
    assert b1 != (out3 / "checkpoint.bin").read_bytes()
