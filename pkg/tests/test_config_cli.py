import json
import os

import numpy as np
import pytest

from negamplify.cli import EXIT_CONFIG, EXIT_DATASET, EXIT_OK, main
from negamplify.config import (PRESETS, ConfigError, DatasetFiles, config_from_dict, load_config,
                               preset_config)
from negamplify.graph import load_dataset

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SMOKE = os.path.join(ROOT, "configs", "smoke.toml")


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_shipped_configs_load():
    assert load_config(os.path.join(ROOT, "configs", "sbm.toml")) == preset_config("sbm")
    assert load_config(SMOKE).epochs == 20


@pytest.mark.parametrize("name, row", [
    ("cora", (5e-3, 1e-5, 1200, 0.4, 128)),
    ("citeseer", (5e-4, 1e-5, 1200, 0.2, 128)),
    ("pubmed", (5e-4, 1e-5, 2000, 0.1, 128)),
    ("wikics", (5e-4, 1e-5, 1200, 0.85, 256)),
    ("amazon-photo", (1e-5, 1e-5, 1200, 0.5, 256)),
])
def test_dataset_presets(name, row):
    cfg = preset_config(name, dataset={"kind": "files", "edges": "e", "features": "f"})
    assert (cfg.learning_rate, cfg.weight_decay, cfg.epochs, cfg.tau, cfg.output_dim) == row


def test_all_presets_validate():
    for name in PRESETS:
        preset_config(name)


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="unknown keys"):
        config_from_dict({"tua": 0.5})
    with pytest.raises(ConfigError, match=r"\[agent\]"):
        config_from_dict({"agent": {"kapa": 3}})
    with pytest.raises(ConfigError):
        config_from_dict({"version": 2})
    with pytest.raises(ConfigError):
        config_from_dict({"preset": "nope"})


def test_invalid_values_rejected():
    with pytest.raises(ConfigError):
        config_from_dict({"tau": 0.0})
    with pytest.raises(ConfigError):
        config_from_dict({"agent": {"kappa_init": 60, "kappa_max": 50}})


def test_relative_dataset_paths(tmp_path):
    path = write(tmp_path, "c.toml", '[dataset]\nkind = "files"\nedges = "d/e.tsv"\n'
                 'features = "d/f.csv"\n')
    ds = load_config(path).dataset
    assert isinstance(ds, DatasetFiles)
    assert ds.edges == str(tmp_path / "d" / "e.tsv")


def test_bad_toml(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, "c.toml", "tau = = 1"))


def test_cli_config_error_exit_code(tmp_path, capsys):
    path = write(tmp_path, "c.toml", "bogus = 1\n")
    assert main(["train", "--config", path, "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_cli_missing_dataset_exit_code(tmp_path):
    path = write(tmp_path, "c.toml", '[dataset]\nkind = "files"\nedges = "missing.tsv"\n'
                 'features = "missing.csv"\nlabels = "missing.tsv"\n')
    assert main(["train", "--config", path, "--out", str(tmp_path / "o")]) == EXIT_DATASET


def test_cli_self_loop_exit_code(tmp_path):
    (tmp_path / "e.tsv").write_text("0\t1\n1\t1\n")
    (tmp_path / "f.csv").write_text("1.0\n2.0\n")
    (tmp_path / "l.tsv").write_text("0\t0\n1\t1\n")
    path = write(tmp_path, "c.toml", '[dataset]\nkind = "files"\nedges = "e.tsv"\n'
                 'features = "f.csv"\nlabels = "l.tsv"\n')
    assert main(["train", "--config", path, "--out", str(tmp_path / "o")]) == EXIT_DATASET


def test_cli_gen_synth_then_train_on_files(tmp_path):
    data = tmp_path / "data"
    assert main(["gen-synth", "--config", SMOKE, "--out", str(data)]) == EXIT_OK
    g = load_dataset(data / "edges.tsv", data / "features.csv", data / "labels.tsv")
    assert g.num_nodes == 60 and g.num_classes == 3
    path = write(tmp_path, "c.toml", 'preset = "sbm"\nepochs = 3\nhidden_dim = 8\n'
                 'output_dim = 8\n[protocol]\nnum_repeats = 1\n'
                 '[dataset]\nkind = "files"\nedges = "data/edges.tsv"\n'
                 'features = "data/features.csv"\nlabels = "data/labels.tsv"\n')
    out = tmp_path / "run"
    assert main(["train", "--config", path, "--out", str(out)]) == EXIT_OK
    doc = json.loads((out / "result.json").read_text())
    assert len(doc["per_epoch"]) == 3 and 0.0 <= doc["final"]["mean_f1"] <= 1.0


def test_cli_train_smoke(tmp_path):
    out = tmp_path / "run"
    assert main(["train", "--config", SMOKE, "--out", str(out), "--epochs", "2"]) == EXIT_OK
    lines = (out / "epochs.csv").read_text().splitlines()
    assert lines[0] == "epoch,loss,kappa,decision,wall_ms"
    assert len(lines) == 3
    assert all(line.endswith(",0") for line in lines[1:])


def test_cli_timing_flag_records_wall_time(tmp_path):
    out = tmp_path / "run"
    assert main(["train", "--config", SMOKE, "--out", str(out), "--epochs", "2",
                 "--timing"]) == EXIT_OK
    rows = json.loads((out / "result.json").read_text())["per_epoch"]
    assert all(r["wall_ms"] > 0 for r in rows)


def test_cli_sweep_duplicate_rejected(tmp_path):
    assert main(["sweep", "--config", SMOKE, "--out", str(tmp_path),
                 "--kappa-max", "10,10"]) == EXIT_CONFIG


def test_cli_conflicting_sources(tmp_path):
    assert main(["train", "--config", SMOKE, "--preset", "sbm",
                 "--out", str(tmp_path)]) == EXIT_CONFIG


def test_cli_seed_override(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["train", "--config", SMOKE, "--out", str(a), "--epochs", "2", "--seed", "1"])
    main(["train", "--config", SMOKE, "--out", str(b), "--epochs", "2", "--seed", "2"])
    ja = json.loads((a / "result.json").read_text())
    jb = json.loads((b / "result.json").read_text())
    assert (ja["seed"], jb["seed"]) == (1, 2)
    assert ja["per_epoch"][0]["loss"] != jb["per_epoch"][0]["loss"]
    assert np.isfinite(ja["final"]["mean_f1"])
