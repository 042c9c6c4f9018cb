"""Config validation, overrides, exit codes, and output reproducibility."""

import json
from pathlib import Path

import pytest
import yaml

from popkit.cli import ConfigError, apply_override, main, validate_config

FAST_CFG = {
    "seed": 7,
    "experiments": [
        {"name": "pure_death_mc", "params": {"replicates": 20_000}},
        {"name": "pgf_closed_form", "params": {}},
        {"name": "load_identities", "params": {}},
    ],
}


def write_cfg(tmp_path: Path, cfg: dict, name: str = "cfg.yaml") -> str:
    p = tmp_path / name
    p.write_text(yaml.safe_dump(cfg))
    return str(p)


# --- validation ---------------------------------------------------------------

def test_validate_config_fills_defaults():
    cfg = validate_config({"experiments": [{"name": "pgf_closed_form"}]})
    assert cfg["seed"] == 0
    assert cfg["output_dir"] == "popkit_out"
    assert cfg["experiments"][0]["params"] == {}


@pytest.mark.parametrize("bad", [
    [],  # root not a mapping
    {"experiments": [{"name": "pgf_closed_form"}], "extra": 1},
    {"seed": "abc", "experiments": [{"name": "pgf_closed_form"}]},
    {"seed": True, "experiments": [{"name": "pgf_closed_form"}]},
    {"output_dir": 5, "experiments": [{"name": "pgf_closed_form"}]},
    {"experiments": []},
    {"experiments": [{"name": "no_such_experiment"}]},
    {"experiments": [{"name": "pgf_closed_form", "bogus": 1}]},
    {"experiments": [{"name": "pgf_closed_form", "params": {"bogus": 1}}]},
    {"experiments": [{"name": "pgf_closed_form", "params": 3}]},
])
def test_validate_config_rejects(bad):
    with pytest.raises(ConfigError):
        validate_config(bad)


# --- overrides ------------------------------------------------------------------

def test_apply_override_dotted_paths():
    cfg = {"seed": 0, "experiments": [{"name": "pure_death_mc", "params": {}}]}
    apply_override(cfg, "seed=11")
    apply_override(cfg, "experiments.0.params.replicates=500")
    apply_override(cfg, "output_dir=out/dir")
    assert cfg["seed"] == 11
    assert cfg["experiments"][0]["params"]["replicates"] == 500
    assert cfg["output_dir"] == "out/dir"


def test_apply_override_parses_yaml_values():
    cfg = {}
    apply_override(cfg, "a=1.5")
    apply_override(cfg, "b=[1, 2]")
    apply_override(cfg, "c=true")
    assert cfg == {"a": 1.5, "b": [1, 2], "c": True}


def test_apply_override_requires_assignment():
    with pytest.raises(ConfigError):
        apply_override({}, "no_equals_sign")


# --- exit codes -----------------------------------------------------------------

def test_exit_zero_and_outputs(tmp_path):
    cfg = dict(FAST_CFG, output_dir=str(tmp_path / "out"))
    rc = main(["--config", write_cfg(tmp_path, cfg), "--no-figures"])
    assert rc == 0
    out = tmp_path / "out"
    assert (out / "summary.json").exists()
    assert (out / "pure_death_mc.csv").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert all(entry["pass"] for entry in summary)


def test_exit_one_on_experiment_failure(tmp_path):
    cfg = {
        "seed": 7,
        "output_dir": str(tmp_path / "out"),
        "experiments": [
            {"name": "pure_death_mc", "params": {"replicates": 20_000, "tv_tol": 1e-9}},
        ],
    }
    rc = main(["--config", write_cfg(tmp_path, cfg), "--no-figures"])
    assert rc == 1
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary[0]["pass"] is False


def test_exit_two_on_bad_config(tmp_path):
    cfg = dict(FAST_CFG, bogus_key=1)
    assert main(["--config", write_cfg(tmp_path, cfg)]) == 2
    assert main(["--config", str(tmp_path / "missing.yaml")]) == 2
    assert main([]) == 2
    good = write_cfg(tmp_path, dict(FAST_CFG), name="good.yaml")
    assert main(["--config", good, "--jobs", "0"]) == 2
    assert main(["--config", good, "--set", "experiments.9.name=x"]) == 2


def test_list_experiments(capsys):
    assert main(["--list"]) == 0
    listing = json.loads(capsys.readouterr().out)
    assert "pure_death_mc" in listing
    assert "replicates" in listing["pure_death_mc"]["params"]


# --- determinism ------------------------------------------------------------------

def test_outputs_byte_identical_across_jobs_and_reruns(tmp_path):
    blobs = []
    for run, jobs in (("a", 1), ("b", 4), ("c", 1)):
        out = tmp_path / run
        cfg = dict(FAST_CFG, output_dir=str(out))
        rc = main(["--config", write_cfg(tmp_path, cfg, f"{run}.yaml"),
                   "--jobs", str(jobs), "--no-figures"])
        assert rc == 0
        blobs.append({
            p.name: p.read_bytes() for p in sorted(out.iterdir())
        })
    assert blobs[0] == blobs[1] == blobs[2]


def test_seed_flag_changes_outputs(tmp_path):
    outs = []
    for run, seed in (("s1", "7"), ("s2", "8")):
        out = tmp_path / run
        cfg = dict(FAST_CFG, output_dir=str(out))
        main(["--config", write_cfg(tmp_path, cfg, f"{run}.yaml"),
              "--seed", seed, "--no-figures"])
        outs.append((out / "pure_death_mc.csv").read_bytes())
    assert outs[0] != outs[1]


def test_figures_written_alongside_csv(tmp_path):
    out = tmp_path / "out"
    cfg = {
        "seed": 1,
        "output_dir": str(out),
        "experiments": [{"name": "pure_death_mc", "params": {"replicates": 20_000}}],
    }
    rc = main(["--config", write_cfg(tmp_path, cfg)])
    assert rc == 0
    assert (out / "pure_death_mc.csv").exists()
    assert (out / "pure_death_mc.png").stat().st_size > 0
