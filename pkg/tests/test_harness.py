import json
import os
import subprocess
import sys

import pytest

from eigenflow.errors import ConfigError
from eigenflow.harness import parse_config, report_checksum, run_experiment


def _cfg(**over):
    doc = {"experiment": "Moments", "seed": 7,
           "model": {"kind": "Dyson", "n_particles": 8},
           "numerics": {"K": 3}}
    doc.update(over)
    return doc


def test_parse_minimal_defaults():
    cfg = parse_config(json.dumps(_cfg()))
    assert cfg.numerics["dt"] == 1e-3
    assert cfg.replicas == 1


def test_missing_seed():
    doc = _cfg()
    del doc["seed"]
    with pytest.raises(ConfigError) as e:
        parse_config(json.dumps(doc))
    assert e.value.field == "seed"


def test_bad_n_particles():
    doc = _cfg(experiment="Simulate")
    doc["model"]["n_particles"] = 0
    with pytest.raises(ConfigError) as e:
        parse_config(json.dumps(doc))
    assert e.value.field == "model.n_particles"


def test_bad_experiment():
    with pytest.raises(ConfigError):
        parse_config(json.dumps(_cfg(experiment="Plot")))


def test_degree_cap():
    with pytest.raises(ConfigError) as e:
        parse_config(json.dumps(_cfg(numerics={"K": 13})))
    assert e.value.field == "numerics.K"


def test_invalid_json():
    with pytest.raises(ConfigError):
        parse_config("{not json")


def test_replicas_must_be_positive():
    with pytest.raises(ConfigError):
        parse_config(json.dumps(_cfg(replicas=0)))


def test_moments_experiment_writes_report(tmp_path):
    doc = _cfg(output={"dir": str(tmp_path)})
    report = run_experiment(parse_config(json.dumps(doc)))
    assert report["summary_pass"]
    on_disk = json.loads((tmp_path / "report.json").read_text())
    assert on_disk["checksum"] == report["checksum"]
    assert (tmp_path / "moments.csv").exists()


def test_report_checksum_ignores_timing():
    a = {"x": 1, "wall_clock_s": 5.0}
    b = {"x": 1, "wall_clock_s": 99.0}
    assert report_checksum(a) == report_checksum(b)
    assert report_checksum({"x": 2}) != report_checksum(a)


def test_same_config_same_report(tmp_path):
    doc = _cfg(experiment="Simulate", replicas=2,
               model={"kind": "Dyson", "n_particles": 6},
               numerics={"T": 0.05, "dt": 5e-3},
               initial={"kind": "WarmStart", "t0": 0.1},
               output={"dir": str(tmp_path / "a")})
    r1 = run_experiment(parse_config(json.dumps(doc)))
    doc["output"]["dir"] = str(tmp_path / "b")
    r2 = run_experiment(parse_config(json.dumps(doc)))
    assert r1["checksum"] == r2["checksum"]


def test_checksum_stable_across_threads(tmp_path):
    doc = _cfg(experiment="CLT", replicas=24,
               model={"kind": "Dyson", "n_particles": 10},
               numerics={"T": 0.2, "dt": 2e-3, "K": 2, "min_gap": 1e-4},
               initial={"kind": "WarmStart", "t0": 0.1})
    sums = []
    for threads in (1, 4, 16):
        doc["output"] = {"dir": str(tmp_path / str(threads))}
        rep = run_experiment(parse_config(json.dumps(doc)), threads=threads)
        sums.append(rep["checksum"])
    assert sums[0] == sums[1] == sums[2]


def test_simulate_writes_trajectories(tmp_path):
    doc = _cfg(experiment="Simulate", replicas=2,
               model={"kind": "OrnsteinUhlenbeck", "n_particles": 4},
               numerics={"T": 0.05, "dt": 5e-3},
               initial={"kind": "Zero"},
               output={"dir": str(tmp_path)})
    run_experiment(parse_config(json.dumps(doc)))
    assert (tmp_path / "trajectory_0.csv").exists()
    assert (tmp_path / "trajectory_1.csv").exists()


def test_compare_degenerate_flag(tmp_path):
    doc = _cfg(experiment="Compare", replicas=3,
               model={"kind": "Dyson", "n_particles": 8,
                      "params": {"c_low": 1.0, "c_high": 1.0}},
               numerics={"T": 0.1, "dt": 2e-3},
               output={"dir": str(tmp_path)})
    rep = run_experiment(parse_config(json.dumps(doc)))
    assert rep["note"] == "degenerate: equal drifts"
    assert rep["checks"][0]["passed"]


def test_cli_exit_codes(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(_cfg(output={"dir": str(tmp_path)})))
    env = dict(os.environ)
    r = subprocess.run([sys.executable, "-m", "eigenflow.cli", "moments",
                        "--config", str(cfg_path)], capture_output=True,
                       text=True, env=env)
    assert r.returncode == 0
    assert "summary: PASS" in r.stdout
    # subcommand/config mismatch is a config error
    r = subprocess.run([sys.executable, "-m", "eigenflow.cli", "clt",
                        "--config", str(cfg_path)], capture_output=True,
                       text=True, env=env)
    assert r.returncode == 2
    r = subprocess.run([sys.executable, "-m", "eigenflow.cli", "moments",
                        "--config", str(tmp_path / "missing.json")],
                       capture_output=True, text=True, env=env)
    assert r.returncode != 0
