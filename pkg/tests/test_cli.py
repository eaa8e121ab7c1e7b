"""Command-line interface: configs, overrides, outputs, and exit codes."""

import json

import numpy as np
import pytest

from robustms.cli import apply_overrides, config_hash, main


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def test_mtms_table(tmp_path):
    assert run(tmp_path, "mtms", "--n", "2") == 0
    lines = (tmp_path / "mtms.csv").read_text().splitlines()
    assert lines[0].startswith("# config_hash: ")
    assert lines[1] == "# seed: 0"
    assert lines[2] == "n,j,c_j,r_heat,r_time,r_heat_scaled"
    rows = [l.split(",") for l in lines[3:]]
    assert len(rows) == 3  # one tone for n=1, two for n=2
    n2 = [r for r in rows if r[0] == "2"]
    assert abs(float(n2[0][2]) + 1.0 / np.sqrt(3.0)) < 1e-10
    assert abs(float(n2[1][2]) - 2.0 / np.sqrt(3.0)) < 1e-10
    assert abs(float(n2[0][4]) - np.sqrt(3.0)) < 1e-8


def test_simulate_noise_free(tmp_path):
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({"params": {"fock_cutoff": 12}}))
    assert run(tmp_path, "simulate", "--config", str(cfg)) == 0
    lines = (tmp_path / "gate.csv").read_text().splitlines()
    header = lines[2].split(",")
    values = dict(zip(header, lines[3].split(",")))
    assert float(values["infidelity"]) < 1e-6
    assert values["n_traj"] == "1"


def test_determinism_byte_identical(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    cfg = tmp_path / "sim.json"
    cfg.write_text(
        json.dumps(
            {
                "params": {"fock_cutoff": 6},
                "noise_z": {"correlation_time": 1.0, "stationary_std": 500.0},
                "ensemble": 4,
            }
        )
    )
    for out in (a, b):
        assert main(["simulate", "--config", str(cfg), "--out", str(out), "--seed", "5"]) == 0
    assert (a / "gate.csv").read_bytes() == (b / "gate.csv").read_bytes()


def test_dag_outputs(tmp_path):
    assert run(tmp_path, "dag", "--scheme", "mlcdd") == 0
    metrics = (tmp_path / "dag_metrics.csv").read_text().splitlines()[-1]
    assert metrics == "22,20,14"
    dag = json.loads((tmp_path / "dag.json").read_text())
    assert len(dag["nodes"]) == 22
    assert (tmp_path / "dag.dot").read_text().startswith("digraph")


def test_set_overrides_and_hash_stability(tmp_path):
    cfg = {"params": {"fock_cutoff": 6}}
    over = apply_overrides(cfg, ["params.fock_cutoff=8", "n_bar=0.5"])
    assert over["params"]["fock_cutoff"] == 8
    assert over["n_bar"] == 0.5
    assert cfg["params"]["fock_cutoff"] == 6  # original untouched
    # hash depends on content, not key order
    h1 = config_hash({"a": 1, "b": {"c": 2}})
    h2 = config_hash({"b": {"c": 2}, "a": 1})
    assert h1 == h2
    assert h1 != config_hash({"a": 1, "b": {"c": 3}})


def test_bad_override_exits_2(tmp_path, capsys):
    rc = run(tmp_path, "mtms", "--set", "not-an-assignment")
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_schema_error_names_the_field(tmp_path, capsys):
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({"params": {"fock_cutoff": "twelve"}}))
    rc = run(tmp_path, "simulate", "--config", str(cfg))
    assert rc == 2
    assert "params.fock_cutoff" in capsys.readouterr().err


def test_validate_warnings(tmp_path, capsys):
    cfg = tmp_path / "sim.json"
    cfg.write_text(
        json.dumps(
            {
                "params": {"omega_c": 2 * np.pi * 300e3, "fock_cutoff": 6},
                "n_bar": 5.0,
            }
        )
    )
    rc = main(["validate", "--config", str(cfg)])
    assert rc == 0
    text = capsys.readouterr().out
    assert "omega_c" in text and "thermal weight" in text


def test_validate_clean_config(tmp_path, capsys):
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({"params": {"fock_cutoff": 12}}))
    assert main(["validate", "--config", str(cfg)]) == 0
    assert "ok: no diagnostics" in capsys.readouterr().out


def test_missing_required_field_exits_2(tmp_path, capsys):
    cfg = tmp_path / "scan.json"
    cfg.write_text(json.dumps({}))
    rc = run(tmp_path, "scan", "--config", str(cfg))
    assert rc == 2
    assert "kind" in capsys.readouterr().err


def test_synthesize_match_writes_sequence(tmp_path):
    cfg = tmp_path / "syn.json"
    cfg.write_text(json.dumps({"kind": "match", "tones": 2}))
    assert run(tmp_path, "synthesize", "--config", str(cfg)) == 0
    lines = (tmp_path / "sequence.csv").read_text().splitlines()
    header = [l for l in lines if l.startswith("#")]
    rt = [l for l in header if l.startswith("# r_time:")]
    assert rt and 1.20 < float(rt[0].split(":")[1]) < 1.26
    assert "duration,phase,delta,amp" in lines
