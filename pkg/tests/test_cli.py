import json
import os
import subprocess
import sys

import pytest

from dfsphoton.cli import config_hash, load_config, run
from dfsphoton.config import RunConfig
from dfsphoton.io import read_csv


def cfg_file(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def test_couplings_task(tmp_path):
    out = tmp_path / "out"
    assert run(["couplings", "--out", str(out)]) == 0
    rows = read_csv(out / "couplings.csv")
    assert len(rows) == 9
    assert all(abs(float(r["J"])) < 1e-12 and abs(float(r["Gamma"]) - 1) < 1e-12 for r in rows)
    man = json.loads((out / "manifest.json").read_text())
    assert man["task"] == "couplings" and len(man["config_sha256"]) == 64
    assert man["artifacts"] == ["couplings.csv", "couplings.json"]


def test_sweep_fig3b_slope(tmp_path):
    import numpy as np

    from dfsphoton.sweeps import fit_slope

    cfg = cfg_file(tmp_path, {"task": "sweep-fig3b", "fig3b": {"J": {"start": 5, "stop": 50, "num": 4}, "gamma_prime": [0.0]}})
    assert run(["sweep-fig3b", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    rows = read_csv(tmp_path / "o" / "sweep_fig3b.csv")
    J = np.array([float(r["J"]) for r in rows])
    eps = np.array([float(r["infidelity_Y"]) for r in rows])
    assert fit_slope(J, eps) == pytest.approx(-2.0, abs=0.15)


def test_empty_range_exit_2(tmp_path):
    cfg = cfg_file(tmp_path, {"task": "sweep-fig3a", "fig3a": {"T": {"values": []}}})
    assert run(["sweep-fig3a", "--config", cfg, "--out", str(tmp_path)]) == 2
    cfg = cfg_file(tmp_path, {"task": "sweep-fig3a", "fig3a": {"T": {"start": 1, "stop": 2, "num": 0}}}, "b.json")
    assert run(["sweep-fig3a", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_unknown_key_exit_2(tmp_path):
    cfg = cfg_file(tmp_path, {"task": "gate", "gate": {"kind": "R_DG", "colour": "red"}})
    assert run(["gate", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_task_mismatch_and_bad_json_exit_2(tmp_path):
    assert run(["gate", "--config", cfg_file(tmp_path, {"task": "cz"}), "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["gate", "--config", str(bad), "--out", str(tmp_path)]) == 2


def test_numerical_regime_exit_3(tmp_path):
    cfg = cfg_file(tmp_path, {"task": "gate", "gate": {"kind": "P_G", "phi": 0.5, "omega": 2.0, "drive_detuning": 5.0}})
    assert run(["gate", "--config", cfg, "--out", str(tmp_path)]) == 3


def test_missing_config_exit_4(tmp_path):
    assert run(["gate", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 4


def test_unwritable_output_exit_4(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run(["couplings", "--out", str(blocker / "sub")]) == 4


def test_env_default_output(tmp_path, monkeypatch):
    monkeypatch.setenv("DFSPHOTON_OUT", str(tmp_path / "envout"))
    assert run(["couplings"]) == 0
    assert (tmp_path / "envout" / "couplings.csv").exists()


def test_overrides_and_hash(tmp_path):
    class A:
        task = "sweep-figS1"
        config = None
        dt = 5e-4
        seed = 99

    cfg = load_config(A)
    assert cfg.numerics.dt == 5e-4 and cfg.figS1.seed == 99
    assert config_hash(cfg) == config_hash(RunConfig.model_validate(cfg.model_dump()))
    assert config_hash(cfg) != config_hash(RunConfig(task="sweep-figS1"))


def test_threads_give_identical_csv(tmp_path):
    cfg = cfg_file(tmp_path, {"task": "sweep-fig3c", "fig3c": {"B": {"values": [0.02, 0.05]}, "kinds": ["gaussian"]}})
    assert run(["sweep-fig3c", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert run(["sweep-fig3c", "--config", cfg, "--out", str(tmp_path / "b"), "--threads", "2"]) == 0
    a = (tmp_path / "a" / "sweep_fig3c.csv").read_bytes()
    assert a == (tmp_path / "b" / "sweep_fig3c.csv").read_bytes()


def test_emit_cz_protocol_tasks(tmp_path):
    for task in ("emit", "cz", "protocol", "gate"):
        assert run([task, "--out", str(tmp_path / task)]) == 0
    emit = json.loads((tmp_path / "emit" / "emit.json").read_text())
    assert emit["target_fidelity"] >= 0.99
    proto = json.loads((tmp_path / "protocol" / "protocol.json").read_text())
    assert proto["fidelity"] == pytest.approx(1.0, abs=1e-9)


def test_schema_and_console_script(tmp_path):
    r = subprocess.run([sys.executable, "-m", "dfsphoton.cli", "schema"], capture_output=True, text=True)
    assert r.returncode == 0 and "RunConfig" in r.stdout
    r = subprocess.run([sys.executable, "-m", "dfsphoton.cli", "couplings", "--out", str(tmp_path)],
                       capture_output=True, text=True, env={**os.environ})
    assert r.returncode == 0
