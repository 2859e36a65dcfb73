import csv
import json
import math

import numpy as np
import pytest

from ilw import cli
from ilw import evolve as ev
from ilw.errors import BlowUpError


def read_csv(path):
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    meta = {}
    body = []
    for line in lines:
        if line.startswith("# "):
            key, val = line[2:].split("=", 1)
            meta[key] = float(val)
        else:
            body.append(line)
    rows = list(csv.reader(body))
    return meta, rows[0], np.array(rows[1:], dtype=float)


def run(args, tmp_path, capsys):
    code = cli.main(args + ["--out", str(tmp_path), "--json"])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_wave_command(tmp_path, capsys):
    code, rep = run(["wave", "--k", "0.5"], tmp_path, capsys)
    assert code == 0
    assert rep["command"] == "wave"
    assert all(a["pass"] for a in rep["assertions"])
    meta, header, data = read_csv(tmp_path / "wave.csv")
    assert header == ["x", "phi_elliptic", "phi_fourier", "abs_diff"]
    assert set(meta) == {"c", "A", "a", "sigma", "k1"}
    assert abs(meta["k1"] - 0.944085037) < 1e-6
    assert data.shape == (256, 4)
    assert data[:, 3].max() < 1e-9
    assert int(np.argmin(data[:, 1])) == 128
    assert (tmp_path / "wave.svg").read_text().startswith("<svg")


def test_wave_output_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    run(["wave", "--k", "0.85"], a, capsys)
    run(["wave", "--k", "0.85"], b, capsys)
    assert (a / "wave.csv").read_bytes() == (b / "wave.csv").read_bytes()
    ja = json.loads((a / "wave.json").read_text())
    jb = json.loads((b / "wave.json").read_text())
    ja.pop("wall_ms"), jb.pop("wall_ms")
    assert ja == jb


def test_float_format_round_trips():
    for x in (math.pi, 1e-300, -2.0 / 3.0, 123456789.123456789):
        assert float(cli.fmt(x)) == x


def test_json_serialiser():
    text = cli.dumps({"b": [1.5, float("nan")], "a": {"y": True, "x": np.int64(3)}})
    assert json.loads(text) == {"a": {"x": 3, "y": True}, "b": [1.5, None]}
    assert text.index('"a"') < text.index('"b"')


@pytest.mark.parametrize("args", [
    ["wave", "--k", "0.99"],
    ["wave", "--N", "7"],
    ["wave", "--delta", "-1"],
    ["speed-scan", "--k-range", "0.1:0.99:5"],
    ["speed-scan", "--k-range", "nonsense"],
    ["wave", "--k", "abc"],
    ["nosuchcommand"],
])
def test_invalid_input_exit_code(args, tmp_path):
    assert cli.main(args + ["--out", str(tmp_path)]) == 2


def test_config_file_and_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nk = 0.3\nN = 128\n")
    code, rep = run(["wave", "--config", str(cfg)], tmp_path, capsys)
    assert code == 0
    assert rep["inputs"]["k"] == 0.3 and rep["inputs"]["N"] == 128
    code, rep = run(["wave", "--config", str(cfg), "--k", "0.6"], tmp_path, capsys)
    assert rep["inputs"]["k"] == 0.6 and rep["inputs"]["N"] == 128


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert cli.main(["wave", "--config", str(bad), "--out", str(tmp_path)]) == 2
    bad.write_text("k 0.5\n")
    assert cli.main(["wave", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert cli.main(["wave", "--config", str(tmp_path / "missing"), "--out", str(tmp_path)]) == 2


def test_speed_scan(tmp_path, capsys):
    code, rep = run(["speed-scan", "--k-range", "0.05:0.93:12"], tmp_path, capsys)
    assert code == 0
    assert abs(rep["outputs"]["k0"] - 0.795178532) < 1e-6
    _, header, data = read_csv(tmp_path / "speed_scan.csv")
    assert header == ["k", "c", "dc_dk", "N", "dN_dk", "a", "minus_phi_half_period"]
    assert data.shape == (12, 7)
    assert np.all(data[:, 2] > 0)
    assert np.all(data[:, 5] > data[:, 6])
    assert (tmp_path / "speed_scan.svg").exists()


@pytest.mark.parametrize("k", [0.5, 0.85])
def test_stability_command(tmp_path, capsys, k):
    code, rep = run(["stability", "--k", str(k)], tmp_path, capsys)
    assert code == 0
    kre = rep["outputs"]["krein"]
    assert kre["verdict"] == "LinearlyStable"
    assert kre["K_Ham"] == 0
    assert kre["I_direct"] > 0
    assert rep["outputs"]["spectrum"]["n_neg"] == 1
    assert json.loads((tmp_path / "stability.json").read_text())["command"] == "stability"


def test_stability_standing_wave(tmp_path, capsys):
    from ilw.wave import speed_root_k0
    k0 = speed_root_k0(math.pi, 1.0)
    code, rep = run(["stability", "--k", repr(k0)], tmp_path, capsys)
    assert code == 0
    assert rep["outputs"]["inconclusive_standing_wave"] is True
    assert rep["outputs"]["krein"]["verdict"] == "Inconclusive"
    assert rep["outputs"]["krein"]["I_direct"] > 0


def test_evolve_pure_wave(tmp_path, capsys):
    code, rep = run(["evolve", "--k", "0.85", "--eps", "0", "--dt", "1.25e-4", "--t-end", "0.5"],
                    tmp_path, capsys)
    assert code == 0
    assert rep["outputs"]["sup_rho_W"] < 1e-6
    _, header, data = read_csv(tmp_path / "evolve.csv")
    assert header == ["t", "rho_W", "E_minus1", "E_0", "E_1", "M_k"]
    assert data[0, 0] == 0.0 and data[-1, 0] == pytest.approx(0.5)


def test_evolve_reports_drift_failure(tmp_path, capsys):
    # at dt = 1e-3 the E_1 drift exceeds 1e-8 within t = 1
    code, rep = run(["evolve", "--k", "0.85", "--dt", "1e-3", "--t-end", "1"], tmp_path, capsys)
    assert code == 1
    failed = [a["name"] for a in rep["assertions"] if not a["pass"]]
    assert "E_1 relative drift" in failed


def test_evolve_rejects_uneven_horizon(tmp_path):
    assert cli.main(["evolve", "--dt", "0.3", "--t-end", "1", "--out", str(tmp_path)]) == 2


def test_evolve_blow_up_dumps_state(tmp_path, monkeypatch):
    def boom(profile, perturbation, config):
        last = ev.make_state(profile.field, config.delta, 0.25)
        raise BlowUpError("synthetic", last_state=last)

    monkeypatch.setattr(ev, "stability_experiment", boom)
    assert cli.main(["evolve", "--t-end", "1", "--dt", "0.001", "--out", str(tmp_path)]) == 1
    meta, header, data = read_csv(tmp_path / "evolve_last_state.csv")
    assert meta["t"] == 0.25
    assert header == ["x", "u"] and data.shape == (256, 2)


def test_verify_all_subset(tmp_path, capsys):
    code, rep = run(["verify-all", "--criteria", "1,2,3,14"], tmp_path, capsys)
    assert code == 0
    assert len(rep["assertions"]) == 5
    assert all(a["pass"] for a in rep["assertions"])
    assert cli.main(["verify-all", "--criteria", "99", "--out", str(tmp_path)]) == 2


def test_human_readable_output(tmp_path, capsys):
    assert cli.main(["wave", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "all assertions passed" in out
