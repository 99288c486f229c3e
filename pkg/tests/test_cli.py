import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from ecf_toolkit import cli, formats
from ecf_toolkit.ecf import random_spectral_measure


def run(argv, stdin="", capsys=None, monkeypatch=None):
    monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def sh(capsys, monkeypatch):
    return lambda argv, stdin="": run(argv, stdin, capsys, monkeypatch)


def test_ecf_then_tau_pipeline(sh):
    code, ecf_text, _ = sh(["ecf", "--model", "sqrt", "--m", "3"])
    assert code == 0
    code, out, _ = sh(["tau"], ecf_text)
    tau = json.loads(out)["tau"]
    assert tau['["0","1","2"]'] == pytest.approx(3 - 3 * math.sqrt(2) + math.sqrt(3), abs=1e-12)


def test_tau_marginal(sh):
    _, ecf_text, _ = sh(["ecf", "--model", "sqrt", "--m", "3"])
    _, out, _ = sh(["tau", "--marginal", "0,2"], ecf_text)
    obj = json.loads(out)
    assert obj["labels"] == ["0", "2"]
    assert obj["tau"]['["0","2"]'] == pytest.approx(2 - math.sqrt(2), abs=1e-15)


def test_validate_exit_codes(sh):
    bad = json.dumps({"labels": ["0", "1"], "theta": {'["0"]': 1, '["1"]': 1, '["0","1"]': 2.5}})
    code, out, _ = sh(["validate"], bad)
    assert code == 1
    report = json.loads(out)
    assert report["valid"] is False
    assert any("exceeds |A|" in d["message"] for d in report["diagnostics"])
    _, good, _ = sh(["ecf", "--model", "independent", "--m", "2"])
    code, out, _ = sh(["validate"], good)
    assert code == 0 and json.loads(out)["valid"] is True


def test_input_errors_exit_two(sh):
    code, _, err = sh(["validate"], "{not json")
    assert code == 2 and "malformed JSON" in err
    code, _, err = sh(["validate"], "hello")
    assert code == 2
    code, _, err = sh(["ecf", "--model", "nope", "--m", "2"])
    assert code == 2 and "unknown model" in err
    code, _, err = sh(["validate", "--input", "/nonexistent/file.json"])
    assert code == 2 and "cannot read" in err


def test_depset_vertices(sh, tmp_path):
    csv_path = tmp_path / "v.csv"
    code, out, _ = sh(["depset", "--model", "sqrt", "--m", "2", "--vertices-csv", str(csv_path)])
    assert code == 0
    obj = json.loads(out)
    assert len(obj["vertices"]) == 5
    assert len(obj["support"]) == 5
    assert csv_path.read_text().count("\n") == 6


def test_simulate_and_estimate(sh, tmp_path):
    sample = tmp_path / "x.csv"
    code, _, _ = sh(["simulate", "--model", "sqrt", "--m", "2", "--n", "20000", "--seed", "4",
                     "--output", str(sample)])
    assert code == 0
    meta = json.loads((tmp_path / "x.csv.meta.json").read_text())
    assert meta == {"n": 20000, "seed": 4, "generator": "counter-v1"}
    code, out, _ = sh(["estimate", "--input", str(sample)])
    est = json.loads(out)
    assert est["n"] == 20000
    full = est["theta"]['["0","1"]']
    assert abs(full - math.sqrt(2)) < 4 * est["se"]['["0","1"]']


def test_simulate_from_spectral_csv(sh):
    text = formats.spectral_to_csv(random_spectral_measure(3, 4, seed=0))
    code, out, _ = sh(["simulate", "--n", "10"], text)
    assert code == 0
    assert out.splitlines()[0] == "0,1,2" and len(out.splitlines()) == 11


def test_transform(sh, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    a.write_text(sh(["ecf", "--model", "independent", "--m", "2"])[1])
    b.write_text(sh(["ecf", "--model", "identical", "--m", "2"])[1])
    code, out, _ = sh(["transform", "--input", str(a), "--input", str(b), "--alpha-combine", "0.5"])
    assert code == 0 and json.loads(out)["theta"]['["0","1"]'] == 1.5
    code, out, _ = sh(["transform", "--input", str(a), "--bernstein", "log1p"])
    assert json.loads(out)["theta"]['["0","1"]'] == pytest.approx(math.log(3) / math.log(2))
    code, _, err = sh(["transform", "--input", str(a), "--bernstein", "cosh"])
    assert code == 2 and "cannot parse" in err
    code, _, _ = sh(["transform", "--input", str(a)])
    assert code == 2


def test_bound(sh):
    _, ecf_text, _ = sh(["ecf", "--model", "independent", "--m", "2"])
    code, out, _ = sh(["bound", "--x", "1,2"], ecf_text)
    assert code == 0 and json.loads(out)["log_bound"] == pytest.approx(-1.5)
    code, out, _ = sh(["bound", "--eta", "1,1,1", "--x", "1,2,4"])
    assert json.loads(out)["log_bound"] == pytest.approx(-1.75)
    code, _, _ = sh(["bound", "--eta", "0.9,0,0", "--x", "1,1,1"])
    assert code == 2


def test_check_command(sh):
    code, out, _ = sh(["check", "--model", "random", "--m", "4", "--q", "5", "--seed", "3"])
    obj = json.loads(out)
    assert code == 0 and obj["passed"]
    names = {c["name"] for c in obj["checks"]}
    assert {"validate", "alternation-agrees", "tau-roundtrip", "marginal-consistency", "polytope-support"} <= names
    bad = json.dumps({"labels": ["0", "1"], "theta": {'["0"]': 1, '["1"]': 1, '["0","1"]': 2.5}})
    code, out, _ = sh(["check"], bad)
    assert code == 1 and not json.loads(out)["passed"]


def test_brown_resnick_gamma(sh):
    code, out, _ = sh(["ecf", "--model", "br", "--gamma", "2", "--n", "30000", "--seed", "1"])
    obj = json.loads(out)
    raw, se = obj["raw"]['["0","1"]'], obj["se"]['["0","1"]']
    assert abs(raw - (1 + math.erf(0.5))) < 4 * se


def test_sites_models(sh, tmp_path):
    sites = tmp_path / "s.csv"
    sites.write_text("label,x1\na,0\nb,0.5\nc,2\n")
    code, out, _ = sh(["ecf", "--model", "m3box", "--sites", str(sites)])
    theta = json.loads(out)["theta"]
    assert theta['["a","b"]'] == pytest.approx(1.5)
    assert theta['["a","b","c"]'] == pytest.approx(2.5)
    code, out, _ = sh(["ecf", "--model", "br", "--sites", str(sites), "--n", "5000"])
    assert code == 0 and json.loads(out)["n"] == 5000
    code, _, err = sh(["ecf", "--model", "m3box", "--m", "2"])
    assert code == 2


def test_config_defaults_and_override(sh, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": "random", "m": 3, "q": 2, "seed": 9}))
    _, a, _ = sh(["ecf", "--config", str(cfg)])
    _, b, _ = sh(["ecf", "--model", "random", "--m", "3", "--q", "2", "--seed", "9"])
    assert a == b
    _, c, _ = sh(["ecf", "--config", str(cfg), "--seed", "10"])
    assert c != a
    cfg.write_text(json.dumps({"bogus": 1}))
    code, _, err = sh(["ecf", "--config", str(cfg)])
    assert code == 2 and "bogus" in err


def test_threads_env(sh, monkeypatch):
    monkeypatch.setenv("ECF_TOOLKIT_THREADS", "3")
    _, a, _ = sh(["simulate", "--model", "sqrt", "--m", "2", "--n", "40000"])
    monkeypatch.delenv("ECF_TOOLKIT_THREADS")
    _, b, _ = sh(["simulate", "--model", "sqrt", "--m", "2", "--n", "40000", "--threads", "1"])
    assert a == b


def test_console_script_version():
    out = subprocess.run([sys.executable, "-m", "ecf_toolkit.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "0.1.0" in out.stdout
