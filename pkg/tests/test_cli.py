import json
import subprocess
import sys

import numpy as np
import pytest

from propertime.cli import main
from propertime.config import parse_config
from propertime.errors import ParseError, ValidationError


@pytest.fixture
def outdir(tmp_path, monkeypatch):
    monkeypatch.setenv("PROPERTIME_OUTPUT_DIR", str(tmp_path))
    return tmp_path


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_free_evolve_defaults():
    cfg = parse_config("free-evolve")
    assert cfg.m == 1.0 and cfg.dims == (256, 1, 1) and cfg.pmax == (8.0, 0.0, 0.0)


def test_zero_sigma(tmp_path):
    p = write(tmp_path, "[free-evolve]\nsigma_p = 0\n")
    with pytest.raises(ValidationError, match="sigma_p > 0"):
        parse_config("free-evolve", p)


def test_unknown_key_suggests(tmp_path):
    p = write(tmp_path, "[free-evolve]\n# comment\nsigmap = 0.3\n")
    with pytest.raises(ParseError, match=r"run.ini:3.*'sigma_p'"):
        parse_config("free-evolve", p)


def test_parse_errors(tmp_path):
    with pytest.raises(ParseError):
        parse_config("free-evolve", tmp_path / "missing.ini")
    with pytest.raises(ParseError, match=":2"):
        parse_config("free-evolve", write(tmp_path, "[free-evolve]\njunk line\n"))
    with pytest.raises(ParseError, match="bad value"):
        parse_config("free-evolve", write(tmp_path, "[free-evolve]\ndims = 4, 4\n"))
    with pytest.raises(ParseError, match="unknown section"):
        parse_config("free-evolve", write(tmp_path, "[freeevolve]\n"))


def test_flags_override_file(tmp_path):
    p = write(tmp_path, "[free-evolve]\nsigma_p = 0.3\nt1 = 4\n")
    cfg = parse_config("free-evolve", p, {"sigma_p": 0.2})
    assert cfg.sigma_p == 0.2 and cfg.t1 == 4.0


def test_derive_d(capsys):
    assert main(["derive-d"]) == 0
    out = capsys.readouterr().out
    assert "kernel dims: 2, 1, 1" in out
    assert main(["derive-d", "--json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert list(rep["kernel_dims"].values()) == [2, 1, 1]
    assert np.allclose(rep["D_real"], np.diag([1, 1, -1, -1]))


def test_free_evolve_positive(outdir):
    assert main(["free-evolve", "--nsamples", "257", "--spectrum", "spec.csv"]) == 0
    text = (outdir / "free_evolve.csv").read_text()
    assert text.startswith("t,rate,tau\n") and text.endswith("\n")
    data = np.loadtxt(outdir / "free_evolve.csv", delimiter=",", skiprows=1)
    assert np.max(np.abs(data[:, 1] - data[0, 1])) <= 1e-11
    assert (outdir / "spec.csv").read_text().startswith("freq,power\n")
    # 17 significant digits round-trip exactly
    first = text.splitlines()[2].split(",")
    assert float(first[1]) == data[1, 1]


def test_csv_deterministic(outdir):
    args = ["free-evolve", "--branch", "mixed", "--spin", "1,1", "--nsamples", "65"]
    main(args + ["--out", "a.csv"])
    main(args + ["--out", "b.csv"])
    assert (outdir / "a.csv").read_bytes() == (outdir / "b.csv").read_bytes()


def test_usage_errors(outdir, capsys):
    assert main(["free-evolve", "--sigma-p", "0"]) == 2
    assert "sigma_p > 0" in capsys.readouterr().err
    assert main(["magnetar", "--bmin", "-1"]) == 2
    assert main(["free-evolve", "--nsamples", "10"]) == 2


def test_magnetar(outdir):
    assert main(["magnetar", "--bmin", "1", "--bmax", "1e10", "--steps", "11"]) == 0
    lines = (outdir / "magnetar.csv").read_text().splitlines()
    assert lines[0] == "B_tesla,shift,flag"
    assert len(lines) == 12
    assert lines[1].endswith(",ok") and lines[-1].endswith(",expansion-invalid")
    assert main(["magnetar", "--no-log", "--steps", "3", "--out", "lin.csv"]) == 0


def test_fw_check(outdir, capsys):
    assert main(["fw-check"]) == 0
    lines = (outdir / "fw_check.csv").read_text().splitlines()
    assert lines[0] == "vscale,res_beta,res_rate,ratio_small"
    assert len(lines) == 5
    assert capsys.readouterr().out.count("PASS") == 3


def test_fw_check_failure_exit(outdir, capsys):
    # a velocity range far outside the asymptotic regime misses the bands
    assert main(["fw-check", "--vscales", "0.55,0.5", "--dims", "12,12"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_fw_check_config_validation(tmp_path):
    with pytest.raises(ValidationError):
        parse_config("fw-check", write(tmp_path, "[fw-check]\nvscales = 0.1, 0.2\n"))


def test_selftest_exit_code(capsys):
    assert main(["selftest", "--seed", "3"]) == 0
    assert capsys.readouterr().out.strip().endswith("ALL PASS")


def test_module_entry_point(outdir):
    r = subprocess.run([sys.executable, "-m", "propertime", "derive-d"], capture_output=True, text=True)
    assert r.returncode == 0 and "2, 1, 1" in r.stdout
    r = subprocess.run([sys.executable, "-m", "propertime", "free-evolve", "--bogus"], capture_output=True)
    assert r.returncode == 2
