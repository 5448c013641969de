import csv
import subprocess
import sys

import pytest

from dtcs.cli import main

CONFIG = """n = 64
m = 16
s = 2
d_values = 0, 3
snr_db_values = inf
trials = 3
master_seed = 1

[matrix]
kind = FConsecBegin
"""


def test_analyze(tmp_path, capsys):
    out = tmp_path / "a.csv"
    assert main(["analyze", "--kind", "FConsecBegin", "--m", "24", "--n", "128", "--d-max", "20",
                 "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 21
    assert float(rows[0]["welch"]) == pytest.approx(0.1847, abs=1e-4)


def test_check_guarantee(tmp_path, capsys):
    out = tmp_path / "g.csv"
    assert main(["check-guarantee", "--kind", "FConsecBegin", "--m", "16", "--n", "16", "--s", "1",
                 "--d-max", "2", "--out", str(out)]) == 0
    assert "admissible d: 0,1,2" in capsys.readouterr().out


def test_recover(capsys):
    assert main(["recover", "--kind", "FConsecBegin", "--m", "64", "--n", "1024", "--s", "1",
                 "--d", "13"]) == 0
    out = capsys.readouterr().out
    assert "rho_d: 1.0" in out
    assert "true support:" in out and "rho_2:" in out


def test_experiment_deterministic(tmp_path):
    cfg = tmp_path / "c.txt"
    cfg.write_text(CONFIG)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["experiment", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["experiment", "--config", str(cfg), "--out", str(b), "--threads", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 3


@pytest.mark.parametrize("argv", [
    ["analyze", "--kind", "Nope", "--m", "2", "--n", "4", "--out", "x"],
    ["analyze", "--kind", "FRand", "--m", "5", "--n", "4", "--out", "x"],
    ["recover", "--kind", "FRand", "--m", "4", "--n", "8", "--s", "1", "--d", "0", "--snr-db", "loud"],
    [],
])
def test_invalid_arguments(argv):
    with pytest.raises(SystemExit) as exc:
        code = main(argv)
        raise SystemExit(code)
    assert exc.value.code == 1


def test_invalid_config(tmp_path):
    cfg = tmp_path / "c.txt"
    cfg.write_text(CONFIG.replace("trials = 3", "trials = -3"))
    assert main(["experiment", "--config", str(cfg), "--out", str(tmp_path / "o.csv")]) == 1
    assert main(["experiment", "--config", str(tmp_path / "missing"), "--out", "o.csv"]) == 1


def test_runtime_failure(tmp_path):
    # unwritable destination is a runtime failure
    assert main(["analyze", "--kind", "FRand", "--m", "2", "--n", "4",
                 "--out", str(tmp_path / "nope" / "a.csv")]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "dtcs", "analyze", "--kind", "FRand", "--m", "2",
                           "--n", "4", "--out", str(tmp_path / "a.csv")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
