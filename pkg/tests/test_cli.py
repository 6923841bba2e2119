import csv
import io
import json
import subprocess
import sys

import pytest

from harmonic_trimer import cli
from harmonic_trimer.approx import pt_ground_energy


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_csv(text):
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# "):
            k, v = line[2:].split("=", 1)
            meta[k] = v
        else:
            body.append(line)
    return meta, list(csv.DictReader(io.StringIO("\n".join(body))))


def test_exact_table(capsys):
    code, out, _ = run_cli(capsys, "exact", "--N", "2", "--omega", "1")
    assert code == 0
    meta, rows = parse_csv(out)
    assert meta["E"] == "21" and meta["degeneracy"] == "6" and meta["split_bound"] == "4"
    assert len(rows) == 6
    for r in rows:
        assert int(r["n1"]) + int(r["n2"]) + int(r["l"]) == 2
        assert int(r["N1"]) + int(r["N2"]) + int(r["N3"]) == 2


def test_pt(capsys):
    code, out, _ = run_cli(capsys, "pt", "--omega", "1", "--R-values", "0", "0.2")
    assert code == 0
    _, rows = parse_csv(out)
    assert float(rows[0]["E"]) == 9.0
    assert float(rows[1]["E"]) == pytest.approx(pt_ground_energy(1.0, 0.2), rel=1e-11)


def test_pt_compare(capsys):
    code, out, _ = run_cli(capsys, "pt", "--omega", "1", "--R", "0.1", "--M", "12", "--compare")
    assert code == 0
    _, rows = parse_csv(out)
    assert abs(float(rows[0]["RE"])) < 1.0


def test_spectrum_csv_and_json(capsys):
    args = ("spectrum", "--omega", "0.5", "--R", "0.5", "--M", "8", "--states", "4")
    code, out, _ = run_cli(capsys, *args)
    assert code == 0
    meta, rows = parse_csv(out)
    assert meta["M"] == "8"
    assert [(r["N"], r["n"], r["multiplicity"]) for r in rows] == [("0", "0", "1"), ("1", "0", "2"), ("1", "1", "1")]
    code, js, _ = run_cli(capsys, *args, "--format", "json")
    doc = json.loads(js)
    assert doc["command"] == "spectrum"
    assert doc["columns"][:3] == ["N", "n", "E"]
    assert [float(r["E"]) for r in doc["rows"]] == pytest.approx([float(r["E"]) for r in rows], rel=1e-11)


def test_output_is_deterministic(capsys, tmp_path):
    args = ["spectrum", "--omega", "1", "--R", "1", "--M", "7", "--states", "5"]
    _, first, _ = run_cli(capsys, *args)
    _, second, _ = run_cli(capsys, *args)
    assert first == second
    path = tmp_path / "out.csv"
    assert run_cli(capsys, *args, "--output", str(path))[1] == ""
    assert path.read_text() == first


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[common]\nomega = 2\n\n[exact]\nN = 1\n")
    code, out, _ = run_cli(capsys, "--config", str(cfg), "exact")
    assert code == 0
    assert parse_csv(out)[0]["E"] == "30"
    code, out, _ = run_cli(capsys, "--config", str(cfg), "exact", "--omega", "1")
    assert parse_csv(out)[0]["E"] == "15"
    cfg.write_text("[common]\nomegaa = 2\n")
    assert run_cli(capsys, "--config", str(cfg), "exact")[0] == 2
    cfg.write_text("[bogus]\nomega = 2\n")
    assert run_cli(capsys, "--config", str(cfg), "exact")[0] == 2


@pytest.mark.parametrize(
    "argv, code",
    [
        (["exact", "--omega", "-1"], 2),
        (["spectrum", "--R", "-0.5"], 2),
        (["spectrum", "--M", "6", "--states", "500"], 2),
        (["spectrum", "--format", "xml"], 2),
        (["scan", "--M", "6"], 2),
        (["minimize", "--bracket", "3", "1"], 2),
        (["nonsense"], 2),
        (["spectrum", "--M", "50"], 4),
        (["convergence", "--M-list", "10", "45"], 4),
    ],
)
def test_exit_codes(capsys, argv, code):
    assert run_cli(capsys, *argv)[0] == code


def test_no_minimum_exit_code(capsys):
    code, _, err = run_cli(capsys, "minimize", "--omega", "0.5", "--M", "8", "--bracket", "0", "0.5")
    assert code == 1
    assert "no interior minimum" in err


def test_convergence_error_exit_code(capsys, monkeypatch):
    def fail(*a, **k):
        raise cli.ConvergenceError("ARPACK did not converge")

    monkeypatch.setattr(cli, "solve", fail)
    code, _, err = run_cli(capsys, "spectrum", "--M", "6")
    assert code == 3
    assert "did not converge" in err


def test_quadrature_dump(capsys):
    code, out, _ = run_cli(capsys, "quadrature-dump", "--M", "5")
    assert code == 0
    _, rows = parse_csv(out)
    assert len(rows) == 5
    assert sum(float(r["weight"]) for r in rows) == pytest.approx(1.0, rel=1e-11)


def test_scan_and_convergence(capsys):
    code, out, _ = run_cli(capsys, "scan", "--omega", "1", "--M", "7", "--states", "3", "--R-range", "0", "1", "0.5")
    assert code == 0
    _, rows = parse_csv(out)
    assert sorted({float(r["R"]) for r in rows}) == [0.0, 0.5, 1.0]
    code, out, _ = run_cli(capsys, "convergence", "--omega", "1", "--R", "1", "--M-list", "6", "8", "--states", "2")
    assert code == 0
    _, rows = parse_csv(out)
    assert len(rows) == 4


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "harmonic_trimer.cli", "exact", "--N", "0", "--omega", "1"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert "# E=9" in proc.stdout
