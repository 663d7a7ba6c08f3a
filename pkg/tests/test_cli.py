import csv

import pytest

from relcurrent.cli import MAX_GRID_POINTS, main


def rows(path):
    with open(path) as fh:
        return [r for r in csv.DictReader(line for line in fh if not line.startswith("#"))]


def test_check_passes_and_is_reproducible(tmp_path, capsys):
    out = tmp_path / "check"
    assert main(["check", "--out", str(out), "--threads", "1", "--samples", "30"]) == 0
    first = (out / "report.txt").read_bytes()
    assert main(["check", "--out", str(out), "--threads", "1", "--samples", "30"]) == 0
    assert (out / "report.txt").read_bytes() == first
    printed = capsys.readouterr().out
    assert printed.count("PASS") >= 30
    assert len(rows(out / "results.csv")) >= 30
    assert (out / "timings.txt").exists()
    assert b"config.threads = 1" in first


def test_check_coarse_nodes_names_gate(tmp_path, capsys):
    assert main(["check", "--out", str(tmp_path), "--nodes", "8", "--samples", "10"]) == 1
    assert "quadrature-gate" in capsys.readouterr().err


def test_nogo_spin_half(tmp_path):
    assert main(["nogo", "--spin", "1/2", "--out", str(tmp_path), "--threads", "1"]) == 0
    (row,) = rows(tmp_path / "results.csv")
    assert float(row["deficit"]) < 0
    assert float(row["separation"]) >= 100
    assert (tmp_path / "deficits.png").exists()
    report = (tmp_path / "report.txt").read_text()
    assert "status = pass" in report and "version.numpy" in report


def test_nogo_compare_analytic(tmp_path):
    assert main(["nogo", "--spin", "0", "--compare-analytic", "--out", str(tmp_path), "--no-plots"]) == 0
    (row,) = rows(tmp_path / "results.csv")
    assert float(row["rel_agreement"]) <= 1e-6
    assert float(row["oracle_rel_agreement"]) <= 1e-6
    assert not (tmp_path / "deficits.png").exists()


def test_nogo_sweep_is_cartesian(tmp_path):
    code = main(["nogo", "--sweep", "0,0.5", "--sigma", "0.25,0.5", "--nodes", "20", "--levels", "2", "--out", str(tmp_path), "--no-plots"])
    assert code == 0
    table = rows(tmp_path / "results.csv")
    assert [(r["spin"], r["sigma"]) for r in table] == [("0", "0.25"), ("0", "0.5"), ("1/2", "0.25"), ("1/2", "0.5")]


def test_nogo_inconclusive_exit(tmp_path):
    assert main(["nogo", "--spin", "0", "--nodes", "8", "--out", str(tmp_path), "--no-plots"]) == 2
    assert "status = inconclusive" in (tmp_path / "report.txt").read_text()


def test_dirac_control(tmp_path):
    assert main(["dirac-control", "--nodes", "24", "--levels", "1", "--out", str(tmp_path)]) == 0
    table = rows(tmp_path / "results.csv")
    assert len(table) == 12
    assert (tmp_path / "commutator_matrix.png").exists()


def test_dirac_control_rotated(tmp_path):
    assert main(["dirac-control", "--levels", "1", "--rotation", "1,1,0,0.7", "--p0", "0.2,0,0", "--out", str(tmp_path), "--no-plots"]) == 0


def test_dirac_control_wrong_spin(tmp_path):
    assert main(["dirac-control", "--spin", "0", "--out", str(tmp_path)]) == 64


def test_density_line_symmetric(tmp_path):
    assert main(["density", "--spin", "0", "--points", "21", "--nodes", "12", "--out", str(tmp_path)]) == 0
    d = [float(r["density"]) for r in rows(tmp_path / "results.csv")]
    assert d == pytest.approx(d[::-1], abs=1e-14)
    assert (tmp_path / "density.png").exists()


def test_density_volume_parseval(tmp_path):
    args = ["density", "--spin", "0", "--grid", "volume", "--points", "25", "--extent", "6", "--nodes", "12"]
    assert main(args + ["--out", str(tmp_path), "--no-plots"]) == 0
    footer = [line for line in (tmp_path / "results.csv").read_text().splitlines() if line.startswith("#")]
    total = float(footer[0].split("=")[1])
    assert abs(total - 1) < 1e-4


def test_density_boosted_differs_from_mapped(tmp_path):
    assert main(["density", "--spin", "0", "--grid", "plane", "--points", "25", "--extent", "6", "--nodes", "14", "--boost", "0,0,0.5", "--out", str(tmp_path)]) == 0
    b = [float(r["density"]) for r in rows(tmp_path / "density_boosted.csv")]
    m = [float(r["density"]) for r in rows(tmp_path / "density_mapped.csv")]
    assert b != pytest.approx(m, rel=1e-3)
    report = (tmp_path / "report.txt").read_text()
    rel = float(report.split("nonlocality.relative_l2 = ")[1].split()[0])
    assert rel > 0.01


def test_density_grid_refused(tmp_path):
    points = int(round(MAX_GRID_POINTS ** (1 / 3))) + 2
    assert main(["density", "--grid", "volume", "--points", str(points), "--out", str(tmp_path)]) == 64


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["nogo", "--bogus"], ["nogo", "--nodes", "4"], ["nogo", "--boost", "1,0,0"]])
def test_bad_usage(argv, tmp_path):
    assert main(argv + (["--out", str(tmp_path)] if argv[:1] == ["nogo"] else [])) == 64


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("spin = 0\nnodes = 16\ngate-tol = 1e-7\nplots = false\n")
    assert main(["nogo", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert "config.nodes = 16" in (tmp_path / "o" / "report.txt").read_text()
