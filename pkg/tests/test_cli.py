import json
import subprocess
import sys

import numpy as np
import pytest

from cosheafph.cli import main


@pytest.fixture
def arc_files(tmp_path):
    pts, cfg = tmp_path / "arc.csv", tmp_path / "arc.json"
    assert main(["gen", "three-arc", "--out", str(pts), "--config-out", str(cfg)]) == 0
    return pts, cfg


def test_run_writes_all_outputs(arc_files, tmp_path):
    pts, cfg = arc_files
    out = {k: tmp_path / f"o.{k}" for k in ("csv", "svg", "eps", "ledger", "cos")}
    code = main(["run", str(pts), "--config", str(cfg), "--out", str(out["csv"]), "--plot", str(out["svg"]),
                 "--eps-report", str(out["eps"]), "--dump-ledger", str(out["ledger"]),
                 "--dump-cosheaves", str(out["cos"]), "--quiet"])
    assert code == 0
    lines = out["csv"].read_text().splitlines()
    assert lines[-2] == "birth,death,dim,multiplicity,annotation,significant"
    assert lines[-1].startswith("0.1,0.95,1,1,")
    assert any(line.startswith("# config_hash:") for line in lines)
    assert json.loads(out["eps"].read_text())["report"]["epsilon_star"] > 0.95
    ledger = json.loads(out["ledger"].read_text())["ledger"]
    assert [e["B_ker"] for e in ledger].count(1) == 1
    assert "summands:" in out["cos"].read_text()
    assert out["svg"].read_text().startswith("<svg")


def test_outputs_are_byte_identical_across_runs_and_threads(arc_files, tmp_path):
    pts, cfg = arc_files
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    la, lb = tmp_path / "a.json", tmp_path / "b.json"
    main(["run", str(pts), "--config", str(cfg), "--out", str(a), "--dump-ledger", str(la), "--quiet"])
    main(["run", str(pts), "--config", str(cfg), "--out", str(b), "--dump-ledger", str(lb), "--threads", "4",
          "--quiet"])
    assert a.read_bytes() == b.read_bytes()
    assert la.read_bytes() == lb.read_bytes()


def test_invalid_cover_exit_code(arc_files):
    pts, cfg = arc_files
    assert main(["run", str(pts), "--config", str(cfg), "--intervals=-2:0,0.5:5", "--quiet"]) == 2


def test_grid_above_epsilon_star_exit_code(arc_files):
    pts, cfg = arc_files
    assert main(["run", str(pts), "--config", str(cfg), "--grid", "5,6,7", "--quiet"]) == 3


def test_cover_json_and_field_column(tmp_path):
    rng = np.random.default_rng(0)
    pts = rng.uniform(0, 2, (30, 2))
    pts[0] = [1.0, 0.5]
    data = tmp_path / "pts.csv"
    # the third column is an external scalar
    np.savetxt(data, np.c_[pts, pts[:, 0]], delimiter=",", header="x,y,f", comments="")
    cover = tmp_path / "cover.json"
    cover.write_text(json.dumps({"intervals": [[-1, 1.2], [0.8, 3]], "names": ["left", "right"]}))
    out = tmp_path / "bc.csv"
    code = main(["run", str(data), "--cover", str(cover), "--field", "column:2", "--grid-max", "0.3",
                 "--grid-steps", "6", "--policy", "left", "--out", str(out), "--quiet"])
    assert code == 0
    assert "birth,death" in out.read_text()


def test_verify_suite_and_injected_failure(tmp_path, capsys):
    rep = tmp_path / "v.json"
    assert main(["verify", "--suite", "1", "--json", str(rep), "--quiet"]) == 0
    assert json.loads(rep.read_text())["ok"] is True
    assert "overall: pass" in capsys.readouterr().out
    assert main(["verify", "--suite", "0", "--inject-naive", "--quiet"]) == 1
    captured = capsys.readouterr()
    assert "overall: FAIL" in captured.out
    assert "first failure: three-arc/barcode_matches_standard" in captured.out
    assert "(index 2)" in captured.out


def test_density_command(tmp_path, capsys):
    pts = tmp_path / "td.csv"
    assert main(["gen", "two-density", "--out", str(pts)]) == 0
    dens = tmp_path / "dens.csv"
    assert main(["density", str(pts), "--radius", "0.1", "--out", str(dens)]) == 0
    report = json.loads(capsys.readouterr().out)
    (a, b), (c, d) = report["suggested_intervals"]
    assert a < c < b < d
    values = [float(x) for x in dens.read_text().splitlines() if x and not x.startswith("#") and x != "density"]
    assert sorted(set(values)) == [1.0, 3.0, 5.0]


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "cosheafph", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for cmd in ("run", "verify", "gen", "density"):
        assert cmd in out.stdout
