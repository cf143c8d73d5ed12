import json
import subprocess
import sys

import pytest

from fracpath.cli import main


@pytest.mark.parametrize("argv", [
    [],
    ["operator", "--bc", "robin", "--s", "0.5", "--np-list", "50", "--ne", "5", "--out", "x.csv"],
    ["operator", "--bc", "neumann", "--s", "0.5", "--np-list", "a,b", "--ne", "5", "--out", "x.csv"],
    ["poisson", "--s", "1.0", "--out", "x.csv"],
    ["poisson", "--s", "0", "--out", "x.csv"],
    ["plot", "--kind", "surface", "--in", "a.csv", "--out", "a.svg"],
    ["continue"],
    ["--threads", "0", "continue", "--config", "c.json"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_operator(tmp_path, capsys):
    out = tmp_path / "op.csv"
    code = main(["--seed", "3", "operator", "--bc", "dirichlet", "--s", "0.5", "--np-list", "30,60",
                 "--ne", "5", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n_p,h,err" and len(lines) == 3
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["seed"] == 3 and "slope" in summary
    assert "slope=" in capsys.readouterr().out


def test_poisson(tmp_path, capsys):
    out = tmp_path / "p.csv"
    assert main(["poisson", "--s", "0.75", "--np", "80", "--out", str(out)]) == 0
    assert json.loads(out.with_suffix(".json").read_text())["slope"] > 1.5


def test_continue_and_plot(tmp_path, capsys):
    cfg = {
        "model": "allen_cahn", "s": 0.5, "n_p": 41, "domain": [-5, 5],
        "continuation": {"ds0": 0.01, "ds_max": 0.05, "mu_range": [0.0, 0.5]},
        "tasks": [{"kind": "trivial_branch", "name": "trivial", "mu_start": 0.05}],
        "output_dir": str(tmp_path / "run"),
    }
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg))
    assert main(["--threads", "1", "continue", "--config", str(p)]) == 0
    assert (tmp_path / "run" / "trivial.csv").exists()
    svg = tmp_path / "d.svg"
    assert main(["plot", "--kind", "diagram", "--in", str(tmp_path / "run" / "trivial.csv"), "--out", str(svg)]) == 0
    assert svg.read_text().startswith("<svg")


def test_invalid_config_exits_2(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text('{"model": "allen_cahn", "s": 1.2}')
    assert main(["continue", "--config", str(p)]) == 2
    assert "s must lie in (0,1)" in capsys.readouterr().err
    p.write_text("{not json")
    assert main(["continue", "--config", str(p)]) == 2


def test_runtime_errors_exit_1(tmp_path, capsys):
    empty = tmp_path / "e.csv"
    empty.write_text("")
    assert main(["plot", "--kind", "diagram", "--in", str(empty), "--out", str(tmp_path / "e.svg")]) == 1
    cfg = {
        "model": "allen_cahn", "s": 0.5, "n_p": 41, "domain": [-5, 5],
        "continuation": {"mu_range": [0.0, 0.2]},
        "tasks": [{"kind": "trivial_branch", "name": "trivial", "mu_start": 0.05},
                  {"kind": "switch", "name": "far", "from": "trivial", "point": 4}],
        "output_dir": str(tmp_path / "run"),
    }
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg))
    assert main(["continue", "--config", str(p)]) == 1
    assert "far" in capsys.readouterr().err


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "fracpath.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "continue" in r.stdout
