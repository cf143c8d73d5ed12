import re
import xml.etree.ElementTree as ET

import pytest

from fracpath.branch_io import BranchRow, write_branch_csv, write_snapshot
from fracpath.errors import EmptyBranch, InvalidParameter
from fracpath.plotting import MARKERS, THICK, THIN, emit_plot, nice_ticks, stability_runs

SVG = "{http://www.w3.org/2000/svg}"


def row(i, mu, n2, nu=0, ev="Regular"):
    return BranchRow(i, mu, n2, n2, nu, ev, 1.0, 0.01)


def polylines(path):
    root = ET.parse(path).getroot()
    return [e for e in root.iter(SVG + "polyline")]


def test_single_two_record_branch(tmp_path):
    p = write_branch_csv(tmp_path / "b.csv", [row(0, 0.0, 0.0), row(1, 0.1, 0.2)])
    out = emit_plot([p], "diagram", tmp_path / "d.svg")
    assert len(polylines(out)) == 1
    gp = tmp_path / "d.gp"
    text = gp.read_text()
    assert "set terminal svg" in text and "<< EOD" in text and text.rstrip().splitlines()[-1].startswith("plot ")


def test_stability_encoding_and_markers(tmp_path):
    rows = [row(0, 0.0, 0.0), row(1, 0.1, 0.0, 0, "BranchPoint"), row(2, 0.2, 0.0, 1),
            row(3, 0.3, 0.0, 1, "Fold"), row(4, 0.4, 0.0, 1, "Hopf"), row(5, 0.5, 0.0, 3)]
    runs = stability_runs(rows)
    assert [stable for stable, _ in runs] == [True, False]
    # the segment boundaries share a point so the curve is continuous
    assert runs[0][1][-1] == runs[1][1][0]
    out = emit_plot([rows], "diagram", tmp_path / "d.svg")
    widths = sorted(float(e.get("stroke-width")) for e in polylines(out))
    assert widths == [THIN, THICK]
    svg = out.read_text()
    assert svg.count('<circle class="bp"') == 1
    assert svg.count('class="fold"') == 1
    assert svg.count('class="hopf"') == 1
    assert set(MARKERS.values()) == {"circle", "cross", "diamond"}


def test_per_branch_colors(tmp_path):
    a = [row(0, 0, 0), row(1, 1, 1)]
    b = [row(0, 0, 1), row(1, 1, 2)]
    out = emit_plot([a, b], "diagram", tmp_path / "d.svg", labels=["a", "b"])
    colors = {e.get("stroke") for e in polylines(out)}
    assert len(colors) == 2


def test_profile(tmp_path):
    import numpy as np

    x = np.linspace(0, 1, 11)
    p = write_snapshot(tmp_path / "s.csv", x, [x**2, x])
    out = emit_plot([p], "profile", tmp_path / "p.svg")
    lines = polylines(out)
    assert len(lines) == 2
    assert lines[0].get("stroke-dasharray") is None and lines[1].get("stroke-dasharray")


def test_errors(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text("")
    with pytest.raises(EmptyBranch):
        emit_plot([p], "diagram", tmp_path / "d.svg")
    with pytest.raises(EmptyBranch):
        emit_plot([[]], "diagram", tmp_path / "d.svg")
    with pytest.raises(InvalidParameter):
        emit_plot([[row(0, 0, 0)]], "surface", tmp_path / "d.svg")
    with pytest.raises(InvalidParameter):
        emit_plot([[row(0, 0, 0)]], "diagram", tmp_path / "d.svg", norm="norm3")


def test_partial_names_keep_suffix_last(tmp_path):
    out = emit_plot([[row(0, 0, 0), row(1, 1, 1)]], "diagram", tmp_path / "d.svg.partial")
    assert out.name == "d.svg.partial"
    assert (tmp_path / "d.gp.partial").exists()


def test_nice_ticks():
    t = nice_ticks(0.0, 1.0)
    assert t[0] >= 0 and t[-1] <= 1 and len(t) >= 3
    steps = {round(b - a, 12) for a, b in zip(t, t[1:])}
    assert len(steps) == 1
    assert nice_ticks(2.0, 2.0)
