"""Bifurcation diagrams and solution profiles as SVG plus a gnuplot script.

Stable stretches (n_unstable = 0) are drawn thick, unstable ones thin. Branch
points are circles, folds crosses, Hopf points diamonds.
"""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .branch_io import BranchRow, fmt, read_branch_csv, read_snapshot
from .errors import EmptyBranch, InvalidParameter

WIDTH, HEIGHT = 720, 480
MARGIN = dict(left=70, right=150, top=30, bottom=55)
PALETTE = ("#000000", "#1f5fbf", "#c0392b", "#2e8b57", "#8e44ad", "#d68910", "#17a2b8", "#7f8c8d")
THICK, THIN = 2.6, 0.9
MARKERS = {"BranchPoint": "circle", "Fold": "cross", "Hopf": "diamond"}
PARTIAL = ".partial"


def companion_paths(out: Path) -> tuple:
    """(gnuplot script path, SVG name the script renders to) for an output path.

    A trailing ``.partial`` is kept last so staged outputs rename cleanly.
    """
    tail = PARTIAL if out.name.endswith(PARTIAL) else ""
    base = Path(out.name[: len(out.name) - len(tail)])
    return out.with_name(base.with_suffix(".gp").name + tail), base.stem + ".gnuplot.svg"


def nice_ticks(lo: float, hi: float, n: int = 6) -> list:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return []
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step - 1e-9) * step
    ticks, t = [], start
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _label(v: float) -> str:
    return f"{v:.6g}"


class _Canvas:
    def __init__(self, xlim, ylim, xlabel, ylabel, title=""):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        self.parts = []
        self.legend_parts = []
        self.pw = WIDTH - MARGIN["left"] - MARGIN["right"]
        self.ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
        self.xlabel, self.ylabel, self.title = xlabel, ylabel, title

    def X(self, x):
        return MARGIN["left"] + (x - self.x0) / (self.x1 - self.x0) * self.pw

    def Y(self, y):
        return MARGIN["top"] + (1.0 - (y - self.y0) / (self.y1 - self.y0)) * self.ph

    def polyline(self, xs, ys, color, width, dash=None):
        pts = " ".join(f"{self.X(x):.2f},{self.Y(y):.2f}" for x, y in zip(xs, ys))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="{width}" stroke-linejoin="round"{extra} points="{pts}"/>'
        )

    def marker(self, kind, x, y, color):
        px, py, r = self.X(x), self.Y(y), 4.5
        if kind == "circle":
            self.parts.append(f'<circle class="bp" cx="{px:.2f}" cy="{py:.2f}" r="{r}" fill="none" stroke="{color}" stroke-width="1.4"/>')
        elif kind == "cross":
            self.parts.append(
                f'<path class="fold" d="M{px - r:.2f},{py - r:.2f}L{px + r:.2f},{py + r:.2f}M{px - r:.2f},{py + r:.2f}L{px + r:.2f},{py - r:.2f}" stroke="{color}" stroke-width="1.4"/>'
            )
        else:
            self.parts.append(
                f'<path class="hopf" d="M{px:.2f},{py - r:.2f}L{px + r:.2f},{py:.2f}L{px:.2f},{py + r:.2f}L{px - r:.2f},{py:.2f}Z" fill="none" stroke="{color}" stroke-width="1.4"/>'
            )

    def legend(self, i, text, color):
        x = WIDTH - MARGIN["right"] + 15
        y = MARGIN["top"] + 18 * i + 10
        self.legend_parts.append(f'<line x1="{x}" y1="{y}" x2="{x + 22}" y2="{y}" stroke="{color}" stroke-width="{THICK}"/>')
        self.legend_parts.append(f'<text x="{x + 28}" y="{y + 4}" font-size="12">{escape(text)}</text>')

    def render(self) -> str:
        left, top = MARGIN["left"], MARGIN["top"]
        axes = [f'<rect x="{left}" y="{top}" width="{self.pw}" height="{self.ph}" fill="none" stroke="#333" stroke-width="1"/>']
        for t in nice_ticks(self.x0, self.x1):
            px = self.X(t)
            axes.append(f'<line x1="{px:.2f}" y1="{top + self.ph}" x2="{px:.2f}" y2="{top + self.ph + 5}" stroke="#333"/>')
            axes.append(f'<text x="{px:.2f}" y="{top + self.ph + 19}" font-size="11" text-anchor="middle">{_label(t)}</text>')
        for t in nice_ticks(self.y0, self.y1):
            py = self.Y(t)
            axes.append(f'<line x1="{left - 5}" y1="{py:.2f}" x2="{left}" y2="{py:.2f}" stroke="#333"/>')
            axes.append(f'<text x="{left - 8}" y="{py + 4:.2f}" font-size="11" text-anchor="end">{_label(t)}</text>')
        axes.append(f'<text x="{left + self.pw / 2}" y="{HEIGHT - 12}" font-size="13" text-anchor="middle">{escape(self.xlabel)}</text>')
        axes.append(
            f'<text x="16" y="{top + self.ph / 2}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {top + self.ph / 2})">{escape(self.ylabel)}</text>'
        )
        if self.title:
            axes.append(f'<text x="{left + self.pw / 2}" y="18" font-size="13" text-anchor="middle">{escape(self.title)}</text>')
        clip = f'<clipPath id="plot"><rect x="{left}" y="{top}" width="{self.pw}" height="{self.ph}"/></clipPath>'
        body = "\n".join(self.parts)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">\n'
            f'<defs>{clip}</defs>\n<rect width="100%" height="100%" fill="white"/>\n'
            + "\n".join(axes + self.legend_parts)
            + f'\n<g clip-path="url(#plot)">\n{body}\n</g>\n</svg>\n'
        )


def _limits(values, pad=0.05):
    lo, hi = float(np.min(values)), float(np.max(values))
    span = hi - lo if hi > lo else max(abs(hi), 1.0)
    return lo - pad * span, hi + pad * span


def stability_runs(rows) -> list:
    """Split a branch into maximal runs of equal stability; neighbouring runs
    share their boundary point so the drawn curve stays connected."""
    runs, start = [], 0
    for i in range(1, len(rows) + 1):
        if i == len(rows) or (rows[i].n_unstable == 0) != (rows[start].n_unstable == 0):
            runs.append((rows[start].n_unstable == 0, rows[start:min(i + 1, len(rows))]))
            start = i
    return runs


def _diagram(branches, norm, out: Path, labels):
    allmu = np.concatenate([[r.mu for r in rows] for rows in branches])
    alln = np.concatenate([[getattr(r, norm) for r in rows] for rows in branches])
    ylabel = "||u||_{L^2}" if norm == "norm2" else "||u_1||_{L^8}"
    cv = _Canvas(_limits(allmu), _limits(alln), "mu", ylabel.replace("_{L^2}", " (L2)").replace("_{L^8}", " (L8)"))
    gp = [f"set terminal svg size {WIDTH},{HEIGHT}", f"set output '{companion_paths(out)[1]}'",
          "set xlabel 'mu'", f"set ylabel '{ylabel}'", "set key outside right", "unset colorbox"]
    plots = []
    for b, rows in enumerate(branches):
        color = PALETTE[b % len(PALETTE)]
        cv.legend(b, labels[b], color)
        for k, (stable, run) in enumerate(stability_runs(rows)):
            cv.polyline([r.mu for r in run], [getattr(r, norm) for r in run], color, THICK if stable else THIN)
            block = f"$b{b}r{k}"
            gp.append(f"{block} << EOD")
            gp += [f"{fmt(r.mu)} {fmt(getattr(r, norm))}" for r in run]
            gp.append("EOD")
            title = f"title '{labels[b]}'" if k == 0 else "notitle"
            plots.append(f"{block} using 1:2 with lines lw {THICK if stable else THIN} lc rgb '{color}' {title}")
        ev = [r for r in rows if r.event in MARKERS]
        for r in ev:
            cv.marker(MARKERS[r.event], r.mu, getattr(r, norm), color)
        for event, pt in (("BranchPoint", 6), ("Fold", 2), ("Hopf", 12)):
            pts = [r for r in ev if r.event == event]
            if pts:
                block = f"$b{b}{event}"
                gp.append(f"{block} << EOD")
                gp += [f"{fmt(r.mu)} {fmt(getattr(r, norm))}" for r in pts]
                gp.append("EOD")
                plots.append(f"{block} using 1:2 with points pt {pt} ps 1.2 lc rgb '{color}' notitle")
    gp.append("plot " + ", \\\n     ".join(plots))
    return cv.render(), "\n".join(gp) + "\n"


def _profile(snaps, out: Path, labels):
    xs = np.concatenate([x for x, _ in snaps])
    us = np.concatenate([np.concatenate(c) for _, c in snaps])
    cv = _Canvas(_limits(xs, 0.0), _limits(us), "x", "u")
    gp = [f"set terminal svg size {WIDTH},{HEIGHT}", f"set output '{companion_paths(out)[1]}'",
          "set xlabel 'x'", "set ylabel 'u'", "set key outside right"]
    plots = []
    for i, (x, comps) in enumerate(snaps):
        color = PALETTE[(i + 1) % len(PALETTE)]
        cv.legend(i, labels[i], color)
        for j, u in enumerate(comps):
            cv.polyline(x, u, color, 1.8, dash=None if j == 0 else "6,4")
            block = f"$p{i}c{j}"
            gp.append(f"{block} << EOD")
            gp += [f"{fmt(a)} {fmt(b)}" for a, b in zip(x, u)]
            gp.append("EOD")
            dt = "" if j == 0 else " dt 2"
            plots.append(f"{block} using 1:2 with lines lw 1.8{dt} lc rgb '{color}' title '{labels[i]} u{j + 1}'")
    gp.append("plot " + ", \\\n     ".join(plots))
    return cv.render(), "\n".join(gp) + "\n"


def emit_plot(inputs, kind: str, out, *, norm: str = "norm2", labels=None) -> Path:
    """Write ``out`` (SVG) and a gnuplot script beside it (suffix ``.gp``).

    ``inputs`` are branch CSV paths (or lists of BranchRow) for
    ``kind="diagram"`` and snapshot CSV paths for ``kind="profile"``.
    """
    out = Path(out)
    if isinstance(inputs, (str, Path)):
        inputs = [inputs]
    inputs = list(inputs)
    if not inputs:
        raise EmptyBranch("nothing to plot")
    labels = list(labels) if labels else [Path(p).stem if isinstance(p, (str, Path)) else f"branch {i}" for i, p in enumerate(inputs)]
    if kind == "diagram":
        if norm not in ("norm2", "norm8"):
            raise InvalidParameter(f"norm must be 'norm2' or 'norm8', got {norm!r}")
        branches = [read_branch_csv(p) if isinstance(p, (str, Path)) else list(p) for p in inputs]
        for p, rows in zip(inputs, branches):
            if not rows or not all(isinstance(r, BranchRow) for r in rows):
                raise EmptyBranch(f"{p}: branch has no records")
        svg, gp = _diagram(branches, norm, out, labels)
    elif kind == "profile":
        snaps = [read_snapshot(p) for p in inputs]
        svg, gp = _profile(snaps, out, labels)
    else:
        raise InvalidParameter(f"plot kind must be 'diagram' or 'profile', got {kind!r}")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(svg)
    companion_paths(out)[0].write_text(gp)
    return out
