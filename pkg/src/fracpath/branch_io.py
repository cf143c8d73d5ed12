"""Branch tables (CSV), run manifests (JSON) and solution snapshots (CSV)."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyBranch, ParseError

BRANCH_COLUMNS = ("index", "mu", "norm2", "norm8", "n_unstable", "event", "tangent_mu", "step_used")
EVENTS = ("Regular", "Fold", "BranchPoint", "Hopf")


def fmt(x: float) -> str:
    """17 significant digits: enough for every float64 to round-trip exactly."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class BranchRow:
    index: int
    mu: float
    norm2: float
    norm8: float
    n_unstable: int
    event: str
    tangent_mu: float
    step_used: float


def rows_from_branch(branch) -> list:
    return [
        BranchRow(r.index, float(r.mu), float(r.norm2), float(r.norm8), int(r.n_unstable),
                  r.event.value, float(r.tangent_mu), float(r.step_used))
        for r in branch.records
    ]


def branch_csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BRANCH_COLUMNS)
    for r in rows:
        w.writerow([r.index, fmt(r.mu), fmt(r.norm2), fmt(r.norm8), r.n_unstable, r.event,
                    fmt(r.tangent_mu), fmt(r.step_used)])
    return buf.getvalue()


def write_branch_csv(path, rows) -> Path:
    path = Path(path)
    path.write_text(branch_csv_text(rows))
    return path


def read_branch_csv(path) -> list:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from exc
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyBranch(f"{path}: empty file") from None
    if tuple(header) != BRANCH_COLUMNS:
        raise ParseError(f"{path}:1: expected header {','.join(BRANCH_COLUMNS)}")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != len(BRANCH_COLUMNS):
            raise ParseError(f"{path}:{lineno}: expected {len(BRANCH_COLUMNS)} fields, got {len(rec)}")
        try:
            row = BranchRow(int(rec[0]), float(rec[1]), float(rec[2]), float(rec[3]), int(rec[4]), rec[5],
                            float(rec[6]), float(rec[7]))
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
        if row.event not in EVENTS:
            raise ParseError(f"{path}:{lineno}: unknown event '{row.event}'")
        rows.append(row)
    return rows


def write_snapshot(path, x: np.ndarray, components) -> Path:
    path = Path(path)
    names = ["x"] + [f"u{i + 1}" for i in range(len(components))]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for i in range(len(x)):
        w.writerow([fmt(x[i])] + [fmt(c[i]) for c in components])
    path.write_text(buf.getvalue())
    return path


def read_snapshot(path):
    """Returns (x, [u1, u2, ...])."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise EmptyBranch(f"{path}: empty file")
    header = lines[0].split(",")
    if header[0] != "x" or len(header) < 2:
        raise ParseError(f"{path}:1: expected header x,u1[,u2]")
    try:
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]], dtype=float)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if data.size == 0:
        raise EmptyBranch(f"{path}: no data rows")
    return data[:, 0], [data[:, j] for j in range(1, data.shape[1])]


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path
