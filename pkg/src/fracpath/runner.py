"""Execute a RunConfig: tasks in order, then branch tables, snapshots, manifest
and plots in the output directory.

Every file is first written as ``<name>.partial``. Only when all tasks succeed
are they renamed to their final names; after a failure the partial files stay
on disk next to a ``manifest.json.partial`` naming the failed task.
"""

from __future__ import annotations

import logging
import math
import os
import platform
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import __version__
from .branch_io import rows_from_branch, write_branch_csv, write_json, write_snapshot
from .config import RunConfig, TaskSpec
from .continuation import Branch, Event, continue_branch, switch_branch
from .errors import FracPathError, StepCollapse, TaskFailed
from .fractional_operator import build_fractional_matrix
from .mesh_fem import assemble_operators, build_mesh
from .models import ModelSpec, build_model, homogeneous_state
from .plotting import companion_paths, emit_plot

log = logging.getLogger(__name__)

PARTIAL = ".partial"


def build_problem(cfg: RunConfig) -> ModelSpec:
    femops = assemble_operators(build_mesh(cfg.a, cfg.b, cfg.n_p), cfg.bc[0])
    frac = build_fractional_matrix(femops, cfg.s, singular=cfg.singular)
    return build_model(cfg.model, femops, frac, cfg.params)


@dataclass
class RunResult:
    output_dir: Path
    branches: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    manifest: dict = field(default_factory=dict)


class _Writer:
    """Writes files under their partial names and remembers them."""

    def __init__(self, root: Path):
        self.root = root
        self.pending: list = []

    def target(self, name: str) -> Path:
        p = self.root / (name + PARTIAL)
        self.pending.append(p)
        return p

    def plot_target(self, name: str) -> Path:
        p = self.target(name)
        self.pending.append(companion_paths(p)[0])
        return p

    def commit(self) -> list:
        out = []
        for p in self.pending:
            final = p.with_name(p.name[: -len(PARTIAL)])
            if p.exists():
                os.replace(p, final)
                out.append(final)
        return out


def _run_task(model: ModelSpec, cfg: RunConfig, task: TaskSpec, done: dict) -> Branch:
    st = cfg.settings_for(task)
    if task.kind == "trivial_branch":
        start = (homogeneous_state(model, task.mu_start), task.mu_start)
        direction, parent = task.direction, None
    else:
        src = done[task.source]
        bps = src.branch_points
        if len(bps) < task.point:
            raise TaskFailed(task.name, f"branch '{task.source}' has {len(bps)} branch point(s), "
                                        f"point {task.point} was requested")
        bp = bps[task.point - 1]
        sw = switch_branch(model, bp, task.amplitude, st)
        start, direction, parent = (sw.u, sw.mu), sw.direction, (task.source, bp.index)
    try:
        branch = continue_branch(model, start, direction, st, name=task.name, parent=parent)
    except StepCollapse as exc:
        branch = getattr(exc, "branch", None)
        if branch is None or len(branch) < 2:
            raise
        log.warning("%s: %s; keeping %d records", task.name, exc, len(branch))
    if task.kind == "switch":
        # the child starts at the bifurcation point it emanates from; the event
        # itself stays on the parent so the child's branch points are its own
        head = replace(bp, event=Event.REGULAR, tangent=sw.direction, tangent_mu=float(sw.direction[-1]),
                       step_used=0.0)
        branch.records.insert(0, head)
        branch.reindex()
    return branch


def _snapshot_indices(branch: Branch, mode: str) -> list:
    if mode == "none":
        return []
    if mode == "all":
        return list(range(len(branch)))
    recs = branch.records
    keep = {0, len(recs) - 1} | {i for i, r in enumerate(recs) if r.event is not Event.REGULAR}
    return sorted(keep)


def _branch_summary(branch: Branch) -> dict:
    return {
        "name": branch.name,
        "file": f"{branch.name}.csv",
        "records": len(branch),
        "termination": branch.termination,
        "parent": list(branch.parent) if branch.parent else None,
        "branch_points": [r.mu for r in branch.branch_points],
        "folds": [r.mu for r in branch.folds],
        "fold_pairs": branch.fold_pairs(),
        "snake_width": branch.snake_width(),
        "hopf": [r.mu for r in branch.events(Event.HOPF)],
        "low_confidence_events": sum(1 for r in branch.records if r.low_confidence),
    }


def run(cfg: RunConfig, *, seed: int | None = None, threads: int | None = None) -> RunResult:
    """Run every task of ``cfg`` in order; raises TaskFailed naming the first
    failing task (partial outputs are kept)."""
    t0 = time.perf_counter()
    out = cfg.resolved_output_dir()
    out.mkdir(parents=True, exist_ok=True)
    w = _Writer(out)
    res = RunResult(out)
    manifest = {
        "fracpath_version": __version__,
        "config_hash": cfg.config_hash(),
        "model": cfg.model.value,
        "params": {k: getattr(cfg.params, k) for k in ("gamma", "nu", "d", "sigma")},
        "s": cfg.s,
        "n_p": cfg.n_p,
        "domain": [cfg.a, cfg.b],
        "domain_length_over_pi": cfg.length / math.pi,
        "schnak_tuned": cfg.tuned_m,
        "bc": [b.value for b in cfg.bc],
        "seed": cfg.seed if seed is None else int(seed),
        "threads": threads,
        "python": platform.python_version(),
        "branches": [],
    }
    res.manifest = manifest
    current = None
    try:
        current = "setup"
        model = build_problem(cfg)
        x = model.mesh.nodes
        for task in cfg.tasks:
            current = task.name
            tt = time.perf_counter()
            log.info("task %s (%s) started", task.name, task.kind)
            branch = _run_task(model, cfg, task, res.branches)
            res.branches[task.name] = branch
            write_branch_csv(w.target(f"{task.name}.csv"), rows_from_branch(branch))
            for i in _snapshot_indices(branch, cfg.snapshots):
                r = branch.records[i]
                comps = [model.component(r.u, c) for c in range(model.n_components)]
                write_snapshot(w.target(f"{task.name}_{r.index:04d}.csv"), x, comps)
            manifest["branches"].append(_branch_summary(branch))
            log.info("task %s finished: %d records, %s, %.1fs", task.name, len(branch),
                     branch.termination, time.perf_counter() - tt)
        current = "plot"
        if cfg.plot.get("diagram", True):
            names = list(res.branches)
            rows = [rows_from_branch(res.branches[n]) for n in names]
            emit_plot(rows, "diagram", w.plot_target("diagram.svg"), norm=cfg.plot.get("norm", "norm2"), labels=names)
        if cfg.plot.get("profiles", False) and cfg.snapshots != "none":
            for name, br in res.branches.items():
                idx = [i for i in _snapshot_indices(br, cfg.snapshots) if br.records[i].event is not Event.REGULAR]
                idx = idx or [len(br) - 1]
                files = [out / f"{name}_{br.records[i].index:04d}.csv{PARTIAL}" for i in idx]
                labels = [f"{name} #{br.records[i].index} mu={br.records[i].mu:.4g}" for i in idx]
                emit_plot(files, "profile", w.plot_target(f"{name}_profiles.svg"), labels=labels)
    except FracPathError as exc:
        manifest["failed_task"] = current
        manifest["error"] = str(exc)
        manifest["wall_time"] = time.perf_counter() - t0
        write_json(out / f"manifest.json{PARTIAL}", manifest)
        if isinstance(exc, TaskFailed):
            raise
        raise TaskFailed(current, str(exc)) from exc
    manifest["wall_time"] = time.perf_counter() - t0
    write_json(w.target("manifest.json"), manifest)
    res.files = w.commit()
    return res
