"""Run configuration: strict JSON parsing, validation and canonical hashing."""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .continuation import ALL_DETECT, ContinuationSettings
from .errors import ParseError, ValidationError
from .mesh_fem import BoundaryCondition
from .models import ModelName, ModelParams, schnak_tuned_domain

OUT_ENV = "FRACPATH_OUT"

_MODEL_BC = {
    ModelName.ALLEN_CAHN: (BoundaryCondition.DIRICHLET,),
    ModelName.SWIFT_HOHENBERG: (BoundaryCondition.DIRICHLET, BoundaryCondition.DIRICHLET),
    ModelName.SCHNAKENBERG: (BoundaryCondition.NEUMANN, BoundaryCondition.NEUMANN),
}
_PARAM_KEYS = {
    ModelName.ALLEN_CAHN: {"gamma"},
    ModelName.SWIFT_HOHENBERG: {"nu"},
    ModelName.SCHNAKENBERG: {"d", "sigma"},
}
_CONT_KEYS = {f.name for f in fields(ContinuationSettings)}
_TOP_KEYS = {"model", "params", "s", "domain", "n_p", "bc", "continuation", "tasks", "output_dir",
             "plot", "snapshots", "seed", "singular"}
_TASK_KEYS = {
    "trivial_branch": {"kind", "name", "mu_start", "direction", "continuation"},
    "switch": {"kind", "name", "from", "point", "amplitude", "continuation"},
}
_PLOT_KEYS = {"diagram", "profiles", "norm"}


@dataclass(frozen=True)
class TaskSpec:
    kind: str
    name: str
    continuation: dict = field(default_factory=dict)
    mu_start: float | None = None
    direction: int = 1
    source: str | None = None
    point: int = 1
    amplitude: float = 0.1


@dataclass(frozen=True)
class RunConfig:
    model: ModelName
    params: ModelParams
    a: float
    b: float
    n_p: int
    bc: tuple
    continuation: ContinuationSettings
    tasks: tuple
    output_dir: str
    tuned_m: int | None = None
    plot: dict = field(default_factory=lambda: {"diagram": True, "profiles": False, "norm": "norm2"})
    snapshots: str = "events"
    seed: int = 0
    singular: str = "kernel"

    @property
    def s(self) -> float:
        return self.params.s

    @property
    def length(self) -> float:
        return self.b - self.a

    def settings_for(self, task: TaskSpec) -> ContinuationSettings:
        return self.continuation.with_(**_cont_kwargs(task.continuation))

    def resolved_output_dir(self) -> Path:
        return Path(os.environ.get(OUT_ENV) or self.output_dir)

    def canonical(self) -> dict:
        """Every field that can change computed results, with defaults filled."""
        cont = asdict(self.continuation)
        cont["mu_range"] = [_num(v) for v in cont["mu_range"]]
        cont["detect"] = sorted(cont["detect"])
        return {
            "model": self.model.value,
            "params": asdict(self.params),
            "domain": [self.a, self.b],
            "n_p": self.n_p,
            "bc": [b.value for b in self.bc],
            "continuation": cont,
            "tasks": [
                {**asdict(t), "continuation": {k: _canon_value(v) for k, v in sorted(t.continuation.items())}}
                for t in self.tasks
            ],
            "snapshots": self.snapshots,
            "singular": self.singular,
        }

    def config_hash(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def _num(v):
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")


def _canon_value(v):
    if isinstance(v, (list, tuple)):
        return [_num(float(x)) if isinstance(x, (int, float)) else x for x in v]
    return v


def _cont_kwargs(d: dict) -> dict:
    out = dict(d)
    if "mu_range" in out:
        out["mu_range"] = tuple(float(x) for x in out["mu_range"])
    if "detect" in out:
        out["detect"] = tuple(out["detect"])
    return out


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _check_cont(d, where: str, problems: list):
    if not isinstance(d, dict):
        problems.append(f"{where}: must be an object")
        return
    for k in sorted(set(d) - _CONT_KEYS):
        problems.append(f"{where}: unknown key '{k}'")
    for k, v in d.items():
        if k == "mu_range":
            if not (isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)):
                problems.append(f"{where}.mu_range: must be a list of two numbers")
        elif k == "detect":
            if not (isinstance(v, list) and set(v) <= set(ALL_DETECT)):
                problems.append(f"{where}.detect: must be a subset of {list(ALL_DETECT)}")
        elif k in ("newton_max_iter", "max_steps", "bisection_max", "stop_after_branch_points"):
            if not _is_int(v):
                problems.append(f"{where}.{k}: must be an integer")
        elif k in _CONT_KEYS and not _is_num(v):
            problems.append(f"{where}.{k}: must be a finite number")


def _load_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top level must be a JSON object")
    return data


def parse_config(path) -> RunConfig:
    return config_from_dict(_load_json(path))


def config_from_dict(data: dict) -> RunConfig:
    """Validate a raw mapping; every violation is collected before raising."""
    problems: list = []
    for k in sorted(set(data) - _TOP_KEYS):
        problems.append(f"unknown key '{k}'")

    model = None
    try:
        model = ModelName(data.get("model"))
    except ValueError:
        problems.append(f"model: must be one of {[m.value for m in ModelName]}")

    s = data.get("s")
    if not _is_num(s) or not (0.0 < s < 1.0):
        problems.append("s must lie in (0,1)")
        s = 0.5

    n_p = data.get("n_p")
    if not _is_int(n_p) or n_p < 3:
        problems.append("n_p: must be an integer >= 3")
        n_p = 3

    raw_params = data.get("params", {})
    params = {}
    if not isinstance(raw_params, dict):
        problems.append("params: must be an object")
    else:
        allowed = _PARAM_KEYS.get(model, {"gamma", "nu", "d", "sigma"})
        for k, v in raw_params.items():
            if k not in allowed:
                problems.append(f"params: unknown key '{k}'" + (f" for model {model.value}" if model else ""))
            elif not _is_num(v):
                problems.append(f"params.{k}: must be a finite number")
            else:
                params[k] = float(v)
    if params.get("nu", 1.0) <= 0:
        problems.append("params.nu: must be positive")
    if params.get("d", 2.0) <= 1:
        problems.append("params.d: must exceed 1")

    a = b = None
    tuned_m = None
    dom = data.get("domain")
    if isinstance(dom, list) and len(dom) == 2 and all(_is_num(v) for v in dom):
        a, b = float(dom[0]), float(dom[1])
        if not b > a:
            problems.append("domain: need a < b")
    elif isinstance(dom, dict) and set(dom) == {"schnak_tuned"}:
        tuned_m = dom["schnak_tuned"]
        if not _is_int(tuned_m) or tuned_m < 1:
            problems.append("domain.schnak_tuned: must be a positive integer")
        elif model is not None and model is not ModelName.SCHNAKENBERG:
            problems.append("domain.schnak_tuned: only valid for the schnakenberg model")
        elif 0.0 < s < 1.0:
            a, b = schnak_tuned_domain(tuned_m, s)
    else:
        problems.append("domain: must be [a, b] or {\"schnak_tuned\": m}")

    bc = None
    if model is not None:
        bc = _MODEL_BC[model]
        if "bc" in data:
            raw = data["bc"]
            try:
                given = tuple(BoundaryCondition.parse(v) for v in raw) if isinstance(raw, list) else None
            except ValueError:
                given = None
            if given != bc:
                problems.append(f"bc: model {model.value} requires {[x.value for x in bc]}")

    cont = data.get("continuation", {})
    _check_cont(cont, "continuation", problems)
    settings = None
    if isinstance(cont, dict) and not any(p.startswith("continuation") for p in problems):
        try:
            settings = ContinuationSettings(**_cont_kwargs(cont))
        except (ValueError, TypeError) as exc:
            problems.append(f"continuation: {exc}")

    tasks = []
    names = set()
    raw_tasks = data.get("tasks")
    if not isinstance(raw_tasks, list) or not raw_tasks:
        problems.append("tasks: must be a non-empty list")
        raw_tasks = []
    for i, t in enumerate(raw_tasks):
        where = f"tasks[{i}]"
        if not isinstance(t, dict):
            problems.append(f"{where}: must be an object")
            continue
        kind = t.get("kind")
        if kind not in _TASK_KEYS:
            problems.append(f"{where}.kind: must be one of {sorted(_TASK_KEYS)}")
            continue
        for k in sorted(set(t) - _TASK_KEYS[kind]):
            problems.append(f"{where}: unknown key '{k}'")
        name = t.get("name", f"branch{i}")
        if not isinstance(name, str) or not name or any(c in name for c in "/\\ ") or name in names:
            problems.append(f"{where}.name: must be a unique non-empty identifier")
        names.add(name)
        tc = t.get("continuation", {})
        _check_cont(tc, f"{where}.continuation", problems)
        if settings is not None and isinstance(tc, dict) and not any(p.startswith(f"{where}.continuation") for p in problems):
            try:
                settings.with_(**_cont_kwargs(tc))
            except (ValueError, TypeError) as exc:
                problems.append(f"{where}.continuation: {exc}")
        if kind == "trivial_branch":
            mu0 = t.get("mu_start")
            if not _is_num(mu0):
                problems.append(f"{where}.mu_start: must be a finite number")
            direction = t.get("direction", 1)
            if direction not in (1, -1) or isinstance(direction, bool):
                problems.append(f"{where}.direction: must be 1 or -1")
            tasks.append(TaskSpec(kind, name, dict(tc) if isinstance(tc, dict) else {},
                                  mu_start=float(mu0) if _is_num(mu0) else None, direction=direction))
        else:
            src = t.get("from")
            if src not in names or src == name:
                problems.append(f"{where}.from: must name an earlier task")
            point = t.get("point", 1)
            if not _is_int(point) or point < 1:
                problems.append(f"{where}.point: must be a positive integer (1 = first branch point)")
            amp = t.get("amplitude", 0.1)
            if not _is_num(amp) or amp == 0:
                problems.append(f"{where}.amplitude: must be a nonzero number")
            tasks.append(TaskSpec(kind, name, dict(tc) if isinstance(tc, dict) else {}, source=src,
                                  point=point if _is_int(point) else 1, amplitude=float(amp) if _is_num(amp) else 0.1))

    out_dir = data.get("output_dir", "fracpath_out")
    if not isinstance(out_dir, str) or not out_dir:
        problems.append("output_dir: must be a non-empty string")

    plot = {"diagram": True, "profiles": False, "norm": "norm2"}
    raw_plot = data.get("plot", {})
    if not isinstance(raw_plot, dict):
        problems.append("plot: must be an object")
    else:
        for k in sorted(set(raw_plot) - _PLOT_KEYS):
            problems.append(f"plot: unknown key '{k}'")
        for k in ("diagram", "profiles"):
            if k in raw_plot and not isinstance(raw_plot[k], bool):
                problems.append(f"plot.{k}: must be true or false")
        if raw_plot.get("norm", "norm2") not in ("norm2", "norm8"):
            problems.append("plot.norm: must be 'norm2' or 'norm8'")
        plot.update({k: v for k, v in raw_plot.items() if k in _PLOT_KEYS})

    snaps = data.get("snapshots", "events")
    if snaps not in ("events", "all", "none"):
        problems.append("snapshots: must be 'events', 'all' or 'none'")
    seed = data.get("seed", 0)
    if not _is_int(seed):
        problems.append("seed: must be an integer")
    singular = data.get("singular", "kernel")
    if singular not in ("kernel", "minnorm"):
        problems.append("singular: must be 'kernel' or 'minnorm'")

    mp = None
    if not problems:
        try:
            mp = ModelParams(s=float(s), **params)
        except (ValueError, TypeError) as exc:
            problems.append(f"params: {exc}")
    if problems:
        raise ValidationError(problems)
    return RunConfig(model, mp, a, b, int(n_p), bc, settings, tuple(tasks), out_dir, tuned_m, plot, snaps, seed, singular)
