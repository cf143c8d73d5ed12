"""Configuration, execution and file formats of fracpath runs in one place."""

from .branch_io import (
    BRANCH_COLUMNS,
    BranchRow,
    read_branch_csv,
    read_snapshot,
    rows_from_branch,
    write_branch_csv,
    write_json,
    write_snapshot,
)
from .config import OUT_ENV, RunConfig, TaskSpec, config_from_dict, parse_config
from .plotting import emit_plot
from .runner import RunResult, build_problem, run

__all__ = [
    "BRANCH_COLUMNS",
    "BranchRow",
    "OUT_ENV",
    "RunConfig",
    "RunResult",
    "TaskSpec",
    "build_problem",
    "config_from_dict",
    "emit_plot",
    "parse_config",
    "read_branch_csv",
    "read_snapshot",
    "rows_from_branch",
    "run",
    "write_branch_csv",
    "write_json",
    "write_snapshot",
]
