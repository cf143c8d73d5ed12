"""Command line entry point ``fracpath``.

Exit codes: 0 success, 1 runtime failure, 2 usage error (bad arguments,
invalid or unparsable config).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2
# global options may appear before or after the subcommand; filled in after parsing
_GLOBAL_DEFAULTS = {"seed": 0, "threads": None, "verbose": 0}
_BLAS_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMBA_NUM_THREADS")


def _order(text: str) -> float:
    try:
        s = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < s < 1.0:
        raise argparse.ArgumentTypeError(f"s must lie in (0,1), got {s:g}")
    return s


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {n}")
    return n


def _int_list(text: str) -> list:
    try:
        vals = [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="recorded in outputs; every algorithm is deterministic")
    common.add_argument("--threads", type=_positive_int, default=argparse.SUPPRESS,
                        help="cap on BLAS and numba threads")
    common.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS,
                        help="-v for progress, -vv for every continuation step")

    p = argparse.ArgumentParser(prog="fracpath", parents=[common],
                                description="Fractional Laplacian discretization and continuation of steady states.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    op = sub.add_parser("operator", parents=[common], help="eigenvalue convergence of the discrete fractional Laplacian")
    op.add_argument("--bc", required=True, choices=["dirichlet", "neumann"])
    op.add_argument("--s", required=True, type=_order)
    op.add_argument("--np-list", required=True, type=_int_list, help="e.g. 50,100,150,200,250")
    op.add_argument("--ne", required=True, type=_positive_int, help="number of eigenvalues compared")
    op.add_argument("--out", required=True, type=Path, help="CSV of n_p,h,err (a .json summary is written beside it)")

    po = sub.add_parser("poisson", parents=[common], help="fractional Poisson self-convergence benchmark")
    po.add_argument("--s", required=True, type=_order)
    po.add_argument("--np", type=_positive_int, default=250, help="finest test mesh (default 250)")
    po.add_argument("--out", required=True, type=Path, help="CSV of n_p,h,err (a .json summary is written beside it)")

    co = sub.add_parser("continue", parents=[common], help="run a continuation config")
    co.add_argument("--config", required=True, type=Path)

    pl = sub.add_parser("plot", parents=[common], help="bifurcation diagram or solution profiles")
    pl.add_argument("--kind", required=True, choices=["diagram", "profile"])
    pl.add_argument("--in", dest="inputs", required=True, nargs="+", type=Path)
    pl.add_argument("--out", required=True, type=Path)
    pl.add_argument("--norm", choices=["norm2", "norm8"], default="norm2")
    return p


def _setup(args) -> None:
    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.threads is not None:
        # only effective before numpy/numba load, which the subcommands do lazily
        for var in _BLAS_VARS:
            os.environ[var] = str(args.threads)
        from ._options import set_threads

        set_threads(args.threads)


def _write_report(out: Path, csv_text: str, summary: dict) -> None:
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(csv_text)
    out.with_suffix(".json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def _cmd_operator(args) -> int:
    from .fractional_operator import eigen_convergence_report

    rep = eigen_convergence_report(args.bc, args.s, args.np_list, args.ne)
    _write_report(args.out, rep.to_csv(), {**rep.summary(), "n_p": rep.n_p, "err": rep.err, "seed": args.seed})
    print(f"bc={args.bc} s={args.s:g} n_e={args.ne} slope={rep.slope:.4f}")
    for n, e in zip(rep.n_p, rep.err):
        print(f"  n_p={n:5d} err={e:.4e}")
    return EXIT_OK


def _cmd_poisson(args) -> int:
    from .validation import poisson_self_convergence

    rep = poisson_self_convergence(args.s, np_max=args.np)
    _write_report(args.out, rep.to_csv(), {**rep.summary(), "err": rep.err, "seed": args.seed})
    print(f"s={args.s:g} reference n_p={rep.n_ref} slope={rep.slope:.4f}")
    for n, e in zip(rep.n_p, rep.err):
        print(f"  n_p={n:5d} err={e:.4e}")
    return EXIT_OK


def _cmd_continue(args) -> int:
    from .config import parse_config
    from .runner import run

    cfg = parse_config(args.config)
    res = run(cfg, seed=args.seed, threads=args.threads)
    for b in res.manifest["branches"]:
        print(f"{b['name']}: {b['records']} records, {b['termination']}, "
              f"{len(b['branch_points'])} branch points, {len(b['folds'])} folds, {len(b['hopf'])} Hopf")
    print(f"outputs in {res.output_dir} ({res.manifest['wall_time']:.1f}s)")
    return EXIT_OK


def _cmd_plot(args) -> int:
    from .plotting import emit_plot

    out = emit_plot(args.inputs, args.kind, args.out, norm=args.norm)
    print(out)
    return EXIT_OK


_COMMANDS = {"operator": _cmd_operator, "poisson": _cmd_poisson, "continue": _cmd_continue, "plot": _cmd_plot}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    for key, value in _GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    _setup(args)
    from .errors import FracPathError, ParseError, ValidationError

    try:
        return _COMMANDS[args.command](args)
    except (ParseError, ValidationError) as exc:
        print(f"fracpath {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FracPathError as exc:
        print(f"fracpath {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"fracpath {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
