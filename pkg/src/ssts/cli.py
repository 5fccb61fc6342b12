"""``bench`` command line.

Subcommands: ``table``, ``analyze``, ``verify``, ``gmres``, ``generate``.
Set ``SSTS_NUM_THREADS`` to cap BLAS/LAPACK threads.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import bench
from .problems import save_system

log = logging.getLogger("ssts")


def _example(value: str):
    return "identity" if value == "identity" else int(value)


def _grids(value: str) -> list[int]:
    return [int(v) for v in value.split(",") if v]


def _methods(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_table(args) -> int:
    plan = bench.ExperimentPlan(
        example=args.example, grids=args.grids, methods=args.methods, params=args.params,
        tol=args.tol, max_iters=args.max_iters, fmt=args.format, restart=args.restart,
        gmres_form=args.form, eig_mode=args.eig_mode,
    )
    cells = bench.run_table(plan, jobs=args.jobs)
    _write(bench.format_table(cells, plan.fmt), args.out)
    if args.out:
        cell_dir = Path(args.out).with_suffix("")
        cell_dir = cell_dir.parent / f"{cell_dir.name}_cells"
        cell_dir.mkdir(parents=True, exist_ok=True)
        for c in cells:
            (cell_dir / f"{c.method}_m{c.m}.json").write_text(c.to_json())
    failed = [c for c in cells if not c.converged]
    for c in failed:
        log.warning("%s m=%d did not converge: %s", c.method, c.m, c.error or c.label)
    return 0 if not failed else 1


def cmd_analyze(args) -> int:
    est = bench.compute_params(args.example, args.m, args.eig_mode)
    _write(bench.estimates_json(est, args.example, args.m), args.out)
    return 0


def cmd_verify(args) -> int:
    ok, results = bench.verify(args.example, args.m)
    for r in results:
        status = "PASS" if r["passed"] else "FAIL"
        print(f"{status}  {r['name']}")
    print("verify:", "passed" if ok else "FAILED")
    return 0 if ok else 1


def cmd_gmres(args) -> int:
    if args.precond == "none":
        params = "table1-opt"
    elif args.params in ("opt", "exp"):
        params = f"table1-{args.params}"
    elif args.params == "computed":
        params = "computed"
    else:
        a, _, w = args.params.partition(",")
        params = f"a={a},w={w}"
    plan = bench.ExperimentPlan(
        example=args.example, grids=[args.m],
        methods=["gmres" if args.precond == "none" else "ssts-gmres"],
        params=params, tol=args.tol, restart=args.restart, fmt=args.format,
        gmres_form=args.form,
    )
    cells = bench.run_table(plan)
    _write(bench.format_table(cells, plan.fmt), args.out)
    return 0 if all(c.converged for c in cells) else 1


def cmd_generate(args) -> int:
    paths = save_system(bench.make_system(args.example, args.m), args.out)
    for p in paths:
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bench", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("table", help="run a (method x grid) experiment table")
    t.add_argument("--example", type=_example, required=True)
    t.add_argument("--grids", type=_grids, default=[16, 32, 64, 128, 256])
    t.add_argument("--methods", type=_methods, default=["mhss", "sbts", "psbts", "ssts"])
    t.add_argument("--params", default="table1-opt",
                   help="table1-opt | table1-exp | computed | a=<alpha>,w=<omega>")
    t.add_argument("--tol", type=float, default=1e-6)
    t.add_argument("--max-iters", type=int, default=5000)
    t.add_argument("--restart", type=int, default=10)
    t.add_argument("--form", choices=("complex", "real"), default="complex",
                   help="form of the original system for unpreconditioned GMRES")
    t.add_argument("--eig-mode", choices=("auto", "dense", "lanczos"), default="auto")
    t.add_argument("--format", choices=("md", "csv", "json"), default="md")
    t.add_argument("--jobs", type=int, default=1)
    t.add_argument("--out")
    t.set_defaults(func=cmd_table)

    a = sub.add_parser("analyze", help="optimal SSTS parameters as JSON")
    a.add_argument("--example", type=_example, required=True)
    a.add_argument("--m", type=int, required=True)
    a.add_argument("--eig-mode", choices=("auto", "dense", "lanczos"), default="auto")
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="dense spectral checks (m <= 16)")
    v.add_argument("--example", type=_example, required=True)
    v.add_argument("--m", type=int, required=True)
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("gmres", help="single GMRES(restart) run")
    g.add_argument("--example", type=_example, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--restart", type=int, default=10)
    g.add_argument("--precond", choices=("none", "ssts"), default="none")
    g.add_argument("--params", default="opt", help="opt | exp | computed | <alpha>,<omega>")
    g.add_argument("--tol", type=float, default=1e-6)
    g.add_argument("--form", choices=("complex", "real"), default="complex")
    g.add_argument("--format", choices=("md", "csv", "json"), default="md")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gmres)

    e = sub.add_parser("generate", help="export a system to Matrix Market + JSON sidecar")
    e.add_argument("--example", type=_example, required=True)
    e.add_argument("--m", type=int, required=True)
    e.add_argument("--out", required=True, help="output stem, e.g. data/ex1_m16")
    e.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    threads = os.environ.get("SSTS_NUM_THREADS")
    try:
        if threads:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(limits=int(threads)):
                return args.func(args)
        return args.func(args)
    except ValueError as exc:
        print(f"bench: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
