"""Experiment harness: parameter resolution, table runs and desk-scale verification."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import reference
from .krylov import GmresConfig, solve_gmres
from .problems import BlockSystem, generate, identity_system
from .spectral import SpectralEstimates, estimate_parameters, verify_theory
from .stationary import (
    SolverConfig,
    mhss_solve,
    psbts_solve,
    residual,
    sbts_solve,
    ssts_solve,
)

log = logging.getLogger(__name__)

__all__ = [
    "METHODS",
    "ExperimentPlan",
    "CellResult",
    "parse_params",
    "resolve_params",
    "make_system",
    "run_cell",
    "run_table",
    "compute_params",
    "verify",
    "format_table",
]

METHODS = ("mhss", "sbts", "psbts", "ssts", "gmres", "ssts-gmres")
_NEEDS_OMEGA = {"psbts", "ssts", "ssts-gmres"}


@dataclass
class ExperimentPlan:
    example: int | str
    grids: list[int]
    methods: list[str]
    params: str = "table1-opt"
    tol: float = 1e-6
    max_iters: int = 5000
    fmt: str = "md"
    restart: int = 10
    gmres_form: str = "complex"
    eig_mode: str = "auto"

    def __post_init__(self):
        if self.example not in (1, 2, "identity"):
            raise ValueError(f"unknown example {self.example!r}")
        for m in self.grids:
            if int(m) != m or m < 2:
                raise ValueError(f"grid side length must be an integer >= 2, got {m}")
        for meth in self.methods:
            if meth not in METHODS:
                raise ValueError(f"unknown method {meth!r}; choose from {', '.join(METHODS)}")
        if self.fmt not in ("md", "csv", "json"):
            raise ValueError(f"unknown format {self.fmt!r}")
        parse_params(self.params)


@dataclass
class CellResult:
    """One (method, grid) cell; ``report`` holds the solver's JSON-able report."""

    method: str
    m: int
    alpha: float | None
    omega: float | None
    param_source: str
    iterations: int | None
    label: str
    converged: bool
    final_res: float
    cpu_s: float
    published: str | None = None
    report: dict = field(default_factory=dict)
    error: str | None = None

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2)


def parse_params(spec: str):
    """``table1-opt`` | ``table1-exp`` | ``computed`` | ``a=<v>,w=<v>`` (``w`` optional)."""
    if spec in ("table1-opt", "table1-exp", "computed"):
        return spec
    out = {}
    for part in spec.split(","):
        key, sep, val = part.partition("=")
        key = key.strip()
        if not sep or key not in ("a", "w"):
            raise ValueError(f"cannot parse parameter spec {spec!r}")
        out[key] = float(val)
    if "a" not in out:
        raise ValueError(f"explicit parameters need a=<alpha>: {spec!r}")
    return out


def make_system(example, m: int) -> BlockSystem:
    if example == "identity":
        return identity_system(m * m)
    return generate(int(example), m)


def resolve_params(example, m: int, method: str, params, eig_mode: str = "auto"):
    """Return ``(alpha, omega, source)`` for one cell."""
    spec = parse_params(params) if isinstance(params, str) else params
    if method == "gmres":
        return None, None, "none"
    if isinstance(spec, dict):
        a, w = spec["a"], spec.get("w")
        if method in _NEEDS_OMEGA and w is None:
            raise ValueError(f"method {method} needs w=<omega>")
        return a, (w if method in _NEEDS_OMEGA else None), "explicit"
    if example not in (1, 2):
        raise ValueError("published or computed parameters exist only for examples 1 and 2")
    if method in ("ssts", "ssts-gmres"):
        if spec == "computed":
            est = compute_params(example, m, eig_mode)
            return est.alpha_opt, est.omega_opt, "computed"
        key = "ssts-exp" if spec == "table1-exp" else "ssts-opt"
        a, w = reference.table1(example, m, key)
        return a, w, key
    value = reference.table1(example, m, method)
    if method == "psbts":
        return value[0], value[1], "table1"
    return value, None, "table1"


def _published_label(example, m, method, source) -> str | None:
    try:
        if method in ("gmres", "ssts-gmres"):
            if example != 1:
                return None
            key = "gmres" if method == "gmres" else (
                "ssts-exp-gmres" if source == "ssts-exp" else "ssts-opt-gmres")
            if method == "ssts-gmres" and source not in ("ssts-opt", "ssts-exp"):
                return None
            c, j = reference.published_gmres(m, key)
            return f"{c}({j})"
        if example not in (1, 2):
            return None
        if method == "ssts":
            if source not in ("ssts-opt", "ssts-exp"):
                return None
            return str(reference.published_iterations(example, m, source))
        if source != "table1":
            return None
        return str(reference.published_iterations(example, m, method))
    except KeyError:
        return None


def run_cell(plan: ExperimentPlan, method: str, m: int, sys: BlockSystem | None = None) -> CellResult:
    try:
        alpha, omega, source = resolve_params(plan.example, m, method, plan.params, plan.eig_mode)
        sys = sys or make_system(plan.example, m)
    except (KeyError, ValueError) as exc:
        return CellResult(method, m, None, None, "?", None, "ERROR", False, math.nan, 0.0, error=str(exc))
    published = _published_label(plan.example, m, method, source)
    log.info("running %s on m=%d (alpha=%s, omega=%s)", method, m, alpha, omega)
    try:
        if method in ("gmres", "ssts-gmres"):
            cfg = GmresConfig(restart=plan.restart, tol=plan.tol,
                              max_cycles=max(1, plan.max_iters // plan.restart))
            x, y, rep = solve_gmres(
                sys, "none" if method == "gmres" else "ssts", alpha, omega, cfg, form=plan.gmres_form
            )
            report = {"method": method, "m": m, "alpha": alpha, "omega": omega, **rep.to_dict()}
            iterations, label, converged = rep.total_inner, rep.label, rep.converged
            cpu = rep.wall_time_s
        else:
            cfg = SolverConfig(alpha=alpha, omega=omega or 1.0, tol=plan.tol, max_iters=plan.max_iters)
            if method == "mhss":
                (x, y), rep = mhss_solve(sys, alpha, cfg)
            else:
                x, y, rep = {"sbts": sbts_solve, "psbts": psbts_solve, "ssts": ssts_solve}[method](sys, cfg)
            rep.m = m
            report = rep.to_dict()
            iterations, label, converged = rep.iterations, str(rep.iterations), rep.converged
            cpu = rep.wall_time_s
        final = residual(sys, x, y)
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        return CellResult(method, m, alpha, omega, source, None, "DIVERGED", False, math.nan, 0.0,
                          published, error=str(exc))
    if not converged:
        label = "DIVERGED"
    return CellResult(method, m, alpha, omega, source, iterations, label, converged,
                      float(final), float(cpu), published, report)


def run_table(plan: ExperimentPlan, jobs: int = 1) -> list[CellResult]:
    """Run every (method, grid) cell; results ordered by method then grid."""
    cells = [(meth, m) for meth in plan.methods for m in plan.grids]
    systems: dict[int, BlockSystem] = {}

    def system_for(m):
        if m not in systems:
            systems[m] = make_system(plan.example, m)
        return systems[m]

    if jobs <= 1:
        return [run_cell(plan, meth, m, _safe(system_for, m)) for meth, m in cells]
    for m in plan.grids:
        _safe(system_for, m)
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(run_cell, plan, meth, m, systems.get(m)) for meth, m in cells]
        return [f.result() for f in futures]


def _safe(fn, *args):
    try:
        return fn(*args)
    except ValueError:
        return None


def compute_params(example, m: int, mode: str = "auto") -> SpectralEstimates:
    """Optimal SSTS parameters of one benchmark system from its spectrum."""
    sys = make_system(example, m)
    est = estimate_parameters(sys, mode=mode)
    try:
        a, w = reference.table1(example, m, "ssts-opt")
        log.info("m=%d computed alpha=%.4f omega=%.4f; published %.3f / %.3f",
                 m, est.alpha_opt, est.omega_opt, a, w)
    except (KeyError, TypeError):
        pass
    return est


def verify(example, m: int) -> tuple[bool, list[dict]]:
    if m > 16:
        raise ValueError("verification is dense; use m <= 16")
    results = verify_theory(make_system(example, m))
    return all(r["passed"] for r in results), results


# -- output -----------------------------------------------------------------

_COLUMNS = ("method", "m", "alpha", "omega", "param_source", "IT", "published_IT",
            "RES", "CPU_s", "converged")


def _row(c: CellResult) -> list:
    fmt = lambda v: "" if v is None else f"{v:g}"
    return [c.method, c.m, fmt(c.alpha), fmt(c.omega), c.param_source, c.label,
            c.published or "", f"{c.final_res:.3e}", f"{c.cpu_s:.4f}", c.converged]


def format_table(cells: list[CellResult], fmt: str = "md") -> str:
    if fmt == "json":
        return json.dumps([c.__dict__ for c in cells], indent=2)
    rows = [_row(c) for c in cells]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(_COLUMNS)
        w.writerows(rows)
        return buf.getvalue()
    lines = ["| " + " | ".join(_COLUMNS) + " |", "|" + "---|" * len(_COLUMNS)]
    lines += ["| " + " | ".join(str(v) for v in r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def estimates_json(est: SpectralEstimates, example=None, m=None) -> str:
    d = {"example": example, "m": m, **est.to_dict()}
    try:
        a, w = reference.table1(example, m, "ssts-opt")
        d["table1_alpha"], d["table1_omega"] = a, w
    except (KeyError, TypeError):
        pass
    return json.dumps(d, indent=2, default=_np_default)


def _np_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(type(o))
