"""Stationary iterations for the block two-by-two system.

All four methods stop on the relative residual of the *original* system,
``||b - A z_k|| / ||b||``, checked once before the first sweep and then
after every complete sweep. Iteration counts therefore count sweeps.
"""
from __future__ import annotations

import json
import time
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .problems import BlockSystem
from .sparse import as_vector, identity, linear_combination, norm2, spmv
from .spd import InnerSolveConfig, make_inner_solver
from .transform import TransformedSystem, transform

__all__ = [
    "SolverConfig",
    "SolveReport",
    "residual",
    "ssts_solve",
    "sbts_solve",
    "psbts_solve",
    "mhss_solve",
    "SOLVES_PER_SWEEP",
]

# Real SPD solves per sweep. MHSS does two complex half-steps, each needing
# one solve for the real part and one for the imaginary part.
SOLVES_PER_SWEEP = {"ssts": 2, "sbts": 4, "psbts": 4, "mhss": 4}


@dataclass(frozen=True)
class SolverConfig:
    alpha: float
    omega: float = 1.0
    tol: float = 1e-6
    max_iters: int = 5000
    inner: InnerSolveConfig = field(default_factory=InnerSolveConfig)

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.omega > 0.0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if not 0.0 < self.tol < 1.0:
            raise ValueError("tol must lie in (0, 1)")
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")


@dataclass
class SolveReport:
    method: str
    alpha: float
    omega: float | None
    iterations: int
    converged: bool
    residual_history: list[float]
    wall_time_s: float
    tol: float
    inner_solves: int = 0
    m: int | None = None

    @property
    def solves_per_sweep(self) -> float:
        return self.inner_solves / self.iterations if self.iterations else 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "SolveReport":
        return cls(**json.loads(text))


class _Counted:
    """Wraps an inner solver and counts calls."""

    def __init__(self, solver):
        self._solver = solver
        self.calls = 0

    def __call__(self, b):
        self.calls += 1
        return self._solver.solve(b)


def residual(sys: BlockSystem, x, y, with_flag: bool = False):
    """Relative residual ``||(p, q) - A (x, y)|| / ||(p, q)||`` of the original system.

    If the right-hand side is zero the absolute residual is returned instead;
    pass ``with_flag=True`` to get ``(value, is_relative)``.
    """
    x = as_vector(x, sys.n, "x")
    y = as_vector(y, sys.n, "y")
    value, relative = _residual(sys, x, y)
    if not relative and not with_flag:
        warnings.warn("zero right-hand side: returning absolute residual", RuntimeWarning)
    return (value, relative) if with_flag else value


def _residual(sys, x, y):
    ax, ay = sys.matvec(x, y)
    with np.errstate(over="ignore", invalid="ignore"):
        rnorm = np.hypot(norm2(sys.p - ax), norm2(sys.q - ay))
    bnorm = np.hypot(norm2(sys.p), norm2(sys.q))
    if bnorm > 0.0:
        return float(rnorm / bnorm), True
    return float(rnorm), False


def _m_of(sys: BlockSystem) -> int | None:
    r = int(round(np.sqrt(sys.n)))
    return r if r * r == sys.n and sys.descriptor.startswith("example") else None


def _start(sys, x0, y0):
    x = np.zeros(sys.n) if x0 is None else as_vector(x0, sys.n, "x0").copy()
    y = np.zeros(sys.n) if y0 is None else as_vector(y0, sys.n, "y0").copy()
    return x, y


def _iterate(sys, cfg, method, omega, sweep, x, y, counter):
    """Drive ``sweep`` until the original-system residual drops below tol."""
    t0 = time.perf_counter()
    history = [residual(sys, x, y)]  # validates the starting guess
    k = 0
    with np.errstate(over="ignore", invalid="ignore"):
        while history[-1] >= cfg.tol and k < cfg.max_iters:
            x, y = sweep(x, y)
            k += 1
            history.append(_residual(sys, x, y)[0])
            if not np.isfinite(history[-1]):
                break
    report = SolveReport(
        method=method,
        alpha=cfg.alpha,
        omega=omega,
        iterations=k,
        converged=bool(history[-1] < cfg.tol),
        residual_history=[float(h) for h in history],
        wall_time_s=time.perf_counter() - t0,
        tol=cfg.tol,
        inner_solves=counter.calls,
        m=_m_of(sys),
    )
    return x, y, report


def _triangular_sweeps(ts: TransformedSystem, Wsolve, alpha: float, symmetric: bool):
    """Sweep for the block lower-triangular splitting of ``[[Wt, -Tt], [Tt, Wt]]``.

    One sweep solves ``Wt x' = Tt y + pt`` then
    ``a Wt y' = (a - 1) Wt y - Tt x' + qt``; the symmetric variant follows up
    with the mirrored pair of half-steps.
    """
    Wt, Tt, pt, qt = ts.Wt, ts.Tt, ts.pt, ts.qt

    def y_step(x, y):
        return Wsolve((alpha - 1.0) * spmv(Wt, y) - spmv(Tt, x) + qt) / alpha

    def x_step(y):
        return Wsolve(spmv(Tt, y) + pt)

    def sweep(x, y):
        x = x_step(y)
        y = y_step(x, y)
        if symmetric:
            y = y_step(x, y)
            x = x_step(y)
        return x, y

    return sweep


def ssts_solve(sys: BlockSystem, cfg: SolverConfig, x0=None, y0=None):
    """Single-step triangular splitting iteration.

    Each sweep costs two solves with ``Wt = omega W + T``, whose factorization
    is computed once.

    Returns
    -------
    x, y : ndarray
    report : SolveReport
    """
    ts = transform(sys, cfg.omega)
    Wsolve = _Counted(ts.inner_solver(cfg.inner))
    sweep = _triangular_sweeps(ts, Wsolve, cfg.alpha, symmetric=False)
    return _iterate(sys, cfg, "ssts", cfg.omega, sweep, *_start(sys, x0, y0), Wsolve)


def psbts_solve(sys: BlockSystem, cfg: SolverConfig, x0=None, y0=None):
    """SBTS run on the omega-rotated system (four solves with ``Wt`` per sweep)."""
    ts = transform(sys, cfg.omega)
    Wsolve = _Counted(ts.inner_solver(cfg.inner))
    sweep = _triangular_sweeps(ts, Wsolve, cfg.alpha, symmetric=True)
    return _iterate(sys, cfg, "psbts", cfg.omega, sweep, *_start(sys, x0, y0), Wsolve)


def sbts_solve(sys: BlockSystem, cfg: SolverConfig, x0=None, y0=None):
    """Symmetric block triangular splitting on the original system.

    Needs ``W`` itself to be SPD; a singular PSD ``W`` raises
    :class:`~ssts.spd.NotSPDError`.
    """
    # The unrotated system is the rotated one with Wt = W, Tt = T, pt = p, qt = q.
    ts = TransformedSystem(sys.W, sys.T, sys.p, sys.q, omega=np.inf, source=sys)
    Wsolve = _Counted(make_inner_solver(sys.W, cfg.inner))
    sweep = _triangular_sweeps(ts, Wsolve, cfg.alpha, symmetric=True)
    return _iterate(sys, cfg, "sbts", None, sweep, *_start(sys, x0, y0), Wsolve)


def mhss_solve(sys: BlockSystem, alpha: float, cfg: SolverConfig | None = None, u0=None):
    """Modified HSS iteration on ``(W + iT) u = p + iq``.

    Complex vectors are carried as ``(real, imag)`` pairs and the two shifted
    matrices ``alpha I + W`` and ``alpha I + T`` are real SPD, each factorized
    once and applied to real and imaginary parts separately.

    Parameters
    ----------
    u0 : tuple of ndarray, optional
        Initial ``(real, imag)`` pair; zero by default.

    Returns
    -------
    (ur, ui) : tuple of ndarray
    report : SolveReport
    """
    cfg = cfg or SolverConfig(alpha=alpha)
    if cfg.alpha != alpha:
        cfg = SolverConfig(alpha, cfg.omega, cfg.tol, cfg.max_iters, cfg.inner)
    I = identity(sys.n)
    solve_w = make_inner_solver(linear_combination(alpha, I, 1.0, sys.W), cfg.inner)
    solve_t = make_inner_solver(linear_combination(alpha, I, 1.0, sys.T), cfg.inner)
    counter = _Counted(None)

    def sw(b):
        counter.calls += 1
        return solve_w.solve(b)

    def st(b):
        counter.calls += 1
        return solve_t.solve(b)

    W, T, p, q = sys.W, sys.T, sys.p, sys.q

    def sweep(x, y):
        # (aI + W) u' = (aI - iT) u + b
        x_half = sw(alpha * x + spmv(T, y) + p)
        y_half = sw(alpha * y - spmv(T, x) + q)
        # (aI + T) u'' = (aI + iW) u' - i b
        x_new = st(alpha * x_half - spmv(W, y_half) + q)
        y_new = st(alpha * y_half + spmv(W, x_half) - p)
        return x_new, y_new

    x0, y0 = (None, None) if u0 is None else u0
    x, y, report = _iterate(sys, cfg, "mhss", None, sweep, *_start(sys, x0, y0), counter)
    return (x, y), report
