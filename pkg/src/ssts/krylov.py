"""Restarted GMRES with a left preconditioner, and the SSTS preconditioner.

Iteration counts are reported the way restarted GMRES results are usually
tabulated: ``c(j)`` means ``c`` restart cycles were entered and ``j`` Arnoldi
steps were taken in the last one, so ``restart * (c - 1) + j`` steps total.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .problems import BlockSystem
from .sparse import spmv
from .spd import InnerSolveConfig
from .transform import TransformedSystem, transform

__all__ = [
    "GmresConfig",
    "GmresReport",
    "IdentityPreconditioner",
    "SSTSPreconditioner",
    "ssts_precond_apply",
    "gmres_restarted",
    "original_operator",
    "transformed_operator",
    "solve_gmres",
]


@dataclass(frozen=True)
class GmresConfig:
    restart: int = 10
    tol: float = 1e-6
    max_cycles: int = 1000
    breakdown_tol: float = 1e-14

    def __post_init__(self):
        if self.restart < 1:
            raise ValueError("restart must be >= 1")
        if not 0.0 < self.tol < 1.0:
            raise ValueError("tol must lie in (0, 1)")
        if self.max_cycles < 1:
            raise ValueError("max_cycles must be >= 1")


@dataclass
class GmresReport:
    restart: int
    cycles: int
    inner_last: int
    total_matvecs: int
    precond_applications: int
    converged: bool
    true_residual: float
    residual_history: list[float] = field(default_factory=list)
    wall_time_s: float = 0.0

    @property
    def total_inner(self) -> int:
        if self.cycles == 0:
            return 0
        return self.restart * (self.cycles - 1) + self.inner_last

    @property
    def label(self) -> str:
        return f"{self.cycles}({self.inner_last})"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["total_inner"] = self.total_inner
        d["label"] = self.label
        return d


class IdentityPreconditioner:
    applications = 0

    def __call__(self, v):
        return v


class SSTSPreconditioner:
    """Left preconditioner ``M = [[Wt, 0], [Tt, alpha Wt]]`` for the rotated system.

    Applying ``M^{-1}`` takes two solves with ``Wt`` against one cached
    factorization.
    """

    def __init__(self, ts: TransformedSystem, alpha: float, inner: InnerSolveConfig | None = None):
        if not alpha > 0.0:
            raise ValueError(f"alpha must be positive, got {alpha}")
        self.ts = ts
        self.alpha = float(alpha)
        self._solver = ts.inner_solver(inner)
        self.applications = 0
        self.solves = 0

    def apply(self, r, s):
        n = self.ts.n
        r = np.asarray(r)
        s = np.asarray(s)
        if r.shape != (n,) or s.shape != (n,):
            raise ValueError(f"expected two vectors of length {n}")
        self.applications += 1
        self.solves += 2
        e = self._solver.solve(r)
        f = self._solver.solve((s - spmv(self.ts.Tt, e)) / self.alpha)
        return e, f

    def __call__(self, v):
        n = self.ts.n
        e, f = self.apply(v[:n], v[n:])
        return np.concatenate([e, f])


def ssts_precond_apply(ts: TransformedSystem, alpha: float, r, s):
    """Solve ``M (e, f) = (r, s)`` with the SSTS splitting matrix."""
    return SSTSPreconditioner(ts, alpha).apply(r, s)


def _as_operator(A):
    if callable(A) and not hasattr(A, "matvec"):
        return A
    if hasattr(A, "matvec"):
        return A.matvec
    return lambda v: A @ v


def _givens(a, b):
    """Rotation (c, s) with ``[[c, s], [-conj(s), c]] @ [a, b] = [r, 0]``; c real."""
    if b == 0:
        return 1.0, 0.0 * a
    if a == 0:
        return 0.0, 1.0 + 0.0 * a
    t = np.hypot(abs(a), abs(b))
    c = abs(a) / t
    s = (a / abs(a)) * np.conj(b) / t
    return c, s


def gmres_restarted(A, b, M=None, cfg: GmresConfig | None = None, x0=None, check: str = "trigger"):
    """Left-preconditioned GMRES(restart) with modified Gram-Schmidt Arnoldi.

    Convergence is declared only on the true relative residual
    ``||b - A x|| / ||b||``. It is evaluated whenever the Arnoldi
    least-squares estimate of the preconditioned residual drops below
    ``tol`` (``check="trigger"``), or after every step (``check="every"``),
    and always at the start of each cycle.

    Parameters
    ----------
    A : callable, sparse matrix or LinearOperator
    b : ndarray
        Real or complex right-hand side; the iteration runs in its dtype.
    M : callable, optional
        Applies the inverse of the left preconditioner.

    Returns
    -------
    x : ndarray
    report : GmresReport
    """
    cfg = cfg or GmresConfig()
    if check not in ("trigger", "every"):
        raise ValueError(f"unknown check policy {check!r}")
    matvec = _as_operator(A)
    M = M if M is not None else IdentityPreconditioner()
    b = np.asarray(b)
    dtype = np.result_type(b.dtype, np.float64)
    n = b.shape[0]
    x = np.zeros(n, dtype) if x0 is None else np.array(x0, dtype=dtype)
    if x.shape != (n,):
        raise ValueError("x0 and b differ in length")
    m = cfg.restart
    t0 = time.perf_counter()
    n_matvec = 0
    precond_start = getattr(M, "applications", 0)

    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n, dtype), GmresReport(m, 0, 0, 0, 0, True, 0.0, [0.0], 0.0)
    pbnorm = np.linalg.norm(M(b))

    def true_res(xc):
        nonlocal n_matvec
        n_matvec += 1
        return float(np.linalg.norm(b - matvec(xc)) / bnorm)

    history = []
    cycles = inner_last = 0
    converged = False
    while True:
        r = b - matvec(x)
        n_matvec += 1
        res = float(np.linalg.norm(r) / bnorm)
        if res < cfg.tol:
            converged = True
            break
        if cycles >= cfg.max_cycles:
            break
        cycles += 1
        z = M(r)
        beta = np.linalg.norm(z)
        V = np.zeros((m + 1, n), dtype)
        H = np.zeros((m + 1, m), dtype)
        cs = np.zeros(m)
        sn = np.zeros(m, dtype)
        g = np.zeros(m + 1, dtype)
        g[0] = beta
        V[0] = z / beta
        history.append(float(beta / pbnorm))
        for j in range(m):
            w = M(matvec(V[j]))
            n_matvec += 1
            for i in range(j + 1):
                H[i, j] = np.vdot(V[i], w)
                w = w - H[i, j] * V[i]
            H[j + 1, j] = np.linalg.norm(w)
            lucky = abs(H[j + 1, j]) <= cfg.breakdown_tol * pbnorm
            if not lucky:
                V[j + 1] = w / H[j + 1, j]
            for i in range(j):
                hi, hi1 = H[i, j], H[i + 1, j]
                H[i, j] = cs[i] * hi + sn[i] * hi1
                H[i + 1, j] = -np.conj(sn[i]) * hi + cs[i] * hi1
            cs[j], sn[j] = _givens(H[j, j], H[j + 1, j])
            H[j, j] = cs[j] * H[j, j] + sn[j] * H[j + 1, j]
            H[j + 1, j] = 0.0
            g[j + 1] = -np.conj(sn[j]) * g[j]
            g[j] = cs[j] * g[j]
            est = float(abs(g[j + 1]) / pbnorm)
            history.append(est)
            if lucky or est < cfg.tol or check == "every":
                x_cand = x + _update(H, g, V, j + 1)
                res = true_res(x_cand)
                if res < cfg.tol:
                    converged = True
                    break
                if lucky:
                    break
        inner_last = j + 1
        x = x_cand if converged else x + _update(H, g, V, inner_last)
        if converged:
            break
    report = GmresReport(
        restart=m,
        cycles=cycles,
        inner_last=inner_last,
        total_matvecs=n_matvec,
        precond_applications=getattr(M, "applications", 0) - precond_start,
        converged=bool(converged),
        true_residual=res,
        residual_history=history,
        wall_time_s=time.perf_counter() - t0,
    )
    return x, report


def _update(H, g, V, k):
    y = solve_triangular(H[:k, :k], g[:k], lower=False)
    return V[:k].T @ y


def original_operator(sys: BlockSystem, form: str = "complex"):
    """Operator and right-hand side of the untransformed system.

    ``form="complex"`` gives ``u -> (W + iT) u`` on ``C^n`` with ``b = p + iq``;
    ``form="real"`` gives the ``2n`` real block matrix with ``b = (p, q)``.
    """
    if form == "complex":
        def matvec(u):
            return spmv(sys.W, u) + 1j * spmv(sys.T, u)
        return matvec, sys.p + 1j * sys.q
    if form == "real":
        n = sys.n

        def matvec(z):
            return np.concatenate(sys.matvec(z[:n], z[n:]))
        return matvec, sys.rhs
    raise ValueError(f"unknown form {form!r}")


def transformed_operator(ts: TransformedSystem):
    n = ts.n

    def matvec(z):
        return np.concatenate(ts.matvec(z[:n], z[n:]))
    return matvec, ts.rhs


def solve_gmres(
    sys: BlockSystem,
    precond: str = "none",
    alpha: float | None = None,
    omega: float | None = None,
    cfg: GmresConfig | None = None,
    form: str = "complex",
    inner: InnerSolveConfig | None = None,
):
    """GMRES on one of the benchmark set-ups.

    ``precond="none"`` runs on the original system (complex form by default).
    ``precond="ssts"`` runs on the omega-rotated real system with the SSTS
    splitting matrix as left preconditioner.

    Returns ``(x, y, report)`` with ``x + iy`` the solution of the original
    system.
    """
    n = sys.n
    if precond == "none":
        matvec, b = original_operator(sys, form)
        z, report = gmres_restarted(matvec, b, None, cfg)
        if form == "complex":
            return z.real.copy(), z.imag.copy(), report
        return z[:n].copy(), z[n:].copy(), report
    if precond == "ssts":
        if alpha is None or omega is None:
            raise ValueError("ssts preconditioner needs alpha and omega")
        ts = transform(sys, omega)
        matvec, b = transformed_operator(ts)
        z, report = gmres_restarted(matvec, b, SSTSPreconditioner(ts, alpha, inner), cfg)
        return z[:n].copy(), z[n:].copy(), report
    raise ValueError(f"unknown preconditioner {precond!r}")
