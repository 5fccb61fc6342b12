"""Inner solves with symmetric positive definite matrices.

Two routes sit behind :func:`make_inner_solver`: a sparse LDL^T
factorization computed once and reused for every right-hand side, and a
plain conjugate gradient loop for when the factor would not fit in memory.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .sparse import SparseSym, as_vector, norm2

__all__ = [
    "NotSPDError",
    "InnerSolveConfig",
    "SpdFactorization",
    "CGInfo",
    "factorize",
    "solve",
    "cg_solve",
    "make_inner_solver",
]


class NotSPDError(np.linalg.LinAlgError):
    """Raised when a factorization meets a non-positive pivot."""

    def __init__(self, index: int, pivot: float):
        super().__init__(f"matrix not SPD: pivot {pivot:.6g} at index {index}")
        self.index = index
        self.pivot = pivot


@dataclass(frozen=True)
class InnerSolveConfig:
    mode: str = "direct"
    cg_tol: float = 1e-13
    cg_max_iters: int = 10_000

    def __post_init__(self):
        if self.mode not in ("direct", "cg"):
            raise ValueError(f"unknown inner solve mode {self.mode!r}")
        if not 0.0 < self.cg_tol < 1.0:
            raise ValueError("cg_tol must lie in (0, 1)")
        if self.cg_max_iters < 1:
            raise ValueError("cg_max_iters must be >= 1")


class SpdFactorization:
    """Sparse ``P A P^T = L D L^T`` factorization of an SPD matrix.

    The ordering is a minimum-degree permutation on ``A + A^T``, applied
    symmetrically, and no numerical pivoting is done, so the diagonal of
    ``U`` is ``D`` and positivity of ``D`` certifies positive definiteness.
    The ordering depends only on the sparsity pattern, so the factors are
    bit-deterministic for a given matrix.
    """

    def __init__(self, A: SparseSym):
        self.n = A.n_rows
        self.tag = id(A)
        if self.n == 0:
            self._lu = None
            self.perm = np.zeros(0, dtype=np.int64)
            self.pivots = np.zeros(0)
            return
        lu = spla.splu(
            A.csr.tocsc(),
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options=dict(SymmetricMode=True),
        )
        if not np.array_equal(lu.perm_r, lu.perm_c):
            # Row interchanges happened, so U's diagonal is not D.
            raise NotSPDError(int(np.flatnonzero(lu.perm_r != lu.perm_c)[0]), np.nan)
        self.perm = np.asarray(lu.perm_c)
        self.pivots = lu.U.diagonal()
        bad = np.flatnonzero(~(self.pivots > 0.0))
        if bad.size:
            k = int(bad[0])
            # perm_c maps original column -> factor position
            orig = int(np.flatnonzero(self.perm == k)[0])
            raise NotSPDError(orig, float(self.pivots[k]))
        self._lu = lu

    @property
    def L(self):
        """Unit lower-triangular factor in the permuted ordering."""
        return self._lu.L

    def solve(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=np.float64)
        if b.shape[0] != self.n:
            raise ValueError(f"dimension mismatch: factor is {self.n}, rhs {b.shape[0]}")
        if self.n == 0:
            return b.copy()
        return self._lu.solve(b)

    __call__ = solve


def factorize(A: SparseSym) -> SpdFactorization:
    return SpdFactorization(A)


def solve(F: SpdFactorization, b) -> np.ndarray:
    return F.solve(b)


@dataclass
class CGInfo:
    iterations: int
    relative_residual: float
    converged: bool


def cg_solve(A: SparseSym, b, cfg: InnerSolveConfig | None = None, x0=None):
    """Conjugate gradients on an SPD matrix.

    Returns
    -------
    x : ndarray
        Final iterate (the best one seen, by residual norm, if the loop
        ran out of iterations).
    info : CGInfo
    """
    cfg = cfg or InnerSolveConfig(mode="cg")
    b = as_vector(b, A.n_rows, "b")
    bnorm = norm2(b)
    if bnorm == 0.0:
        return np.zeros_like(b), CGInfo(0, 0.0, True)
    x = np.zeros_like(b) if x0 is None else as_vector(x0, A.n_rows, "x0").copy()
    r = b - A.csr @ x
    p = r.copy()
    rr = float(r @ r)
    best_x, best_res = x.copy(), np.sqrt(rr) / bnorm
    k = 0
    while best_res > cfg.cg_tol and k < cfg.cg_max_iters:
        Ap = A.csr @ p
        pAp = float(p @ Ap)
        if pAp <= 0.0:
            raise NotSPDError(-1, pAp)
        step = rr / pAp
        x += step * p
        r -= step * Ap
        rr_new = float(r @ r)
        k += 1
        res = np.sqrt(rr_new) / bnorm
        if res < best_res:
            best_x, best_res = x.copy(), res
        p = r + (rr_new / rr) * p
        rr = rr_new
    return best_x, CGInfo(k, float(best_res), best_res <= cfg.cg_tol)


class _CGSolver:
    def __init__(self, A: SparseSym, cfg: InnerSolveConfig):
        self.A = A
        self.cfg = cfg
        self.n = A.n_rows
        self.last_info: CGInfo | None = None

    def solve(self, b):
        x, info = cg_solve(self.A, b, self.cfg)
        self.last_info = info
        if not info.converged:
            raise RuntimeError(
                f"inner CG stalled at relative residual {info.relative_residual:.3e} "
                f"after {info.iterations} iterations"
            )
        return x

    __call__ = solve


def make_inner_solver(A: SparseSym, cfg: InnerSolveConfig | None = None):
    """Object with a ``solve(b)`` method for repeated solves with ``A``."""
    cfg = cfg or InnerSolveConfig()
    if cfg.mode == "direct":
        return factorize(A)
    return _CGSolver(A, cfg)
