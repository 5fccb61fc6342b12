"""The omega-rotation of the block system and its block-triangular splitting.

Premultiplying ``[[W, -T], [T, W]]`` by ``P = [[w I, I], [-I, w I]]`` gives
a matrix of the same block shape with

    Wt = w W + T   (SPD whenever W, T are PSD with trivial common null space)
    Tt = w T - W   (symmetric, usually indefinite)

and right-hand side ``(w p + q, w q - p)``. The splitting used by SSTS is

    M = [[Wt, 0], [Tt, a Wt]],   N = [[0, Tt], [0, (a - 1) Wt]].
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .problems import BlockSystem
from .sparse import SparseSym, linear_combination, spmv
from .spd import InnerSolveConfig, make_inner_solver

__all__ = [
    "TransformedSystem",
    "Splitting",
    "transform",
    "rotation_matrix",
    "solution_invariance_check",
]


@dataclass(frozen=True, eq=False)
class TransformedSystem:
    Wt: SparseSym
    Tt: SparseSym
    pt: np.ndarray
    qt: np.ndarray
    omega: float
    source: BlockSystem | None = field(default=None, repr=False)
    _solvers: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.Wt.n_rows

    @property
    def rhs(self) -> np.ndarray:
        return np.concatenate([self.pt, self.qt])

    def matvec(self, x, y):
        Wx, Wy = spmv(self.Wt, x), spmv(self.Wt, y)
        Tx, Ty = spmv(self.Tt, x), spmv(self.Tt, y)
        return Wx - Ty, Tx + Wy

    def inner_solver(self, cfg: InnerSolveConfig | None = None):
        """Solver for ``Wt``, built on first use and cached per configuration.

        This is also where positive definiteness of ``Wt`` gets checked.
        """
        cfg = cfg or InnerSolveConfig()
        if cfg not in self._solvers:
            self._solvers[cfg] = make_inner_solver(self.Wt, cfg)
        return self._solvers[cfg]

    def dense_block(self) -> np.ndarray:
        Wt, Tt = self.Wt.toarray(), self.Tt.toarray()
        return np.block([[Wt, -Tt], [Tt, Wt]])


def transform(sys: BlockSystem, omega: float) -> TransformedSystem:
    if not omega > 0.0:
        raise ValueError(f"omega must be positive, got {omega}")
    omega = float(omega)
    return TransformedSystem(
        Wt=linear_combination(omega, sys.W, 1.0, sys.T),
        Tt=linear_combination(omega, sys.T, -1.0, sys.W),
        pt=omega * sys.p + sys.q,
        qt=omega * sys.q - sys.p,
        omega=omega,
        source=sys,
    )


def rotation_matrix(n: int, omega: float) -> np.ndarray:
    """Dense ``[[w I, I], [-I, w I]]``; determinant ``(w**2 + 1)**n``."""
    I = np.eye(n)
    return np.block([[omega * I, I], [-I, omega * I]])


@dataclass(frozen=True)
class Splitting:
    """``M - N`` splitting of the rotated block matrix for a given ``alpha``."""

    ts: TransformedSystem
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    def dense_M(self) -> np.ndarray:
        Wt, Tt = self.ts.Wt.toarray(), self.ts.Tt.toarray()
        return np.block([[Wt, np.zeros_like(Wt)], [Tt, self.alpha * Wt]])

    def dense_N(self) -> np.ndarray:
        Wt, Tt = self.ts.Wt.toarray(), self.ts.Tt.toarray()
        return np.block([[np.zeros_like(Wt), Tt], [np.zeros_like(Wt), (self.alpha - 1.0) * Wt]])


def solution_invariance_check(sys: BlockSystem, omega: float, max_n: int = 256) -> dict:
    """Dense-solve the original and rotated systems and compare the solutions."""
    if sys.n > max_n:
        raise ValueError(f"dense check limited to n <= {max_n}, got {sys.n}")
    ts = transform(sys, omega)
    z = np.linalg.solve(sys.dense_block(), sys.rhs)
    zt = np.linalg.solve(ts.dense_block(), ts.rhs)
    diff = float(np.linalg.norm(z - zt) / max(np.linalg.norm(z), np.finfo(float).tiny))
    return {"omega": float(omega), "relative_difference": diff, "agree": diff <= 1e-10}
