"""Benchmark block two-by-two systems.

Both generators discretize the negative Laplacian on the unit square with
the five-point stencil (``K = I (x) V + V (x) I``) and scale everything by
``h**2`` so that entries stay O(1) as the mesh is refined.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .sparse import (
    SparseSym,
    as_vector,
    identity,
    kron_sum,
    linear_combination,
    read_matrix_market,
    spmv,
    tridiag,
    write_matrix_market,
)

__all__ = [
    "BlockSystem",
    "laplacian_2d",
    "laplacian_eigenvalues",
    "example1",
    "example2",
    "identity_system",
    "save_system",
    "load_system",
]

EXAMPLE2_THETA = np.pi
EXAMPLE2_DAMPING = 0.02
EXAMPLE2_VISCOUS = 10.0


@dataclass(frozen=True, eq=False)
class BlockSystem:
    """``[[W, -T], [T, W]] [x; y] = [p; q]``, i.e. ``(W + iT)(x + iy) = p + iq``."""

    W: SparseSym
    T: SparseSym
    p: np.ndarray
    q: np.ndarray
    descriptor: str = ""

    def __post_init__(self):
        n = self.W.n_rows
        if self.T.n_rows != n:
            raise ValueError("W and T must have the same size")
        object.__setattr__(self, "p", as_vector(self.p, n, "p"))
        object.__setattr__(self, "q", as_vector(self.q, n, "q"))

    @property
    def n(self) -> int:
        return self.W.n_rows

    @property
    def rhs(self) -> np.ndarray:
        return np.concatenate([self.p, self.q])

    def matvec(self, x, y):
        """Apply the real block matrix to ``(x, y)``."""
        Wx, Wy = spmv(self.W, x), spmv(self.W, y)
        Tx, Ty = spmv(self.T, x), spmv(self.T, y)
        return Wx - Ty, Tx + Wy

    def dense_block(self) -> np.ndarray:
        W, T = self.W.toarray(), self.T.toarray()
        return np.block([[W, -T], [T, W]])

    def min_eig_sum(self) -> float:
        """Smallest eigenvalue of ``W + T``; positive iff null(W) and null(T) meet only in 0."""
        return float(np.linalg.eigvalsh(self.W.toarray() + self.T.toarray())[0])


def laplacian_2d(m: int) -> tuple[SparseSym, float]:
    """Scaled five-point Laplacian ``h**2 K`` and the mesh width ``h``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    h = 1.0 / (m + 1)
    # h^2 * (h^-2 tridiag) is exactly tridiag(-1, 2, -1).
    return kron_sum(tridiag(m, -1.0, 2.0, -1.0)), h


def laplacian_eigenvalues(m: int) -> np.ndarray:
    """All eigenvalues of ``h**2 K``, ascending: 4 - 2cos(j pi h) - 2cos(k pi h)."""
    h = 1.0 / (m + 1)
    c = 2.0 - 2.0 * np.cos(np.arange(1, m + 1) * np.pi * h)
    return np.sort((c[:, None] + c[None, :]).ravel())


def example1(m: int) -> BlockSystem:
    """Time-stepping system from a Pade approximation of the heat equation.

    ``W = h^2 K + (3 - sqrt 3) h I``, ``T = h^2 K + (3 + sqrt 3) h I`` with
    time step ``tau = h``; ``b_j = (1 - i) j / (tau (1 + j)^2)`` scaled by
    ``h**2``, for ``j = 1..n``.
    """
    K, h = laplacian_2d(m)
    n = m * m
    tau = h
    s3 = np.sqrt(3.0)
    I = identity(n)
    W = linear_combination(1.0, K, h * h * (3.0 - s3) / tau, I)
    T = linear_combination(1.0, K, h * h * (3.0 + s3) / tau, I)
    j = np.arange(1, n + 1, dtype=np.float64)
    p = h * h * j / (tau * (1.0 + j) ** 2)
    return BlockSystem(W, T, p, -p, f"example1 m={m} n={n} h={h!r} tau={tau!r}")


def example2(m: int) -> BlockSystem:
    """Damped structural-dynamics system.

    ``W = h^2 (K - theta^2 I)`` and ``T = h^2 (10 theta I + 0.02 K)`` with
    ``theta = pi``; the right-hand side is built so the exact solution is
    ``x = y = 1``.
    """
    K, h = laplacian_2d(m)
    n = m * m
    theta = EXAMPLE2_THETA
    lam_min = float(np.min(laplacian_eigenvalues(m)))
    w_min = lam_min - theta**2 * h * h
    if w_min <= 0.0:
        raise ValueError(f"W is not SPD for m={m}: smallest eigenvalue {w_min:.6g}")
    I = identity(n)
    W = linear_combination(1.0, K, -theta**2 * h * h, I)
    T = linear_combination(EXAMPLE2_DAMPING, K, EXAMPLE2_VISCOUS * theta * h * h, I)
    ones = np.ones(n)
    W1, T1 = spmv(W, ones), spmv(T, ones)
    # (W + iT)(1 + i)1 = (W - T)1 + i(W + T)1
    return BlockSystem(
        W, T, W1 - T1, W1 + T1,
        f"example2 m={m} n={n} h={h!r} theta=pi varsigma={EXAMPLE2_DAMPING}",
    )


def identity_system(n: int, p=None, q=None) -> BlockSystem:
    """``W = T = I``; handy degenerate case where SSTS converges in one sweep."""
    p = np.ones(n) if p is None else p
    q = np.zeros(n) if q is None else q
    return BlockSystem(identity(n), identity(n), p, q, f"identity n={n}")


def generate(example: int, m: int) -> BlockSystem:
    if example == 1:
        return example1(m)
    if example == 2:
        return example2(m)
    raise ValueError(f"unknown example {example!r}")


def save_system(sys: BlockSystem, stem) -> list[Path]:
    """Write ``<stem>_W.mtx``, ``<stem>_T.mtx`` and a ``<stem>.json`` sidecar with p, q."""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    w_path = stem.parent / f"{stem.name}_W.mtx"
    t_path = stem.parent / f"{stem.name}_T.mtx"
    j_path = stem.with_suffix(".json")
    write_matrix_market(w_path, sys.W, comment=sys.descriptor)
    write_matrix_market(t_path, sys.T, comment=sys.descriptor)
    j_path.write_text(json.dumps({
        "descriptor": sys.descriptor,
        "n": sys.n,
        "W": w_path.name,
        "T": t_path.name,
        "p": sys.p.tolist(),
        "q": sys.q.tolist(),
    }, indent=2))
    return [w_path, t_path, j_path]


def load_system(sidecar) -> BlockSystem:
    sidecar = Path(sidecar)
    meta = json.loads(sidecar.read_text())
    W = read_matrix_market(sidecar.parent / meta["W"])
    T = read_matrix_market(sidecar.parent / meta["T"])
    return BlockSystem(W, T, np.array(meta["p"]), np.array(meta["q"]), meta["descriptor"])
