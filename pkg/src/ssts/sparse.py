"""Compressed sparse row storage for real symmetric matrices.

The full symmetric pattern is stored (not a triangle), so a row slice is
also a column slice. Instances are immutable; kernels are pure functions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np
import scipy.io
import scipy.sparse as sp

__all__ = [
    "SparseSym",
    "as_vector",
    "build_from_triplets",
    "spmv",
    "tridiag",
    "kron_sum",
    "identity",
    "linear_combination",
    "norm2",
    "read_matrix_market",
    "write_matrix_market",
]


def _readonly(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SparseSym:
    """Symmetric real matrix in canonical CSR form.

    Canonical means: column indices strictly increasing inside each row,
    no stored zeros, and ``A[i, j] == A[j, i]`` exactly for every stored
    entry. Use :func:`build_from_triplets` or :meth:`from_scipy` rather
    than calling the constructor with hand-made arrays.
    """

    n_rows: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray
    _checked: bool = field(default=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "row_offsets", _readonly(self.row_offsets, np.int64))
        object.__setattr__(self, "col_indices", _readonly(self.col_indices, np.int64))
        object.__setattr__(self, "values", _readonly(self.values, np.float64))
        if not self._checked:
            _check_canonical(self)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_rows)

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    @cached_property
    def csr(self) -> sp.csr_matrix:
        """Read-only scipy view used by the numerical kernels."""
        return sp.csr_matrix(
            (self.values, self.col_indices, self.row_offsets), shape=self.shape
        )

    def toarray(self) -> np.ndarray:
        return self.csr.toarray()

    def diagonal(self) -> np.ndarray:
        return self.csr.diagonal()

    def triplets(self) -> list[tuple[int, int, float]]:
        """Dump every stored entry as ``(row, col, value)`` in row-major order."""
        rows = np.repeat(np.arange(self.n_rows), np.diff(self.row_offsets))
        return [
            (int(i), int(j), float(v))
            for i, j, v in zip(rows, self.col_indices, self.values)
        ]

    def scaled(self, c: float) -> "SparseSym":
        if c == 0.0:
            return SparseSym(self.n_rows, np.zeros(self.n_rows + 1), [], [], True)
        return SparseSym(
            self.n_rows, self.row_offsets, self.col_indices, c * self.values, True
        )

    def __matmul__(self, x):
        return spmv(self, x)

    def __eq__(self, other):
        if not isinstance(other, SparseSym):
            return NotImplemented
        return (
            self.n_rows == other.n_rows
            and np.array_equal(self.row_offsets, other.row_offsets)
            and np.array_equal(self.col_indices, other.col_indices)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = object.__hash__

    @classmethod
    def from_scipy(cls, A) -> "SparseSym":
        """Canonicalize a scipy sparse (or dense) matrix; it must be exactly symmetric."""
        A = sp.csr_matrix(A, dtype=np.float64)
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"matrix must be square, got shape {A.shape}")
        A.sum_duplicates()
        A.eliminate_zeros()
        A.sort_indices()
        if (A != A.T).nnz:
            raise ValueError("matrix is not exactly symmetric")
        return cls(A.shape[0], A.indptr, A.indices, A.data, True)


def _check_canonical(A: SparseSym) -> None:
    n = A.n_rows
    ro, ci, v = A.row_offsets, A.col_indices, A.values
    if n < 0 or ro.shape != (n + 1,) or ro[0] != 0 or ro[-1] != v.size:
        raise ValueError("row_offsets inconsistent with n_rows / values")
    if ci.shape != v.shape:
        raise ValueError("col_indices and values differ in length")
    if np.any(np.diff(ro) < 0):
        raise ValueError("row_offsets must be non-decreasing")
    if ci.size and (ci.min() < 0 or ci.max() >= n):
        raise ValueError("column index out of range")
    for i in range(n):
        if np.any(np.diff(ci[ro[i]:ro[i + 1]]) <= 0):
            raise ValueError(f"column indices of row {i} not strictly increasing")
    if np.any(v == 0.0):
        raise ValueError("explicit zeros are not allowed")
    M = sp.csr_matrix((v, ci, ro), shape=(n, n))
    if (M != M.T).nnz:
        raise ValueError("matrix is not exactly symmetric")


def as_vector(x, n: int | None = None, name: str = "vector") -> np.ndarray:
    """Validate a dense real vector: 1-D, finite, optionally of length ``n``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {x.shape}")
    if n is not None and x.size != n:
        raise ValueError(f"{name} has length {x.size}, expected {n}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains NaN or Inf")
    return x


def build_from_triplets(n: int, entries: Iterable[tuple[int, int, float]]) -> SparseSym:
    """Assemble a symmetric matrix from ``(row, col, value)`` triplets.

    Duplicates are summed. An off-diagonal entry whose mirror is absent is
    mirrored; if both ``(i, j)`` and ``(j, i)`` are given their sums must
    agree exactly, otherwise the input is rejected as asymmetric.
    """
    summed: dict[tuple[int, int], float] = {}
    for i, j, v in entries:
        i, j = int(i), int(j)
        if not (0 <= i < n and 0 <= j < n):
            raise IndexError(f"triplet ({i}, {j}) out of range for n={n}")
        summed[i, j] = summed.get((i, j), 0.0) + float(v)
    for (i, j), v in list(summed.items()):
        if (j, i) not in summed:
            summed[j, i] = v
        elif summed[j, i] != v:
            raise ValueError(f"asymmetric entries at ({i}, {j}) and ({j}, {i})")
    keys = sorted(k for k, v in summed.items() if v != 0.0)
    rows = np.array([k[0] for k in keys], dtype=np.int64)
    cols = np.array([k[1] for k in keys], dtype=np.int64)
    vals = np.array([summed[k] for k in keys], dtype=np.float64)
    row_offsets = np.zeros(n + 1, dtype=np.int64)
    np.add.at(row_offsets, rows + 1, 1)
    return SparseSym(n, np.cumsum(row_offsets), cols, vals, True)


def spmv(A: SparseSym, x) -> np.ndarray:
    """Sparse product ``A @ x``, summed row by row in column-index order.

    Complex vectors are accepted (real and imaginary parts are multiplied
    separately) so the same kernel serves the complex form of the system.
    """
    x = np.asarray(x)
    if x.shape[0] != A.n_rows:
        raise ValueError(f"dimension mismatch: matrix {A.shape}, vector {x.shape}")
    if np.iscomplexobj(x):
        return A.csr @ x.real + 1j * (A.csr @ x.imag)
    return A.csr @ x.astype(np.float64, copy=False)


def identity(n: int, scale: float = 1.0) -> SparseSym:
    if scale == 0.0:
        return SparseSym(n, np.zeros(n + 1), [], [], True)
    return SparseSym(n, np.arange(n + 1), np.arange(n), np.full(n, float(scale)), True)


def tridiag(m: int, sub: float, diag: float, sup: float) -> SparseSym:
    """Constant-coefficient symmetric tridiagonal ``m x m`` matrix."""
    if m < 1:
        raise ValueError("m must be at least 1")
    if sub != sup:
        raise ValueError(f"sub ({sub}) and super ({sup}) diagonals must match")
    A = sp.diags([sub, diag, sup], [-1, 0, 1], shape=(m, m), format="csr")
    return SparseSym.from_scipy(A)


def kron_sum(V: SparseSym) -> SparseSym:
    """Return ``I (x) V + V (x) I`` of size ``m**2``."""
    I = sp.identity(V.n_rows, format="csr")
    K = sp.kron(I, V.csr, format="csr") + sp.kron(V.csr, I, format="csr")
    return SparseSym.from_scipy(K)


def linear_combination(a: float, A: SparseSym, b: float, B: SparseSym) -> SparseSym:
    """``a*A + b*B`` assembled on the union of both patterns."""
    if A.n_rows != B.n_rows:
        raise ValueError("matrix sizes differ")
    return SparseSym.from_scipy(a * A.csr + b * B.csr)


def norm2(x) -> float:
    """Euclidean norm, overflow-safe."""
    return float(np.linalg.norm(np.asarray(x)))


def write_matrix_market(path, A: SparseSym, comment: str = "") -> None:
    """Write ``A`` as a Matrix Market coordinate file with the symmetric qualifier."""
    scipy.io.mmwrite(
        str(path), A.csr.tocoo(), comment=comment, field="real", symmetry="symmetric"
    )


def read_matrix_market(path) -> SparseSym:
    """Read a real Matrix Market coordinate file (general or symmetric)."""
    path = Path(path)
    if path.suffix != ".mtx" and not path.exists():
        path = path.with_suffix(".mtx")
    M = scipy.io.mmread(str(path))
    if np.iscomplexobj(M):
        raise ValueError("complex Matrix Market files are not supported")
    return SparseSym.from_scipy(sp.csr_matrix(M))

