"""Single-step triangular splitting (SSTS) solvers for block two-by-two systems.

The systems have the form ``[[W, -T], [T, W]] [x; y] = [p; q]`` with ``W`` and
``T`` symmetric positive semidefinite, the real form of ``(W + iT) u = b``.
"""
from .krylov import GmresConfig, SSTSPreconditioner, gmres_restarted, solve_gmres
from .problems import BlockSystem, example1, example2, identity_system
from .sparse import SparseSym, build_from_triplets, kron_sum, spmv, tridiag
from .spd import InnerSolveConfig, NotSPDError, factorize
from .spectral import SpectralEstimates, estimate_parameters
from .stationary import (
    SolverConfig,
    SolveReport,
    mhss_solve,
    psbts_solve,
    residual,
    sbts_solve,
    ssts_solve,
)
from .transform import TransformedSystem, transform

__version__ = "0.1.0"
