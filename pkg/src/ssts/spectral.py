"""Spectral analysis behind SSTS parameter selection.

Notation used throughout:

* ``eta``: generalized eigenvalues of the pencil ``T v = eta W v``.
* ``S = Wt^{-1} Tt`` for the omega-rotated system; its eigenvalues are
  ``mu = (omega*eta - 1) / (omega + eta)``.
* ``H = M^{-1} N``: the SSTS iteration matrix. Its spectrum is ``{0}``
  (n times) together with ``1 - (1 + mu_i**2) / alpha``.

The closed-form pieces (``optimal_omega``, ``optimal_alpha``, ``rho_h``, ...)
are cheap scalar functions. The ``dense_*`` and ``*_check`` helpers build
explicit matrices and are only meant for small grids.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .problems import BlockSystem
from .sparse import SparseSym, linear_combination
from .spd import NotSPDError, factorize
from .transform import Splitting, TransformedSystem, transform

__all__ = [
    "SpectralEstimates",
    "DENSE_LIMIT",
    "gen_eig_all",
    "gen_eig_extremes",
    "mu_from_eta",
    "mu_extremes",
    "rho_s",
    "optimal_omega",
    "optimal_alpha",
    "optimal_rho",
    "rho_h",
    "alpha_threshold",
    "estimate_parameters",
    "dense_S",
    "dense_iteration_matrix",
    "spectral_radius",
    "iteration_spectrum_check",
    "precond_spectrum_check",
    "convergence_boundary_check",
    "optimality_check",
    "verify_theory",
]

DENSE_LIMIT = 4096


class DegeneratePairError(ValueError):
    pass


@dataclass
class SpectralEstimates:
    eta_min: float
    eta_max: float
    mu_min: float
    mu_max: float
    alpha_opt: float
    omega_opt: float
    rho_opt: float
    method: str
    omega: float

    def to_dict(self) -> dict:
        return asdict(self)


# -- generalized eigenvalues ----------------------------------------------------

def _dense(A) -> np.ndarray:
    return A.toarray() if isinstance(A, SparseSym) else np.asarray(A, dtype=float)


def gen_eig_all(W, T) -> np.ndarray:
    """All eigenvalues of ``T v = eta W v``, ascending.

    Reduced to the symmetric problem ``L^{-1} T L^{-T}`` with ``W = L L^T``.
    """
    Wd, Td = _dense(W), _dense(T)
    try:
        L = np.linalg.cholesky(Wd)
    except np.linalg.LinAlgError as exc:
        raise NotSPDError(-1, np.nan) from exc
    X = sla.solve_triangular(L, Td, lower=True)
    C = sla.solve_triangular(L, X.T, lower=True)
    C = 0.5 * (C + C.T)
    return np.linalg.eigvalsh(C)


def _lanczos_extremes(W: SparseSym, T: SparseSym, tol: float = 1e-12):
    n = W.n_rows
    Wf = factorize(W)
    Winv = spla.LinearOperator((n, n), matvec=Wf.solve, dtype=float)
    # Largest eta: the top of the spectrum is well separated for these pencils.
    eta_max = spla.eigsh(
        T.csr, k=1, M=W.csr, Minv=Winv, which="LA", tol=tol, return_eigenvectors=False
    )[0]
    return _lanczos_min(W, T, float(eta_max), tol), float(eta_max)


def _lanczos_min(W: SparseSym, T: SparseSym, eta_max: float, tol: float = 1e-12) -> float:
    """Smallest eta by shift-invert with a shift just below it.

    The bottom of the pencil spectrum is usually tightly clustered, so a
    distant shift converges slowly. A loose solve about -1 (where T + W is
    SPD) gives an upper estimate; the shift is then lowered until T - sigma W
    is SPD, which by Sylvester's law means sigma < eta_min.
    """
    rough = spla.eigsh(
        T.csr, k=1, M=W.csr, sigma=-1.0, which="LM", tol=1e-3, return_eigenvectors=False
    )[0]
    delta = 1e-3 * max(abs(rough), 1e-3 * abs(eta_max), np.finfo(float).tiny)
    while True:
        sigma = float(rough - delta)
        try:
            factorize(linear_combination(1.0, T, -sigma, W))
            break
        except NotSPDError:
            delta *= 4.0
    return float(spla.eigsh(
        T.csr, k=1, M=W.csr, sigma=sigma, which="LM", tol=tol, return_eigenvectors=False
    )[0])


def _lanczos_nearest(W: SparseSym, T: SparseSym, target: float, k: int = 6, tol: float = 1e-12):
    k = min(k, W.n_rows - 1)
    vals = spla.eigsh(
        T.csr, k=k, M=W.csr, sigma=target, which="LM", tol=tol, return_eigenvectors=False
    )
    return np.sort(vals)


def gen_eig_extremes(W, T, mode: str = "auto") -> tuple[float, float]:
    """Extreme eigenvalues ``(eta_min, eta_max)`` of the pencil ``T v = eta W v``.

    Parameters
    ----------
    mode : {"auto", "dense", "lanczos"}
        ``auto`` picks dense for ``n <= DENSE_LIMIT``.
    """
    n = W.n_rows if isinstance(W, SparseSym) else np.shape(W)[0]
    mode = _resolve_mode(mode, n)
    if mode == "dense":
        eta = gen_eig_all(W, T)
        return float(eta[0]), float(eta[-1])
    return _lanczos_extremes(W, T)


def _resolve_mode(mode: str, n: int) -> str:
    if mode == "auto":
        return "dense" if n <= DENSE_LIMIT else "lanczos"
    if mode not in ("dense", "lanczos"):
        raise ValueError(f"unknown eigen mode {mode!r}")
    if mode == "dense" and n > DENSE_LIMIT:
        raise ValueError(f"dense mode limited to n <= {DENSE_LIMIT}, got {n}")
    if mode == "lanczos" and n < 8:
        return "dense"  # ARPACK needs room for its Krylov basis
    return mode


# -- scalar formulas ------------------------------------------------------------

def mu_from_eta(eta, omega: float):
    """Eigenvalue of ``S`` associated with pencil eigenvalue ``eta`` (signed)."""
    eta = np.asarray(eta, dtype=float)
    mu = (omega * eta - 1.0) / (omega + eta)
    return float(mu) if mu.ndim == 0 else mu


def mu_extremes(eta, omega: float) -> tuple[float, float]:
    """``(min |mu|, max |mu|)`` over the given pencil eigenvalues."""
    mu = np.abs(mu_from_eta(np.atleast_1d(eta), omega))
    return float(mu.min()), float(mu.max())


def rho_s(eta_min: float, eta_max: float, omega: float) -> float:
    """Spectral radius of ``S`` from the pencil extremes."""
    return max(
        (1.0 - omega * eta_min) / (omega + eta_min),
        (omega * eta_max - 1.0) / (omega + eta_max),
    )


def optimal_omega(eta_min: float, eta_max: float) -> float:
    """Rotation that minimizes ``max |mu|``."""
    s = eta_min + eta_max
    if s <= 0.0:
        raise DegeneratePairError("degenerate pair: eta_min + eta_max = 0")
    root = np.sqrt((1.0 + eta_min**2) * (1.0 + eta_max**2))
    return float((1.0 - eta_min * eta_max + root) / s)


def optimal_alpha(mu_min: float, mu_max: float) -> float:
    return (2.0 + mu_min**2 + mu_max**2) / 2.0


def optimal_rho(mu_min: float, mu_max: float) -> float:
    return (mu_max**2 - mu_min**2) / (2.0 + mu_min**2 + mu_max**2)


def rho_h(mu_min: float, mu_max: float, alpha: float) -> float:
    """Spectral radius of the SSTS iteration matrix."""
    return max(abs(1.0 - (1.0 + mu_min**2) / alpha), abs(1.0 - (1.0 + mu_max**2) / alpha))


def alpha_threshold(mu_max: float) -> float:
    """SSTS converges iff ``alpha`` exceeds this value."""
    return (1.0 + mu_max**2) / 2.0


def estimate_parameters(sys: BlockSystem, mode: str = "auto", omega: float | None = None) -> SpectralEstimates:
    """Optimal ``(alpha, omega)`` and convergence factor for ``sys``.

    ``omega`` defaults to the optimal rotation; pass a value to get the
    ``mu`` extremes (and the best ``alpha``) at a fixed rotation instead.

    In dense mode ``mu_min`` is taken over the whole pencil spectrum. In
    Lanczos mode the pencil eigenvalues nearest ``1/omega`` (where ``mu``
    changes sign) are found by shift-invert and ``mu_min`` is the smallest
    ``|mu|`` among them and the two extremes. Because ``mu`` is monotone in
    ``eta`` this recovers the true minimum unless all six neighbours lie on
    one side of ``1/omega``.
    """
    mode = _resolve_mode(mode, sys.n)
    if mode == "dense":
        eta = gen_eig_all(sys.W, sys.T)
        eta_min, eta_max = float(eta[0]), float(eta[-1])
    else:
        eta_min, eta_max = _lanczos_extremes(sys.W, sys.T)
    w_opt = optimal_omega(eta_min, eta_max)
    w = w_opt if omega is None else float(omega)
    if mode == "lanczos":
        target = 1.0 / w
        if eta_min < target < eta_max:
            eta = np.concatenate([[eta_min, eta_max], _lanczos_nearest(sys.W, sys.T, target)])
        else:
            eta = np.array([eta_min, eta_max])
    mu_min, mu_max = mu_extremes(eta, w)
    return SpectralEstimates(
        eta_min=eta_min,
        eta_max=eta_max,
        mu_min=mu_min,
        mu_max=mu_max,
        alpha_opt=optimal_alpha(mu_min, mu_max),
        omega_opt=w_opt,
        rho_opt=optimal_rho(mu_min, mu_max),
        method=mode,
        omega=w,
    )


# -- dense verification ---------------------------------------------------------

def _guard(n: int, limit: int = DENSE_LIMIT) -> None:
    if n > limit:
        raise ValueError(f"dense verification limited to n <= {limit}, got {n}")


def dense_S(ts: TransformedSystem) -> np.ndarray:
    _guard(ts.n)
    return np.linalg.solve(ts.Wt.toarray(), ts.Tt.toarray())


def s_spectrum(ts: TransformedSystem) -> np.ndarray:
    """Eigenvalues of ``S`` from the symmetric pencil ``(Tt, Wt)``, ascending."""
    return gen_eig_all(ts.Wt, ts.Tt)


def dense_iteration_matrix(ts: TransformedSystem, alpha: float) -> np.ndarray:
    """Explicit ``H = M^{-1} N`` (``2n x 2n``) by a dense solve."""
    _guard(ts.n)
    split = Splitting(ts, alpha)
    return np.linalg.solve(split.dense_M(), split.dense_N())


def spectral_radius(A: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def _multiset_gap(computed: np.ndarray, expected: np.ndarray) -> float:
    """Largest mismatch after sorting both spectra (real parts; imag checked separately)."""
    c = np.sort(np.real(computed))
    e = np.sort(np.real(expected))
    return float(np.max(np.abs(c - e))) if c.size else 0.0


def iteration_spectrum_check(ts: TransformedSystem, alpha: float, tol: float = 1e-8) -> dict:
    """Compare the spectrum of the explicit ``H`` with ``{0}^n + {1 - (1 + mu^2)/alpha}``."""
    n = ts.n
    H = dense_iteration_matrix(ts, alpha)
    sv = np.linalg.svd(H, compute_uv=False)
    tail = float(sv[n:].max() / sv[0]) if sv[0] > 0 else 0.0
    lam = np.linalg.eigvals(H)
    mu = s_spectrum(ts)
    expected = np.concatenate([np.zeros(n), 1.0 - (1.0 + mu**2) / alpha])
    gap = _multiset_gap(lam, expected)
    imag = float(np.max(np.abs(lam.imag)))
    return {
        "n": n,
        "alpha": float(alpha),
        "omega": ts.omega,
        "rank_tail_ratio": tail,
        "spectrum_gap": gap,
        "max_imag": imag,
        "rho_dense": float(np.max(np.abs(lam))),
        "rho_formula": rho_h(float(np.abs(mu).min()), float(np.abs(mu).max()), alpha),
        "passed": tail < 1e-10 and gap < tol and imag < tol,
    }


def precond_spectrum_check(ts: TransformedSystem, alpha: float, tol: float = 1e-8) -> dict:
    """Spectrum of ``M^{-1} At`` against ``{1}^n + {(1 + mu^2)/alpha}``.

    ``xi`` is the Rayleigh quotient ``v* S^2 v / v* v`` at each eigenvector
    of ``S``; it must equal ``mu**2`` there.
    """
    _guard(ts.n)
    n = ts.n
    M = Splitting(ts, alpha).dense_M()
    G = np.linalg.solve(M, ts.dense_block())
    sigma = np.linalg.eigvals(G)
    S = dense_S(ts)
    mu, V = np.linalg.eig(S)
    SV = S @ (S @ V)
    xi = np.real(np.einsum("ij,ij->j", V.conj(), SV) / np.einsum("ij,ij->j", V.conj(), V))
    expected = np.concatenate([np.ones(n), (1.0 + xi) / alpha])
    n_unit = int(np.sum(np.abs(sigma - 1.0) < np.sqrt(tol)))
    others = sigma[np.argsort(np.abs(sigma - 1.0))[n:]]
    return {
        "n": n,
        "alpha": float(alpha),
        "omega": ts.omega,
        "unit_multiplicity": n_unit,
        "spectrum_gap": _multiset_gap(sigma, expected),
        "xi_vs_mu2": float(np.max(np.abs(xi - np.real(mu) ** 2))),
        "max_imag": float(np.max(np.abs(sigma.imag))),
        "min_nonunit": float(np.min(np.real(others))) if others.size else np.nan,
        "passed": bool(
            n_unit >= n
            and _multiset_gap(sigma, expected) < tol
            and np.max(np.abs(sigma.imag)) < tol
            and (others.size == 0 or np.min(np.real(others)) > 0.0)
        ),
    }


def convergence_boundary_check(sys: BlockSystem, omega: float | None = None, margin: float = 0.01) -> dict:
    """Dense ``rho(H)`` just above and just below the convergence threshold."""
    est = estimate_parameters(sys, mode="dense", omega=omega)
    ts = transform(sys, est.omega)
    thr = alpha_threshold(est.mu_max)
    above = spectral_radius(dense_iteration_matrix(ts, (1.0 + margin) * thr))
    below = spectral_radius(dense_iteration_matrix(ts, (1.0 - margin) * thr))
    return {
        "omega": est.omega,
        "threshold": thr,
        "rho_above": above,
        "rho_below": below,
        "passed": above < 1.0 <= below,
    }


def optimality_check(
    sys: BlockSystem,
    alpha_factors=None,
    omegas=None,
    tol: float = 1e-10,
) -> dict:
    """Dense ``rho(H)`` at the optimum against a grid of ``(alpha, omega)``.

    For every grid ``omega`` the ``alpha`` values are multiples of that
    rotation's convergence threshold.
    """
    if alpha_factors is None:
        alpha_factors = np.round(np.arange(101, 301) / 100.0, 2)
    if omegas is None:
        omegas = np.round(np.arange(1, 51) / 10.0, 1)
    est = estimate_parameters(sys, mode="dense")
    ts = transform(sys, est.omega_opt)
    rho_star = spectral_radius(dense_iteration_matrix(ts, est.alpha_opt))
    n = sys.n
    best = (np.inf, None, None)
    for w in omegas:
        tsw = transform(sys, w)
        thr = alpha_threshold(np.abs(s_spectrum(tsw)).max())
        split0 = Splitting(tsw, 1.0)
        M1 = split0.dense_M()
        Wt = tsw.Wt.toarray()
        for f in alpha_factors:
            a = f * thr
            M = M1.copy()
            M[n:, n:] = a * Wt
            N = split0.dense_N()
            N[n:, n:] = (a - 1.0) * Wt
            r = spectral_radius(np.linalg.solve(M, N))
            if r < best[0]:
                best = (r, float(a), float(w))
    return {
        "alpha_opt": est.alpha_opt,
        "omega_opt": est.omega_opt,
        "rho_dense": rho_star,
        "rho_formula": est.rho_opt,
        "formula_gap": abs(rho_star - est.rho_opt),
        "grid_min_rho": best[0],
        "grid_argmin": (best[1], best[2]),
        "passed": abs(rho_star - est.rho_opt) < tol and rho_star <= best[0] + tol,
    }


def verify_theory(sys: BlockSystem, alpha: float | None = None, omega: float | None = None) -> list[dict]:
    """Run the desk-scale spectral checks on one system.

    Returns one dict per check with at least ``name`` and ``passed``.
    """
    _guard(sys.n, 256)
    est = estimate_parameters(sys, mode="dense", omega=omega)
    w = est.omega
    a = est.alpha_opt if alpha is None else alpha
    ts = transform(sys, w)
    results = []

    eta = gen_eig_all(sys.W, sys.T)
    mu_mapped = np.sort(mu_from_eta(eta, w))
    mu_eig = np.linalg.eigvals(dense_S(ts))
    results.append({
        "name": "eigenvalue map eta -> mu",
        "gap": _multiset_gap(mu_eig, mu_mapped),
        "passed": _multiset_gap(mu_eig, mu_mapped) < 1e-8,
    })
    results.append({
        "name": "S has real spectrum",
        "max_imag": float(np.max(np.abs(mu_eig.imag))),
        "passed": float(np.max(np.abs(mu_eig.imag))) < 1e-10,
    })
    rs = rho_s(est.eta_min, est.eta_max, w)
    results.append({
        "name": "spectral radius of S",
        "formula": rs,
        "dense": float(np.max(np.abs(mu_eig))),
        "passed": abs(rs - np.max(np.abs(mu_eig))) < 1e-8,
    })
    results.append({"name": "iteration matrix spectrum", **iteration_spectrum_check(ts, a)})
    results.append({"name": "preconditioned spectrum", **precond_spectrum_check(ts, a)})
    thr = alpha_threshold(est.mu_max)
    above = spectral_radius(dense_iteration_matrix(ts, 1.01 * thr))
    below = spectral_radius(dense_iteration_matrix(ts, 0.99 * thr))
    results.append({
        "name": "convergence threshold",
        "threshold": thr,
        "rho_above": above,
        "rho_below": below,
        "passed": above < 1.0 <= below,
    })
    rho_dense = spectral_radius(dense_iteration_matrix(ts, est.alpha_opt))
    results.append({
        "name": "optimal convergence factor",
        "dense": rho_dense,
        "formula": est.rho_opt,
        "passed": abs(rho_dense - rho_h(est.mu_min, est.mu_max, est.alpha_opt)) < 1e-8,
    })
    return results
