import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssts.krylov import (
    GmresConfig,
    GmresReport,
    SSTSPreconditioner,
    _givens,
    gmres_restarted,
    original_operator,
    solve_gmres,
    ssts_precond_apply,
    transformed_operator,
)
from ssts.problems import example1, example2
from ssts.transform import Splitting, transform


def test_identity_operator_one_step():
    x, rep = gmres_restarted(lambda v: v, np.arange(1.0, 5.0))
    np.testing.assert_allclose(x, np.arange(1.0, 5.0))
    assert rep.label == "1(1)" and rep.converged and rep.total_inner == 1


def test_zero_rhs():
    x, rep = gmres_restarted(lambda v: 2 * v, np.zeros(3))
    assert rep.converged and rep.cycles == 0 and not x.any()


def test_diagonal_exact_in_k_steps():
    d = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    x, rep = gmres_restarted(lambda v: d * v, np.ones(5), cfg=GmresConfig(restart=10, tol=1e-12))
    np.testing.assert_allclose(x, 1 / d, rtol=1e-10)
    assert rep.total_inner <= 5


def test_label_arithmetic():
    rep = GmresReport(restart=10, cycles=5, inner_last=4, total_matvecs=0, precond_applications=0,
                      converged=True, true_residual=0.0)
    assert rep.total_inner == 44
    assert rep.to_dict()["label"] == "5(4)"


def test_givens_zeroes_second_component():
    for a, b in [(3.0, 4.0), (1 + 2j, -0.5j), (0.0, 2.0), (1.0, 0.0)]:
        c, s = _givens(a, b)
        assert abs(-np.conj(s) * a + c * b) < 1e-14
        assert abs(c) ** 2 + abs(s) ** 2 == pytest.approx(1.0)


@pytest.mark.parametrize("check", ["trigger", "every"])
def test_estimates_monotone_within_cycle(check):
    sys = example1(8)
    A, b = original_operator(sys, "complex")
    _, rep = gmres_restarted(A, b, cfg=GmresConfig(restart=10), check=check)
    assert rep.converged
    h = rep.residual_history
    # history is cycle-start value followed by one estimate per Arnoldi step
    k = 0
    while k < len(h):
        chunk = h[k : k + rep.restart + 1]
        assert all(b2 <= a2 * (1 + 1e-12) for a2, b2 in zip(chunk, chunk[1:]))
        k += rep.restart + 1


def test_true_residual_reported():
    sys = example1(8)
    x, y, rep = solve_gmres(sys)
    A, b = original_operator(sys, "complex")
    r = np.linalg.norm(b - A(x + 1j * y)) / np.linalg.norm(b)
    assert rep.converged and r < 1e-6
    assert rep.true_residual == pytest.approx(r, rel=1e-8)


def test_complex_and_real_forms_same_solution():
    sys = example2(4)
    cfg = GmresConfig(tol=1e-10)
    xc, yc, _ = solve_gmres(sys, form="complex", cfg=cfg)
    xr, yr, _ = solve_gmres(sys, form="real", cfg=GmresConfig(tol=1e-10, max_cycles=5000))
    np.testing.assert_allclose(xc, 1.0, atol=1e-7)
    np.testing.assert_allclose(yr, 1.0, atol=1e-7)
    np.testing.assert_allclose(xc, xr, atol=1e-7)


def test_original_and_transformed_operators():
    sys = example1(3)
    A, b = original_operator(sys, "real")
    z = np.linspace(-1, 1, 2 * sys.n)
    np.testing.assert_allclose(A(z), sys.dense_block() @ z)
    ts = transform(sys, 0.7)
    B, bt = transformed_operator(ts)
    np.testing.assert_allclose(B(z), ts.dense_block() @ z)
    with pytest.raises(ValueError):
        original_operator(sys, "quaternion")


def test_preconditioner_matches_dense_M():
    ts = transform(example1(4), 0.657)
    rng = np.random.default_rng(3)
    r, s = rng.standard_normal((2, ts.n))
    e, f = ssts_precond_apply(ts, 1.019, r, s)
    M = Splitting(ts, 1.019).dense_M()
    np.testing.assert_allclose(np.concatenate([e, f]), np.linalg.solve(M, np.concatenate([r, s])), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**31))
def test_preconditioner_linear(a, b, seed):
    P = SSTSPreconditioner(transform(example2(3), 1.3), 1.25)
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal((2, 2 * P.ts.n))
    lhs = P(a * u + b * v)
    rhs = a * P(u) + b * P(v)
    np.testing.assert_allclose(lhs, rhs, atol=1e-10 * (1 + np.abs(rhs).max()))


def test_preconditioner_counts():
    P = SSTSPreconditioner(transform(example1(3), 0.7), 1.0)
    P(np.ones(2 * P.ts.n))
    assert P.applications == 1 and P.solves == 2
    with pytest.raises(ValueError):
        P.apply(np.ones(3), np.ones(9))
    with pytest.raises(ValueError):
        SSTSPreconditioner(P.ts, -1.0)


def test_ssts_preconditioned_few_steps():
    sys = example1(8)
    x, y, rep = solve_gmres(sys, "ssts", 1.0116, 0.7018)
    assert rep.converged and rep.cycles == 1 and rep.inner_last <= 5
    assert rep.precond_applications >= rep.inner_last
    A, b = original_operator(sys, "complex")
    assert np.linalg.norm(b - A(x + 1j * y)) / np.linalg.norm(b) < 1e-5


def test_max_cycles_stops():
    sys = example1(8)
    _, _, rep = solve_gmres(sys, cfg=GmresConfig(restart=2, max_cycles=1))
    assert not rep.converged and rep.cycles == 1


def test_bad_arguments():
    with pytest.raises(ValueError):
        GmresConfig(restart=0)
    with pytest.raises(ValueError):
        solve_gmres(example1(2), "ssts")
    with pytest.raises(ValueError):
        solve_gmres(example1(2), "ilu")
    with pytest.raises(ValueError):
        gmres_restarted(lambda v: v, np.ones(2), check="sometimes")


@pytest.mark.parametrize("m", [2, 3, 4])
def test_preconditioned_steps_bounded_by_distinct_eigenvalues(m):
    sys = example1(m)
    a, w = 1.019, 0.657
    ts = transform(sys, w)
    G = np.linalg.solve(Splitting(ts, a).dense_M(), ts.dense_block())
    lam = np.sort(np.linalg.eigvals(G).real)
    distinct = 1 + int(np.sum(np.diff(lam) > 1e-8))
    _, _, rep = solve_gmres(sys, "ssts", a, w, GmresConfig(restart=50, tol=1e-10))
    assert rep.converged and rep.total_inner <= distinct
