import numpy as np
import pytest

from ssts.problems import example1, laplacian_2d
from ssts.sparse import build_from_triplets, identity
from ssts.spd import InnerSolveConfig, NotSPDError, cg_solve, factorize, make_inner_solver, solve
from ssts.transform import transform


def diag(*vals):
    return build_from_triplets(len(vals), [(i, i, v) for i, v in enumerate(vals)])


def test_identity_factor():
    F = factorize(identity(3))
    np.testing.assert_array_equal(F.L.toarray(), np.eye(3))
    np.testing.assert_array_equal(solve(F, [1.0, 2.0, 3.0]), [1, 2, 3])


def test_diagonal():
    np.testing.assert_allclose(solve(factorize(diag(4.0, 9.0)), [4.0, 9.0]), [1, 1])


def test_rotated_example1_matches_dense_lu(rng):
    ts = transform(example1(4), 0.657)
    F = factorize(ts.Wt)
    b = rng.standard_normal(ts.n)
    oracle = np.linalg.solve(ts.Wt.toarray(), b)
    np.testing.assert_allclose(F.solve(b), oracle, rtol=1e-10, atol=1e-12)


def test_not_spd_reports_index():
    with pytest.raises(NotSPDError) as err:
        factorize(diag(1.0, -1.0, 2.0))
    assert err.value.index == 1


def test_refactor_reproducible(rng):
    K, _ = laplacian_2d(6)
    b = rng.standard_normal(K.n_rows)
    x1 = factorize(K).solve(b)
    x2 = factorize(K).solve(b)
    np.testing.assert_array_equal(x1, x2)


def test_solve_dimension_mismatch():
    with pytest.raises(ValueError):
        factorize(identity(3)).solve(np.ones(4))


@pytest.mark.parametrize("m", [3, 6, 10])
def test_residual_small(m, rng):
    K, _ = laplacian_2d(m)
    x = rng.standard_normal(K.n_rows)
    b = K @ x
    y = factorize(K).solve(b)
    assert np.linalg.norm(K @ y - b) / np.linalg.norm(b) <= 1e-10
    np.testing.assert_allclose(y, x, rtol=1e-10)


def test_cg_identity_one_step():
    x, info = cg_solve(identity(5), np.arange(1.0, 6.0))
    np.testing.assert_allclose(x, np.arange(1.0, 6.0))
    assert info.iterations == 1 and info.converged


def test_cg_three_distinct_eigenvalues():
    x, info = cg_solve(diag(1.0, 2.0, 3.0), [1.0, 2.0, 3.0], InnerSolveConfig("cg", 1e-13))
    np.testing.assert_allclose(x, [1, 1, 1], rtol=1e-12)
    assert info.iterations <= 3


@pytest.mark.parametrize("k", range(1, 11))
def test_cg_iterations_bounded_by_distinct_eigenvalues(k, rng):
    vals = np.repeat(np.arange(1.0, k + 1.0), 3)
    A = diag(*vals)
    _, info = cg_solve(A, rng.standard_normal(vals.size), InnerSolveConfig("cg", 1e-12))
    assert info.converged
    assert info.iterations <= k


def test_cg_matches_direct(rng):
    K, _ = laplacian_2d(8)
    b = rng.standard_normal(K.n_rows)
    x, info = cg_solve(K, b, InnerSolveConfig("cg", 1e-12))
    np.testing.assert_allclose(x, factorize(K).solve(b), rtol=1e-10, atol=1e-12)


def test_cg_max_iterations_returns_best():
    K, _ = laplacian_2d(8)
    x, info = cg_solve(K, np.ones(K.n_rows), InnerSolveConfig("cg", 1e-13, cg_max_iters=2))
    assert not info.converged and info.iterations == 2
    assert np.all(np.isfinite(x))


def test_config_validation():
    with pytest.raises(ValueError):
        InnerSolveConfig("lu")
    with pytest.raises(ValueError):
        InnerSolveConfig("cg", cg_tol=1.5)
    with pytest.raises(ValueError):
        InnerSolveConfig("cg", cg_max_iters=0)


@pytest.mark.parametrize("ex", [1, 2])
@pytest.mark.parametrize("m", [4, 8, 16])
def test_direct_and_cg_agree_on_benchmarks(ex, m, rng):
    from ssts.problems import generate

    sys = generate(ex, m)
    b = rng.standard_normal(sys.n)
    for A in (sys.W, transform(sys, 1.0).Wt):
        xd = make_inner_solver(A).solve(b)
        xc = make_inner_solver(A, InnerSolveConfig("cg")).solve(b)
        np.testing.assert_allclose(xc, xd, rtol=1e-8, atol=1e-8 * np.abs(xd).max())
