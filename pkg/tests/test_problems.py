import json

import numpy as np
import pytest

from ssts.problems import (
    BlockSystem,
    example1,
    example2,
    generate,
    identity_system,
    laplacian_2d,
    laplacian_eigenvalues,
    load_system,
    save_system,
)
from ssts.sparse import identity


def test_laplacian_m2():
    K, h = laplacian_2d(2)
    assert h == pytest.approx(1 / 3)
    np.testing.assert_allclose(K.toarray() / h**2 @ np.ones(4), 18.0, rtol=1e-13)


@pytest.mark.parametrize("m", [2, 3, 5, 8])
def test_laplacian_eigenvalues_closed_form(m):
    K, _ = laplacian_2d(m)
    np.testing.assert_allclose(np.linalg.eigvalsh(K.toarray()), laplacian_eigenvalues(m), rtol=1e-12, atol=1e-14)


def test_example1_structure():
    m = 4
    sys = example1(m)
    h = 1 / (m + 1)
    K, _ = laplacian_2d(m)
    s3 = np.sqrt(3.0)
    np.testing.assert_allclose(sys.W.toarray(), K.toarray() + (3 - s3) * h * np.eye(m * m), atol=1e-15)
    np.testing.assert_allclose(sys.T.toarray(), K.toarray() + (3 + s3) * h * np.eye(m * m), atol=1e-15)
    j = np.arange(1, m * m + 1)
    np.testing.assert_allclose(sys.p, h * j / (1 + j) ** 2, rtol=1e-14)
    np.testing.assert_array_equal(sys.q, -sys.p)


def test_example1_generalized_extremes_m16():
    sys = example1(16)
    eta = np.linalg.eigvals(np.linalg.solve(sys.W.toarray(), sys.T.toarray())).real
    assert eta.min() == pytest.approx(1.025450727806848, rel=1e-10)
    assert eta.max() == pytest.approx(2.4280371180035214, rel=1e-10)


def test_example2_structure_and_rhs():
    m = 4
    sys = example2(m)
    h = 1 / (m + 1)
    K = laplacian_2d(m)[0].toarray()
    I = np.eye(m * m)
    W = K - np.pi**2 * h**2 * I
    T = 0.02 * K + 10 * np.pi * h**2 * I
    np.testing.assert_allclose(sys.W.toarray(), W, atol=1e-15)
    np.testing.assert_allclose(sys.T.toarray(), T, atol=1e-15)
    one = np.ones(m * m)
    np.testing.assert_allclose(sys.p, (W - T) @ one, atol=1e-14)
    np.testing.assert_allclose(sys.q, (W + T) @ one, atol=1e-14)
    assert np.linalg.eigvalsh(W).min() == pytest.approx(0.36914784645663584, rel=1e-10)


def test_example2_exact_solution_is_ones():
    sys = example2(6)
    z = np.linalg.solve(sys.dense_block(), sys.rhs)
    np.testing.assert_allclose(z[: sys.n], 1.0, rtol=1e-10)
    np.testing.assert_allclose(z[sys.n :], 1.0, rtol=1e-10)


@pytest.mark.parametrize("ex", [1, 2])
def test_sizes(ex):
    for m in (1, 2, 7):
        sys = generate(ex, m)
        assert sys.n == m * m and sys.p.shape == (m * m,)


def test_unknown_example():
    with pytest.raises(ValueError):
        generate(3, 4)


def test_block_system_rejects_bad_shapes():
    with pytest.raises(ValueError):
        BlockSystem(identity(2), identity(3), np.ones(2), np.ones(2))
    with pytest.raises(ValueError):
        BlockSystem(identity(2), identity(2), np.ones(3), np.ones(2))


def test_min_eig_sum_positive():
    assert example1(4).min_eig_sum() > 0
    assert identity_system(3).min_eig_sum() == pytest.approx(2.0)


@pytest.mark.parametrize("ex", [1, 2])
def test_save_load_round_trip(ex, tmp_path):
    sys = generate(ex, 5)
    paths = save_system(sys, tmp_path / "sub" / f"ex{ex}")
    assert [p.suffix for p in paths] == [".mtx", ".mtx", ".json"]
    meta = json.loads(paths[-1].read_text())
    assert meta["n"] == 25
    back = load_system(paths[-1])
    assert back.W == sys.W and back.T == sys.T
    np.testing.assert_array_equal(back.p, sys.p)
    np.testing.assert_array_equal(back.q, sys.q)
    assert back.descriptor == sys.descriptor
