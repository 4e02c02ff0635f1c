import numpy as np
import pytest

from neocc import kernels
from neocc._accel import NUMBA_AVAILABLE, backend
from neocc.objective import _rcm_means, cocluster_means

from conftest import random_instance

pytestmark = pytest.mark.skipif(not NUMBA_AVAILABLE, reason="numba not installed")


def _args(X, U, V):
    return (*X.pattern(), *U.ragged(), *V.ragged())


def test_backend_name():
    assert backend() in ("numba", "numpy")


def test_m_terms_parity():
    rng = np.random.default_rng(0)
    for t in range(40):
        X, U, V = random_instance(rng, max_n=40, max_m=20, sparse=bool(t % 2), density=0.4)
        mu = cocluster_means(X, U, V).means
        a1, c1 = kernels.objective_m_terms_np(*_args(X, U, V), mu)
        a2, c2 = kernels.objective_m_terms_nb(*_args(X, U, V), mu)
        np.testing.assert_array_equal(c1, c2)
        np.testing.assert_allclose(a1, a2, rtol=1e-12, atol=1e-12)


def test_rcm_terms_parity():
    rng = np.random.default_rng(1)
    for t in range(40):
        X, U, V = random_instance(rng, max_n=40, max_m=20, sparse=bool(t % 2), density=0.4)
        means = _rcm_means(X, U, V)
        a1 = kernels.objective_rcm_terms_np(*_args(X, U, V), *means)
        a2 = kernels.objective_rcm_terms_nb(*_args(X, U, V), *means)
        np.testing.assert_allclose(a1, a2, rtol=1e-12, atol=1e-12)


def test_greedy_parity_with_ties():
    rng = np.random.default_rng(2)
    for _ in range(100):
        n, k = int(rng.integers(1, 15)), int(rng.integers(1, 5))
        D = rng.integers(0, 4, size=(n, k)).astype(np.float64)
        n1 = int(rng.integers(0, n + 1))
        n2 = int(rng.integers(0, n * k - n1 + 1))
        p1, c1 = kernels.greedy_select_np(D, n1, n2)
        p2, c2 = kernels.greedy_select_nb(D, n1, n2)
        np.testing.assert_array_equal(p1, p2)
        np.testing.assert_array_equal(c1, c2)


def test_expand_entries_counts():
    rng = np.random.default_rng(3)
    X, U, V = random_instance(rng, max_n=10, max_m=10)
    x, s, t, i, j = kernels.expand_entries(*_args(X, U, V))
    A = X.toarray()
    np.testing.assert_array_equal(x, A[s, t])
    assert np.all(U.membership[s, i]) and np.all(V.membership[t, j])
    expected = sum(int(U.memberships_per_point()[p] * V.memberships_per_point()[q])
                   for p in range(A.shape[0]) for q in range(A.shape[1]))
    assert x.size == expected
