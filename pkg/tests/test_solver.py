import itertools

import numpy as np
import pytest

from neocc import (
    AssignmentMatrix,
    DataMatrix,
    InternalError,
    NeoParams,
    ValidationError,
    estimate_params,
    f1_score,
    greedy_assign,
    lemma1_check,
    neo_cc,
    neo_kmeans_oneway,
    objective,
    phase_budgets,
    seed_clusters,
)
from neocc.solver import (
    DistanceTable,
    col_distances,
    col_distances_definitional,
    col_distances_m,
    row_distances,
    row_distances_definitional,
    row_distances_m,
    row_distances_rcm,
)

from conftest import CASE_X, case_config, random_instance


def _pairs(U):
    return {(int(p), int(c)) for p, c in zip(*np.nonzero(U.membership))}


# distances -------------------------------------------------------------------

def test_constant_matrix_zero_distances():
    X = DataMatrix(np.full((5, 4), 3.0))
    U = AssignmentMatrix.from_labels([[0], [1], [0, 1], [1], [0]])
    V = AssignmentMatrix.from_labels([[0], [0], [1], [1]])
    for kind in ("M", "RCM"):
        assert np.abs(row_distances(X, U, V, kind).values).max() < 1e-12
        assert np.abs(col_distances(X, U, V, kind).values).max() < 1e-12


def test_identical_rows_rcm_constant_per_cluster():
    X = DataMatrix(np.tile([1.0, 4.0, -2.0, 0.0, 3.0], (6, 1)))
    U = AssignmentMatrix.from_labels([[0], [1], [2], [0], [1], [2]])
    V = AssignmentMatrix.from_labels([[0], [0], [1], [1], [1]])
    d = row_distances_rcm(X, U, V).values
    np.testing.assert_allclose(d, np.broadcast_to(d[0], d.shape), atol=1e-12)
    assert greedy_assign(d, 0.0, 0.0).labels() == [(0,)] * 6


def test_single_cocluster_rcm_definitional():
    rng = np.random.default_rng(0)
    X = DataMatrix(rng.normal(size=(6, 5)))
    one_r = AssignmentMatrix(np.ones((6, 1), dtype=bool))
    one_c = AssignmentMatrix(np.ones((5, 1), dtype=bool))
    np.testing.assert_allclose(row_distances_rcm(X, one_r, one_c).values,
                               row_distances_definitional(X, one_r, one_c, "RCM").values, atol=1e-9)


def test_distances_match_definitions():
    rng = np.random.default_rng(1)
    for t in range(40):
        X, U, V = random_instance(rng, max_n=8, max_m=7, sparse=bool(t % 2))
        for kind in ("M", "RCM"):
            np.testing.assert_allclose(row_distances(X, U, V, kind).values,
                                       row_distances_definitional(X, U, V, kind).values, atol=1e-9, rtol=1e-9)
            np.testing.assert_allclose(col_distances(X, U, V, kind).values,
                                       col_distances_definitional(X, U, V, kind).values, atol=1e-9, rtol=1e-9)


def test_col_distances_are_transposed_row_distances():
    rng = np.random.default_rng(2)
    for _ in range(20):
        X, U, V = random_instance(rng)
        np.testing.assert_allclose(col_distances_m(X, U, V).values, row_distances_m(X.T, V, U).values,
                                   rtol=1e-12, atol=1e-12)


def test_distance_tables_nonnegative():
    rng = np.random.default_rng(3)
    for _ in range(30):
        X, U, V = random_instance(rng)
        for kind in ("M", "RCM"):
            assert row_distances(X, U, V, kind).values.min() >= 0.0
            assert col_distances(X, U, V, kind).values.min() >= 0.0


# greedy assignment -------------------------------------------------------------

def test_greedy_overlap_example():
    U = greedy_assign([[1, 5], [2, 6], [4, 3]], 1 / 3, 0.0)
    assert _pairs(U) == {(0, 0), (1, 0), (2, 1), (2, 0)}


def test_greedy_outlier_example():
    U = greedy_assign([[1, 5], [2, 6], [9, 8]], 0.0, 1 / 3)
    assert _pairs(U) == {(0, 0), (1, 0), (0, 1)}
    assert U.outliers.tolist() == [2]


def test_greedy_zero_budget_is_argmin():
    rng = np.random.default_rng(4)
    D = rng.random((12, 4))
    U = greedy_assign(DistanceTable(D, "row"), 0.0, 0.0)
    assert [lab[0] for lab in U.labels()] == np.argmin(D, axis=1).tolist()


def test_greedy_tie_breaking():
    U = greedy_assign(np.zeros((3, 3)), 0.0, 1 / 3)
    # two distinct points (lowest indices) and one extra pair in row-major order
    assert _pairs(U) == {(0, 0), (1, 0), (0, 1)}


def test_greedy_rejects_bad_budget():
    with pytest.raises(ValidationError):
        greedy_assign(np.zeros((2, 1)), 1.0, 0.0)
    with pytest.raises(ValidationError):
        greedy_assign(np.zeros((2, 2)), 0.0, 1.0)
    with pytest.raises(ValidationError):
        greedy_assign(np.zeros((4, 2)), -0.5, 0.25)


def _brute_force_best(D, n1, n2):
    """Cheapest assignment with n1 distinct points in their argmin plus n2 other pairs."""
    n, k = D.shape
    best = np.argmin(D, axis=1)
    first_best = np.inf
    result = np.inf
    for first in itertools.combinations(range(n), n1):
        cost1 = D[list(first), best[list(first)]].sum()
        if cost1 > first_best + 1e-12:
            continue
        first_best = min(first_best, cost1)
        taken = {(p, best[p]) for p in first}
        rest = sorted(D[p, c] for p in range(n) for c in range(k) if (p, c) not in taken)
        result = min(result, cost1 + sum(rest[:n2]))
    return first_best, result


def test_greedy_phase_costs_are_minimal():
    rng = np.random.default_rng(5)
    for _ in range(60):
        n, k = int(rng.integers(1, 7)), int(rng.integers(1, 4))
        D = rng.random((n, k))
        beta = float(rng.choice([0.0, 1 / n])) if n > 1 else 0.0
        alpha = float(rng.uniform(-beta, k - 1))
        n1, n2 = phase_budgets(n, alpha, beta)
        if n1 + n2 > n * k:
            continue
        U = greedy_assign(D, alpha, beta)
        assert U.total_assignments == n1 + n2
        total = float((D * U.membership).sum())
        _, best_total = _brute_force_best(D, n1, n2)
        assert total <= best_total + 1e-12


# main loop ---------------------------------------------------------------------

def test_case_study_descent_from_a():
    X = DataMatrix(CASE_X)
    U, V, start = case_config("a")
    params = NeoParams(k=2, l=2, alpha_r=1 / 7, beta_r=1 / 7)
    res = neo_cc(X, params, init=(U, V))
    assert res.objective <= 0.0720
    assert all(b <= a + 1e-12 for a, b in zip(res.trace, res.trace[1:]))


def test_case_study_budgets_d_reach_reported_value():
    X = DataMatrix(CASE_X)
    U, V, _ = case_config("a")
    params = NeoParams(k=2, l=2, alpha_r=1 / 7, beta_r=1 / 7, alpha_c=-1 / 6, beta_c=1 / 6)
    res = neo_cc(X, params, init=(U, V))
    assert abs(res.objective - 0.0102) <= 5e-5


def test_t_max_zero_returns_init():
    rng = np.random.default_rng(6)
    X, U, V = random_instance(rng, max_n=10, max_m=10)
    res = neo_cc(X, NeoParams(k=U.n_clusters, l=V.n_clusters, t_max=0), init=(U, V))
    assert res.U == U and res.V == V
    assert res.trace == [objective(X, U, V)] and res.iterations == 0 and not res.converged


def test_init_shape_checked():
    X = DataMatrix(np.ones((4, 3)))
    with pytest.raises(ValueError):
        neo_cc(X, NeoParams(k=2, l=2), init=(AssignmentMatrix.identity(4), AssignmentMatrix.identity(3)))


def test_invalid_params_rejected():
    with pytest.raises(ValidationError):
        neo_cc(DataMatrix(np.ones((3, 3))), NeoParams(k=5, l=1))


def test_run_is_deterministic():
    rng = np.random.default_rng(7)
    X = DataMatrix(rng.normal(size=(25, 18)))
    p = NeoParams(k=3, l=3, alpha_r=0.1, beta_r=0.05, alpha_c=0.0, beta_c=0.1, objective="RCM", seed=4)
    a, b = neo_cc(X, p), neo_cc(X, p)
    assert a.U == b.U and a.V == b.V and a.trace == b.trace


def test_transpose_duality_of_initial_state():
    rng = np.random.default_rng(8)
    X = DataMatrix(rng.normal(size=(12, 9)))
    p = NeoParams(k=3, l=2, alpha_r=0.1, beta_r=0.1, alpha_c=0.2, beta_c=0.0, t_max=0, seed=1)
    a, b = neo_cc(X, p), neo_cc(X.T, p.swapped())
    assert a.U == b.V and a.V == b.U
    assert a.trace == pytest.approx(b.trace, rel=1e-12)


def test_nonfinite_objective_raises(monkeypatch):
    import neocc.solver as solver
    X = DataMatrix(np.eye(4))
    monkeypatch.setattr(solver, "_objective", lambda *a: float("nan"))
    with pytest.raises(InternalError):
        solver.neo_cc(X, NeoParams(k=2, l=2, t_max=3))


def test_converges_flag_and_tol():
    X = DataMatrix(np.kron(np.eye(2), np.ones((4, 3))))
    res = neo_cc(X, NeoParams(k=2, l=2, tol=0.0))
    assert res.converged and res.objective == pytest.approx(0.0, abs=1e-12)


# initialization -----------------------------------------------------------------

def test_seed_k_equals_n_and_one():
    rng = np.random.default_rng(9)
    X = DataMatrix(rng.normal(size=(6, 3)))
    assert np.all(seed_clusters(X, 6, 0).cluster_sizes == 1)
    assert seed_clusters(X, 1, 0).cluster_sizes.tolist() == [6]
    with pytest.raises(ValidationError):
        seed_clusters(X, 7, 0)


def test_seed_duplicates_still_fill_clusters():
    X = DataMatrix(np.ones((5, 2)))
    assert np.all(seed_clusters(X, 5, 3).cluster_sizes == 1)


def test_seed_deterministic():
    rng = np.random.default_rng(10)
    X = DataMatrix(rng.normal(size=(40, 5)))
    first = seed_clusters(X, 4, 12)
    assert all(seed_clusters(X, 4, 12) == first for _ in range(3))
    assert np.all(first.memberships_per_point() == 1)


def test_oneway_recovers_two_blobs():
    for seed in range(10):
        rng = np.random.default_rng(100 + seed)
        A = np.vstack([rng.normal(0.0, 0.3, size=(20, 4)), rng.normal(8.0, 0.3, size=(20, 4))])
        truth = [set(range(20)), set(range(20, 40))]
        U = neo_kmeans_oneway(DataMatrix(A), 2, seed=seed)
        assert f1_score(U, truth) == 1.0


def test_oneway_single_cluster():
    X = DataMatrix(np.random.default_rng(0).normal(size=(7, 2)))
    assert neo_kmeans_oneway(X, 1).cluster_sizes.tolist() == [7]


def test_oneway_budget_respected():
    X = DataMatrix(np.random.default_rng(1).normal(size=(30, 3)))
    U = neo_kmeans_oneway(X, 3, alpha=0.1, beta=0.1)
    assert U.total_assignments == sum(phase_budgets(30, 0.1, 0.1))
    assert U.outliers.size <= 3


# parameter estimation -------------------------------------------------------------

def test_estimate_zero_variance():
    assert estimate_params(DataMatrix(np.ones((10, 6))), 2, 2) == (0.0, 0.0, 0.0, 0.0)


def test_estimate_identical_blobs_overlap():
    rng = np.random.default_rng(2)
    A = rng.normal(size=(40, 5))
    a_r, _, _, _ = estimate_params(DataMatrix(A), 2, 1)
    assert a_r > 0.0


def test_estimate_planted_outliers():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        A = rng.normal(size=(100, 8))
        out = rng.choice(100, size=6, replace=False)
        A[out] += 10.0 * rng.choice([-1.0, 1.0], size=(6, 8))
        _, beta_r, _, _ = estimate_params(DataMatrix(A), 1, 1, seed=seed)
        assert abs(beta_r * 100 - 6) <= 1


def test_estimate_rejects_k_above_n():
    with pytest.raises(ValidationError):
        estimate_params(DataMatrix(np.ones((3, 3))), 4, 1)


# projected-mean minimizer ----------------------------------------------------------------------------

def test_lemma1_single_point_identity():
    assert lemma1_check([[1.0, -2.0, 3.0]], [1.0], np.eye(3))


def test_lemma1_zero_projector():
    assert lemma1_check(np.ones((3, 2)), [1.0, 2.0, 3.0], np.zeros((2, 2)))


def test_lemma1_random():
    rng = np.random.default_rng(3)
    v = np.array([1.0, 1.0, 0.0, 1.0]) / np.sqrt(3)
    assert lemma1_check(rng.normal(size=(5, 4)), rng.uniform(0.5, 2, size=5), np.outer(v, v))


def test_lemma1_rejects_non_projector():
    with pytest.raises(ValueError):
        lemma1_check(np.ones((2, 2)), [1.0, 1.0], np.array([[2.0, 0.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        lemma1_check(np.ones((2, 2)), [1.0, 0.0], np.eye(2))
