import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from neocc import (
    AssignmentMatrix,
    DataMatrix,
    DuplicateAssignment,
    NeoParams,
    ValidationError,
    build_assignment,
    normalized_column,
    phase_budgets,
    validate,
)
from neocc.core import round_half_up


def test_build_disjoint_exhaustive():
    U = build_assignment(3, 2, [(0, 0), (1, 0), (2, 1)])
    assert U.cluster_sizes.tolist() == [2, 1]
    assert U.outliers.size == 0 and U.overlapping.size == 0
    assert U.total_assignments == 3


def test_build_overlap_and_outliers():
    U = build_assignment(3, 2, [(0, 0), (0, 1)])
    assert U.clusters_of(0).tolist() == [0, 1]
    assert U.overlapping.tolist() == [0]
    assert U.outliers.tolist() == [1, 2]


def test_build_out_of_range():
    with pytest.raises(IndexError):
        build_assignment(3, 2, [(0, 5)])
    with pytest.raises(IndexError):
        build_assignment(3, 2, [(-1, 0)])


def test_build_duplicate():
    with pytest.raises(DuplicateAssignment):
        build_assignment(3, 2, [(1, 1), (1, 1)])


def test_assignment_is_immutable():
    U = build_assignment(2, 2, [(0, 0)])
    with pytest.raises(ValueError):
        U.membership[0, 1] = True


def test_from_labels_round_trip():
    U = AssignmentMatrix.from_labels([[1], [], [0, 1]], n_clusters=3)
    assert U.labels() == [(1,), (), (0, 1)]
    assert U.n_clusters == 3


@settings(max_examples=60, deadline=None)
@given(arrays(np.bool_, st.tuples(st.integers(1, 15), st.integers(1, 6))))
def test_trace_count_identity(table):
    A = AssignmentMatrix(table)
    ones = int(table.sum())
    assert A.total_assignments == ones == int(A.cluster_sizes.sum())
    assert A.cluster_sizes.tolist() == table.sum(axis=0).tolist()
    ptr, ids = A.ragged()
    assert ptr[-1] == ones and ids.size == ones


def test_normalized_column_examples():
    A = build_assignment(4, 3, [(0, 0), (1, 0), (2, 1)])
    np.testing.assert_allclose(normalized_column(A, 0).values, [2 ** -0.5, 2 ** -0.5, 0, 0])
    np.testing.assert_array_equal(normalized_column(A, 1).values, [0, 0, 1, 0])
    np.testing.assert_array_equal(normalized_column(A, 2).values, np.zeros(4))
    with pytest.raises(IndexError):
        normalized_column(A, 3)


@settings(max_examples=60, deadline=None)
@given(arrays(np.bool_, st.tuples(st.integers(1, 20), st.integers(1, 4))), st.data())
def test_normalized_column_projector(table, data):
    A = AssignmentMatrix(table)
    c = data.draw(st.integers(0, A.n_clusters - 1))
    u = normalized_column(A, c).values
    assert set(np.flatnonzero(u)) == set(A.members(c))
    if A.cluster_sizes[c]:
        assert abs(u @ u - 1.0) <= 1e-12
        P = np.outer(u, u)
        np.testing.assert_allclose(P @ P, P, atol=1e-12)


def test_validate_ok():
    validate(NeoParams(k=2, l=2, alpha_r=0.1, beta_r=0.05), 100, 20)


def test_validate_budget_overflow():
    with pytest.raises(ValidationError) as e:
        validate(NeoParams(k=2, l=1, alpha_r=1.5), 10, 5)
    names = [v[0] for v in e.value.violations]
    assert "budget_r" in names
    assert "25" in str(e.value) and "20" in str(e.value)


def test_validate_beta_bound():
    with pytest.raises(ValidationError) as e:
        validate(NeoParams(k=2, l=2, beta_r=1.0), 10, 10)
    assert [v[0] for v in e.value.violations] == ["beta_r_range"]


def test_validate_collects_every_violation():
    with pytest.raises(ValidationError) as e:
        validate(NeoParams(k=20, l=2, alpha_c=-0.5, beta_c=0.1, objective="X"), 10, 10)
    names = {v[0] for v in e.value.violations}
    assert {"n>=k", "alpha_c>=-beta_c", "objective"} <= names


def test_negative_alpha_allowed():
    validate(NeoParams(k=2, l=2, alpha_c=-1 / 6, beta_c=1 / 6), 7, 6)
    assert phase_budgets(6, -1 / 6, 1 / 6) == (5, 0)


@pytest.mark.parametrize("x, expected", [(2.5, 3), (2.4999999, 2), ((1 - 1 / 3) * 3, 2), (0.5, 1), (0.0, 0)])
def test_round_half_up(x, expected):
    assert round_half_up(x) == expected


def test_case_study_budgets():
    # [n alpha_r] = [n beta_r] = 1 on 7 rows: 6 first-pass plus 2 extra
    assert phase_budgets(7, 1 / 7, 1 / 7) == (6, 2)


def test_data_matrix_rejects_nonfinite():
    with pytest.raises(ValueError):
        DataMatrix([[1.0, np.nan]])
    with pytest.raises(ValueError):
        DataMatrix(sp.csr_matrix(np.array([[np.inf, 0.0]])))
    with pytest.raises(ValueError):
        DataMatrix(np.zeros((0, 3)))


def test_data_matrix_dense_sparse_views():
    A = np.array([[0.0, 2.0], [3.0, 0.0], [0.0, 0.0]])
    d, s = DataMatrix(A), DataMatrix(sp.coo_matrix(A))
    assert d.storage_kind == "dense" and s.storage_kind == "sparse"
    np.testing.assert_array_equal(d.toarray(), s.toarray())
    assert d.nnz == s.nnz == 2
    np.testing.assert_array_equal(s.T.toarray(), A.T)
    indptr, indices, data = d.pattern()
    assert indptr[-1] == 6 and data.tolist() == A.ravel().tolist()


def test_package_doctest():
    import doctest

    import neocc
    failures, tried = doctest.testmod(neocc)
    assert tried > 0 and failures == 0
