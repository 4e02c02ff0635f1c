import numpy as np
import pytest
import scipy.sparse as sp

from neocc import AssignmentMatrix, DataMatrix

CASE_X = np.array([
    [0.05, 0.05, 0.05, 0.00, 0.00, 0.00],
    [0.05, 0.05, 0.05, 0.00, 0.00, 0.00],
    [0.04, 0.04, 0.04, 0.00, 0.04, 0.04],
    [0.04, 0.04, 0.00, 0.04, 0.04, 0.04],
    [0.00, 0.00, 0.00, 0.05, 0.05, 0.05],
    [0.00, 0.00, 0.00, 0.05, 0.05, 0.05],
    [0.00, 0.00, 0.30, 0.00, 0.00, 0.00],
])

_V_EXH = [[1, 0]] * 3 + [[0, 1]] * 3
_U_C = [[1, 0], [1, 0], [1, 1], [1, 1], [0, 1], [0, 1], [0, 0]]

# a 7x6 reference matrix and four (U, V) pairs with their known M objective values
CASE_CONFIGS = {
    "a": ([[1, 0], [1, 0], [1, 0], [0, 1], [0, 1], [0, 1], [1, 0]], _V_EXH, 0.0720),
    "b": ([[1, 0, 0], [1, 0, 0], [0, 1, 0], [0, 1, 0], [0, 0, 1], [0, 0, 1], [1, 0, 0]], _V_EXH, 0.0677),
    "c": (_U_C, _V_EXH, 0.0137),
    "d": (_U_C, [[1, 0], [1, 0], [0, 0], [0, 1], [0, 1], [0, 1]], 0.0102),
}


@pytest.fixture
def case_x():
    return DataMatrix(CASE_X)


def case_config(name):
    U, V, value = CASE_CONFIGS[name]
    return AssignmentMatrix(U), AssignmentMatrix(V), value


def random_assignment(rng, n, k, p=0.4):
    return AssignmentMatrix(rng.random((n, k)) < p)


def random_instance(rng, max_n=12, max_m=12, max_k=4, max_l=4, sparse=False, density=0.6):
    n = int(rng.integers(1, max_n + 1))
    m = int(rng.integers(1, max_m + 1))
    k = int(rng.integers(1, max_k + 1))
    l = int(rng.integers(1, max_l + 1))
    A = rng.normal(size=(n, m))
    A[rng.random((n, m)) > density] = 0.0
    X = DataMatrix(sp.csr_matrix(A)) if sparse else DataMatrix(A)
    return X, random_assignment(rng, n, k), random_assignment(rng, m, l)


# acceptance criteria report -------------------------------------------------

_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None and rep.when == "call":
        _ACCEPTANCE[marker.args[0]] = (marker.args[1], rep.outcome)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        title, outcome = _ACCEPTANCE[num]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"AC{num} {status}  {title}")
