"""NEO-CC-M and NEO-CC-RCM objectives.

Both objectives sum, over every (row cluster, column cluster) pair, the
squared residue of the co-cluster block. NEO-CC-M uses ``x - block mean``;
NEO-CC-RCM uses ``x - row-cluster mean - column-cluster mean + block mean``.
Rows and columns that belong to no cluster contribute nothing, overlapping
rows and columns contribute once per membership combination, and empty
clusters have zero means.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import AssignmentMatrix, DataMatrix

__all__ = [
    "CoClusterMeanTable",
    "ResidueBlock",
    "cocluster_means",
    "objective",
    "objective_m",
    "objective_rcm",
    "objective_m_elementwise",
    "objective_rcm_elementwise",
    "objective_rcm_literal",
    "block_objectives",
    "residue_rcm",
]


@dataclass(frozen=True)
class CoClusterMeanTable:
    means: np.ndarray        # (k, l)
    block_sums: np.ndarray   # (k, l)
    sizes: tuple[np.ndarray, np.ndarray]


@dataclass(frozen=True)
class ResidueBlock:
    pair: tuple[int, int]
    values: np.ndarray


def _check(X: DataMatrix, U: AssignmentMatrix, V: AssignmentMatrix) -> None:
    if U.n_points != X.n_rows:
        raise ValueError(f"U has {U.n_points} points but X has {X.n_rows} rows")
    if V.n_points != X.n_cols:
        raise ValueError(f"V has {V.n_points} points but X has {X.n_cols} columns")


def _safe_div(num, den):
    out = np.zeros(np.broadcast(num, den).shape)
    np.divide(num, den, out=out, where=den > 0)
    return out


def _xv(X: DataMatrix, V: AssignmentMatrix) -> np.ndarray:
    return np.asarray(X.raw @ V.as_float())


def _ux(X: DataMatrix, U: AssignmentMatrix) -> np.ndarray:
    return np.asarray((X.raw.T @ U.as_float()).T)


def cocluster_means(X: DataMatrix, U: AssignmentMatrix, V: AssignmentMatrix) -> CoClusterMeanTable:
    _check(X, U, V)
    S = U.as_float().T @ _xv(X, V)
    n_q, m_j = U.cluster_sizes, V.cluster_sizes
    mu = _safe_div(S, np.outer(n_q, m_j).astype(np.float64))
    return CoClusterMeanTable(means=mu, block_sums=S, sizes=(n_q.copy(), m_j.copy()))


def _block_terms_m(X, U, V):
    table = cocluster_means(X, U, V)
    mu = table.means
    acc, cnt = kernels.objective_m_terms(*X.pattern(), *U.ragged(), *V.ragged(), mu)
    # entries absent from sparse storage are zeros, each contributing mu^2
    full = np.outer(U.cluster_sizes, V.cluster_sizes)
    return acc + (full - cnt) * mu * mu


def _rcm_means(X, U, V):
    n_q, m_j = U.cluster_sizes, V.cluster_sizes
    rmean = _safe_div(_ux(X, U), n_q[:, None].astype(np.float64))
    xv = _xv(X, V)
    cmean = _safe_div(xv, m_j[None, :].astype(np.float64))
    S = U.as_float().T @ xv
    mu = _safe_div(S, np.outer(n_q, m_j).astype(np.float64))
    return rmean, cmean, mu


def _block_terms_rcm(X, U, V):
    _check(X, U, V)
    rmean, cmean, mu = _rcm_means(X, U, V)
    # ||H||^2 = <H, X> over the block because H has zero row and column sums
    return kernels.objective_rcm_terms(*X.pattern(), *U.ragged(), *V.ragged(), rmean, cmean, mu)


def block_objectives(X: DataMatrix, U: AssignmentMatrix, V: AssignmentMatrix, objective: str = "M") -> np.ndarray:
    """Per co-cluster contributions as a ``(k, l)`` table."""
    objective = objective.upper()
    if objective == "M":
        return _block_terms_m(X, U, V)
    if objective == "RCM":
        return _block_terms_rcm(X, U, V)
    raise ValueError(f"unknown objective {objective!r}")


def objective_m(X: DataMatrix, U: AssignmentMatrix, V: AssignmentMatrix) -> float:
    return max(float(_block_terms_m(X, U, V).sum()), 0.0)


def objective_rcm(X: DataMatrix, U: AssignmentMatrix, V: AssignmentMatrix) -> float:
    return max(float(_block_terms_rcm(X, U, V).sum()), 0.0)


def objective(X: DataMatrix, U: AssignmentMatrix, V: AssignmentMatrix, kind: str = "M") -> float:
    kind = kind.upper()
    if kind == "M":
        return objective_m(X, U, V)
    if kind == "RCM":
        return objective_rcm(X, U, V)
    raise ValueError(f"unknown objective {kind!r}")


def residue_rcm(X: DataMatrix, U: AssignmentMatrix, V: AssignmentMatrix, i: int, j: int) -> ResidueBlock:
    """Residue matrix ``(D(u_i) - u_i u_i^T/n_i) X (D(v_j) - v_j v_j^T/m_j)``.

    Nonzero only on rows of row cluster ``i`` and columns of column cluster
    ``j``; an empty cluster yields the all-zero block.
    """
    _check(X, U, V)
    if not (0 <= i < U.n_clusters and 0 <= j < V.n_clusters):
        raise IndexError(f"co-cluster ({i}, {j}) out of range")
    H = np.zeros(X.shape)
    rows, cols = U.members(i), V.members(j)
    if rows.size and cols.size:
        A = X.toarray()
        B = A[np.ix_(rows, cols)]
        H[np.ix_(rows, cols)] = B - B.mean(axis=0, keepdims=True) - B.mean(axis=1, keepdims=True) + B.mean()
    return ResidueBlock((i, j), H)


def objective_rcm_literal(X: DataMatrix, U: AssignmentMatrix, V: AssignmentMatrix) -> float:
    """Diagnostic only: the RCM matrix expression with unmasked mean terms.

    Subtracts ``u u^T X / n_i`` and ``X v v^T / m_j`` over the whole matrix,
    so residue leaks outside the co-cluster block. It does not match the
    element-wise RCM objective and the solver never optimizes it.
    """
    _check(X, U, V)
    A = X.toarray()
    total = 0.0
    for i in range(U.n_clusters):
        u = U.as_float()[:, i]
        nu = u.sum()
        P = np.outer(u, u) / nu if nu else np.zeros((u.size, u.size))
        for j in range(V.n_clusters):
            v = V.as_float()[:, j]
            mv = v.sum()
            Q = np.outer(v, v) / mv if mv else np.zeros((v.size, v.size))
            H = np.diag(u) @ A @ np.diag(v) - P @ A - A @ Q + P @ A @ Q
            total += float(np.sum(H * H))
    return total


# ----------------------------------------------------------------------------
# element-wise reference implementations (oracles)
# ----------------------------------------------------------------------------

def _brute_block_mean(A, rows, cols):
    s = 0.0
    for r in rows:
        for c in cols:
            s += A[r][c]
    return s / (len(rows) * len(cols))


def objective_m_elementwise(X: DataMatrix, U: AssignmentMatrix, V: AssignmentMatrix) -> float:
    """Direct loop over entries and membership combinations (slow; for testing)."""
    _check(X, U, V)
    A = X.toarray().tolist()
    f, g = U.labels(), V.labels()
    members_r = [list(U.members(c)) for c in range(U.n_clusters)]
    members_c = [list(V.members(c)) for c in range(V.n_clusters)]
    means = {}
    total = 0.0
    for i, fi in enumerate(f):
        if not fi:
            continue
        for j, gj in enumerate(g):
            if not gj:
                continue
            for q in gj:
                for p in fi:
                    if (p, q) not in means:
                        means[p, q] = _brute_block_mean(A, members_r[p], members_c[q])
                    d = A[i][j] - means[p, q]
                    total += d * d
    return total


def objective_rcm_elementwise(X: DataMatrix, U: AssignmentMatrix, V: AssignmentMatrix) -> float:
    _check(X, U, V)
    A = X.toarray().tolist()
    f, g = U.labels(), V.labels()
    members_r = [list(U.members(c)) for c in range(U.n_clusters)]
    members_c = [list(V.members(c)) for c in range(V.n_clusters)]
    means = {}
    total = 0.0
    for i, fi in enumerate(f):
        if not fi:
            continue
        for j, gj in enumerate(g):
            if not gj:
                continue
            for q in gj:
                cq = members_c[q]
                col_mean = sum(A[i][t] for t in cq) / len(cq)
                for p in fi:
                    cp = members_r[p]
                    row_mean = sum(A[s][j] for s in cp) / len(cp)
                    if (p, q) not in means:
                        means[p, q] = _brute_block_mean(A, cp, cq)
                    d = A[i][j] - row_mean - col_mean + means[p, q]
                    total += d * d
    return total
