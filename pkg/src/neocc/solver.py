"""Alternating NEO-CC solver.

Each iteration recomputes point-to-cluster distances for the rows, reassigns
them with a two-pass greedy rule, then does the same for the columns. The
objective never increases from one iteration to the next.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import (
    AssignmentMatrix,
    DataMatrix,
    NeoParams,
    ValidationError,
    phase_budgets,
    validate,
)
from .objective import objective as _objective

__all__ = [
    "DistanceTable",
    "CoClusterResult",
    "InternalError",
    "row_distances_m",
    "row_distances_rcm",
    "col_distances_m",
    "col_distances_rcm",
    "row_distances",
    "col_distances",
    "row_distances_definitional",
    "col_distances_definitional",
    "greedy_assign",
    "neo_cc",
    "neo_kmeans_oneway",
    "seed_clusters",
    "estimate_params",
    "lemma1_check",
]

log = logging.getLogger(__name__)


class InternalError(RuntimeError):
    pass


@dataclass(frozen=True)
class DistanceTable:
    values: np.ndarray
    side: str = "row"

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass
class CoClusterResult:
    U: AssignmentMatrix
    V: AssignmentMatrix
    trace: list[float]
    iterations: int
    converged: bool
    params_used: NeoParams
    row_outliers: np.ndarray = field(init=False)
    col_outliers: np.ndarray = field(init=False)

    def __post_init__(self):
        self.row_outliers = self.U.outliers
        self.col_outliers = self.V.outliers

    @property
    def objective(self) -> float:
        return self.trace[-1]


# ----------------------------------------------------------------------------
# distance tables
# ----------------------------------------------------------------------------

def _div(num, den):
    out = np.zeros(np.broadcast(num, den).shape)
    np.divide(num, den, out=out, where=den > 0)
    return out


def _check_dims(X, U, V):
    if U.n_points != X.n_rows or V.n_points != X.n_cols:
        raise ValueError(
            f"assignment shapes {U.shape}/{V.shape} do not match data matrix {X.shape}"
        )


def _finish(d, side):
    np.maximum(d, 0.0, out=d)
    return DistanceTable(d, side)


def row_distances_m(X: DataMatrix, U: AssignmentMatrix, V: AssignmentMatrix) -> DistanceTable:
    """``d[p, q] = sum_j sum_{t in C_j} (x_pt - mu_qj)^2``.

    Evaluated as ``sum_j sq_pj - 2 rs_pj mu_qj + m_j mu_qj^2`` from per-point
    column-cluster sums, never touching the ``n x k x m`` expansion.
    """
    _check_dims(X, U, V)
    Vf = V.as_float()
    m_j = V.cluster_sizes.astype(np.float64)
    rs = np.asarray(X.raw @ Vf)
    sq = np.asarray(X.squared().raw @ Vf)
    mu = _div(U.as_float().T @ rs, np.outer(U.cluster_sizes, m_j))
    d = sq.sum(axis=1)[:, None] - 2.0 * rs @ mu.T + ((mu * mu) @ m_j)[None, :]
    return _finish(d, "row")


def row_distances_rcm(X: DataMatrix, U: AssignmentMatrix, V: AssignmentMatrix) -> DistanceTable:
    """Row distances for the row-and-column-mean residue.

    ``d[p, q] = sum_j sum_{t in C_j} (x_pt - c_pj - r_qt + mu_qj)^2`` with
    ``c_pj`` the mean of row ``p`` over column cluster ``j`` and ``r_qt`` the
    mean of column ``t`` over row cluster ``q``.
    """
    _check_dims(X, U, V)
    Vf = V.as_float()
    m_j = V.cluster_sizes.astype(np.float64)
    n_q = U.cluster_sizes.astype(np.float64)
    rs = np.asarray(X.raw @ Vf)
    sq = np.asarray(X.squared().raw @ Vf)
    R = _div(np.asarray((X.raw.T @ U.as_float()).T), n_q[:, None])
    mu = _div(U.as_float().T @ rs, np.outer(n_q, m_j))
    g = V.memberships_per_point().astype(np.float64)
    own = (sq - _div(rs * rs, m_j[None, :])).sum(axis=1)
    cross = np.asarray(X.raw @ (g[:, None] * R.T)) - rs @ mu.T
    spread = ((R * R) @ Vf - mu * mu * m_j[None, :]).sum(axis=1)
    d = own[:, None] - 2.0 * cross + spread[None, :]
    return _finish(d, "row")


def col_distances_m(X: DataMatrix, U: AssignmentMatrix, V: AssignmentMatrix) -> DistanceTable:
    t = row_distances_m(X.T, V, U)
    return DistanceTable(t.values, "col")


def col_distances_rcm(X: DataMatrix, U: AssignmentMatrix, V: AssignmentMatrix) -> DistanceTable:
    t = row_distances_rcm(X.T, V, U)
    return DistanceTable(t.values, "col")


def row_distances(X, U, V, objective: str = "M") -> DistanceTable:
    return row_distances_m(X, U, V) if objective.upper() == "M" else row_distances_rcm(X, U, V)


def col_distances(X, U, V, objective: str = "M") -> DistanceTable:
    return col_distances_m(X, U, V) if objective.upper() == "M" else col_distances_rcm(X, U, V)


def _normalized(A: AssignmentMatrix) -> np.ndarray:
    return _div(A.as_float(), np.sqrt(A.cluster_sizes.astype(np.float64))[None, :])


def row_distances_definitional(X: DataMatrix, U: AssignmentMatrix, V: AssignmentMatrix,
                               objective: str = "M") -> DistanceTable:
    """Literal dense evaluation of the row distance formulas (slow; oracle)."""
    _check_dims(X, U, V)
    A = X.toarray()
    n, m = A.shape
    Uh, Vh = _normalized(U), _normalized(V)
    Vb = V.as_float()
    rcm = objective.upper() == "RCM"
    d = np.zeros((n, U.n_clusters))
    for j in range(V.n_clusters):
        P = np.outer(Vh[:, j], Vh[:, j])
        Dv = np.diag(Vb[:, j])
        left_op = Dv - P if rcm else Dv
        right_op = Dv - P if rcm else P
        for q in range(U.n_clusters):
            size = U.cluster_sizes[q]
            center = (Uh[:, q] @ A @ right_op) / math.sqrt(size) if size else np.zeros(m)
            for p in range(n):
                diff = A[p] @ left_op - center
                d[p, q] += diff @ diff
    return DistanceTable(d, "row")


def col_distances_definitional(X: DataMatrix, U: AssignmentMatrix, V: AssignmentMatrix,
                               objective: str = "M") -> DistanceTable:
    """Literal dense evaluation of the column distance formulas (slow; oracle)."""
    _check_dims(X, U, V)
    A = X.toarray()
    n, m = A.shape
    Uh, Vh = _normalized(U), _normalized(V)
    Ub = U.as_float()
    rcm = objective.upper() == "RCM"
    d = np.zeros((m, V.n_clusters))
    for i in range(U.n_clusters):
        P = np.outer(Uh[:, i], Uh[:, i])
        Du = np.diag(Ub[:, i])
        left_op = Du - P if rcm else Du
        right_op = Du - P if rcm else P
        for q in range(V.n_clusters):
            size = V.cluster_sizes[q]
            center = (right_op @ A @ Vh[:, q]) / math.sqrt(size) if size else np.zeros(n)
            for p in range(m):
                diff = left_op @ A[:, p] - center
                d[p, q] += diff @ diff
    return DistanceTable(d, "col")


# ----------------------------------------------------------------------------
# assignment
# ----------------------------------------------------------------------------

def greedy_assign(D, alpha: float, beta: float) -> AssignmentMatrix:
    """Two-pass greedy assignment from a distance table.

    The first pass gives ``round((1-beta) n)`` distinct points their closest
    cluster, cheapest points first. The second pass adds the
    ``round((alpha+beta) n)`` smallest distances among (point, cluster)
    pairs not yet taken; a point may gain several clusters this way.
    Ties go to the lower point index, then the lower cluster index.
    """
    values = D.values if isinstance(D, DistanceTable) else np.asarray(D, dtype=np.float64)
    n, k = values.shape
    problems = []
    if not 0.0 <= beta < 1.0:
        problems.append(("beta_range", f"need 0 <= beta < 1, got {beta}"))
    if alpha < -beta:
        problems.append(("alpha>=-beta", f"need alpha >= -beta, got {alpha}"))
    if not problems:
        n1, n2 = phase_budgets(n, alpha, beta)
        if n1 + n2 > n * k:
            problems.append(("budget", f"{n1}+{n2} assignments exceed {n}x{k} table"))
    if problems:
        raise ValidationError(problems)
    if not np.all(np.isfinite(values)):
        raise ValueError("distance table contains non-finite values")
    pts, cls = kernels.greedy_select(np.ascontiguousarray(values), n1, n2)
    table = np.zeros((n, k), dtype=np.bool_)
    table[pts, cls] = True
    return AssignmentMatrix(table)


# ----------------------------------------------------------------------------
# main loop
# ----------------------------------------------------------------------------

def _converged(prev: float, cur: float, tol: float) -> bool:
    change = abs(prev - cur)
    return change == 0.0 or change < tol * abs(prev)


def neo_cc(X: DataMatrix, params: NeoParams, init=None) -> CoClusterResult:
    """Run the alternating row/column updates until the objective settles.

    ``init`` is an optional ``(U, V)`` pair; by default both sides start from
    one-way non-exhaustive overlapping k-means on ``X`` and ``X.T``.
    """
    if not isinstance(X, DataMatrix):
        X = DataMatrix(X)
    n, m = X.shape
    validate(params, n, m)
    if init is None:
        U = neo_kmeans_oneway(X, params.k, params.alpha_r, params.beta_r, params.seed)
        V = neo_kmeans_oneway(X.T, params.l, params.alpha_c, params.beta_c, params.seed)
    else:
        U, V = init
        if U.shape != (n, params.k) or V.shape != (m, params.l):
            raise ValueError(
                f"init shapes {U.shape}, {V.shape} do not match ({n}, {params.k}), ({m}, {params.l})"
            )
    kind = params.objective
    trace = [_objective(X, U, V, kind)]
    converged = False
    t = 0
    while t < params.t_max:
        U = greedy_assign(row_distances(X, U, V, kind), params.alpha_r, params.beta_r)
        V = greedy_assign(col_distances(X, U, V, kind), params.alpha_c, params.beta_c)
        value = _objective(X, U, V, kind)
        if not math.isfinite(value):
            raise InternalError(f"objective became non-finite at iteration {t + 1}")
        t += 1
        trace.append(value)
        log.debug("iteration %d objective %.10g", t, value)
        if _converged(trace[-2], value, params.tol):
            converged = True
            break
    return CoClusterResult(U=U, V=V, trace=trace, iterations=t, converged=converged, params_used=params)


# ----------------------------------------------------------------------------
# initialization and parameter estimation
# ----------------------------------------------------------------------------

def _row_sqnorms(X: DataMatrix) -> np.ndarray:
    return np.asarray(X.squared().raw.sum(axis=1)).ravel()


def _centroid_distances(X: DataMatrix, U: AssignmentMatrix, sqn=None) -> np.ndarray:
    # same values as row_distances_m(X, U, identity) without the m x m identity
    if sqn is None:
        sqn = _row_sqnorms(X)
    C = _div(np.asarray((X.raw.T @ U.as_float()).T), U.cluster_sizes[:, None].astype(np.float64))
    d = sqn[:, None] - 2.0 * np.asarray(X.raw @ C.T) + (C * C).sum(axis=1)[None, :]
    return np.maximum(d, 0.0)


def seed_clusters(X: DataMatrix, k: int, seed: int = 0) -> AssignmentMatrix:
    """Disjoint exhaustive seeding: D^2-weighted center sampling, then nearest center.

    Cluster ``c`` is the ``c``-th sampled center; every center keeps its own
    point, so ``k == n`` gives singletons.
    """
    if not isinstance(X, DataMatrix):
        X = DataMatrix(X)
    n = X.n_rows
    if not 1 <= k <= n:
        raise ValidationError([("n>=k", f"cannot seed {k} clusters from {n} points")])
    rng = np.random.default_rng(seed)
    n_trials = 2 + int(math.log(k))
    sqn = _row_sqnorms(X)
    raw = X.raw

    def dist_to(c):
        xc = raw[c].toarray().ravel() if X.is_sparse else raw[c]
        return np.maximum(sqn - 2.0 * np.asarray(raw @ xc).ravel() + sqn[c], 0.0)

    centers = [int(rng.integers(n))]
    chosen = np.zeros(n, dtype=np.bool_)
    chosen[centers[0]] = True
    cols = [dist_to(centers[0])]
    d2 = cols[0].copy()
    for _ in range(1, k):
        w = np.where(chosen, 0.0, d2)
        total = w.sum()
        if total > 0.0 and math.isfinite(total):
            # several D^2-weighted candidates; keep the one lowering the potential most
            draws = rng.random(n_trials) * total
            cand = np.minimum(np.searchsorted(np.cumsum(w), draws, side="right"), n - 1)
            best_c, best_d, best_pot = -1, None, math.inf
            for c in cand:
                dc = dist_to(int(c))
                pot = np.minimum(d2, dc).sum()
                if pot < best_pot:
                    best_c, best_d, best_pot = int(c), dc, pot
            c, dc = best_c, best_d
        else:
            free = np.flatnonzero(~chosen)
            c = int(free[rng.integers(free.size)])
            dc = dist_to(c)
        centers.append(c)
        chosen[c] = True
        cols.append(dc)
        np.minimum(d2, dc, out=d2)
    labels = np.argmin(np.column_stack(cols), axis=1)
    labels[centers] = np.arange(k)
    table = np.zeros((n, k), dtype=np.bool_)
    table[np.arange(n), labels] = True
    return AssignmentMatrix(table)


def _oneway(X, k, alpha, beta, seed, t_max, tol, init=None):
    U = seed_clusters(X, k, seed) if init is None else init
    sqn = _row_sqnorms(X)
    D = _centroid_distances(X, U, sqn)
    trace = [float((D * U.membership).sum())]
    for _ in range(t_max):
        U = greedy_assign(D, alpha, beta)
        D = _centroid_distances(X, U, sqn)
        trace.append(float((D * U.membership).sum()))
        if _converged(trace[-2], trace[-1], tol):
            break
    return U, trace


def neo_kmeans_oneway(X: DataMatrix, k: int, alpha: float = 0.0, beta: float = 0.0, seed: int = 0,
                      t_max: int = 100, tol: float = 1e-6) -> AssignmentMatrix:
    """One-way non-exhaustive overlapping k-means on the rows of ``X``.

    This is the co-clustering loop with the column clustering pinned to the
    identity (every column its own cluster) and only the rows updated.
    Call it on ``X.T`` for a column-side clustering.
    """
    if not isinstance(X, DataMatrix):
        X = DataMatrix(X)
    validate(NeoParams(k=k, l=1, alpha_r=alpha, beta_r=beta), X.n_rows, 1)
    return _oneway(X, k, alpha, beta, seed, t_max, tol)[0]


def _estimate_side(X: DataMatrix, k: int, delta: float, gamma: float, seed: int):
    U = neo_kmeans_oneway(X, k, 0.0, 0.0, seed)
    d = np.sqrt(_centroid_distances(X, U))
    closest = d.min(axis=1)
    if np.ptp(d) == 0.0:
        return 0.0, 0.0
    mean, std = closest.mean(), closest.std()
    beta = float(np.count_nonzero(closest > mean + delta * std)) / X.n_rows
    near = (d <= gamma * closest[:, None]).sum(axis=1) - 1
    alpha = float(np.maximum(near, 0).mean())
    # keep the estimate admissible: beta < 1 and the budget fits in the table
    beta = min(beta, (X.n_rows - 1) / X.n_rows)
    alpha = min(alpha, float(k - 1))
    return alpha, beta


def estimate_params(X: DataMatrix, k: int, l: int, delta: float = 3.0, gamma: float = 1.2,
                    seed: int = 0) -> tuple[float, float, float, float]:
    """Heuristic ``(alpha_r, beta_r, alpha_c, beta_c)`` from a disjoint clustering per side.

    ``beta`` is the fraction of points whose distance to their closest
    centroid exceeds ``mean + delta * std`` of those distances; ``alpha`` is
    the mean number of further centroids within ``gamma`` times the closest
    distance. Distances are Euclidean.
    """
    if not isinstance(X, DataMatrix):
        X = DataMatrix(X)
    validate(NeoParams(k=k, l=l), X.n_rows, X.n_cols)
    alpha_r, beta_r = _estimate_side(X, k, delta, gamma, seed)
    alpha_c, beta_c = _estimate_side(X.T, l, delta, gamma, seed)
    return alpha_r, beta_r, alpha_c, beta_c


# ----------------------------------------------------------------------------
# minimizer property behind the monotone-descent argument
# ----------------------------------------------------------------------------

def lemma1_check(points, weights, M, n_perturb: int = 100, eps: float = 1e-3, seed: int = 0) -> bool:
    """Numerically confirm the weighted projected-mean minimizer.

    For ``h(z) = sum_i w_i ||a_i - c z M||^2`` with ``c = 1/sqrt(sum w)`` and
    ``M M^T = M``, the point ``z* = sum_i w_i a_i / sqrt(sum w)`` satisfies
    ``sqrt(sum w) M z*^T = M sum_i w_i a_i^T`` and no random perturbation of
    size ``eps`` lowers ``h``.
    """
    A = np.atleast_2d(np.asarray(points, dtype=np.float64))
    w = np.asarray(weights, dtype=np.float64).ravel()
    M = np.asarray(M, dtype=np.float64)
    if w.size != A.shape[0] or np.any(w <= 0):
        raise ValueError("weights must be positive, one per point")
    if M.shape != (A.shape[1], A.shape[1]) or not np.allclose(M @ M.T, M, rtol=0, atol=1e-10):
        raise ValueError("M must be square and satisfy M M^T = M")
    total = w.sum()
    c = 1.0 / math.sqrt(total)
    z = (w @ A) / math.sqrt(total)

    def h(v):
        r = A - c * (v @ M)
        return float(w @ np.einsum("ij,ij->i", r, r))

    lhs = math.sqrt(total) * (M @ z)
    rhs = M @ (w @ A)
    if not np.allclose(lhs, rhs, rtol=1e-10, atol=1e-12):
        return False
    rng = np.random.default_rng(seed)
    h0 = h(z)
    slack = 1e-12 * (1.0 + abs(h0))
    for _ in range(n_perturb):
        r = rng.standard_normal(z.size)
        if h(z + eps * r) < h0 - slack:
            return False
    return True
