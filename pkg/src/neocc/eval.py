"""Overlapping-cluster F1, planted co-cluster benchmarks and spy-plot ordering."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import AssignmentMatrix, DataMatrix, round_half_up

__all__ = [
    "EmptyClustering",
    "GroundTruth",
    "PlantedConfig",
    "SpyLayout",
    "f1_score",
    "pair_f1",
    "generate_planted",
    "oracle_params",
    "spy_permutation",
    "spy_order",
]


class EmptyClustering(ValueError):
    pass


@dataclass(frozen=True)
class GroundTruth:
    """Per-point label sets; an empty set marks an outlier."""

    n_points: int
    labels: tuple[frozenset, ...]

    def __post_init__(self):
        if len(self.labels) != self.n_points:
            raise ValueError(f"{len(self.labels)} label sets for {self.n_points} points")
        ids = set().union(*self.labels) if self.labels else set()
        if not ids:
            raise EmptyClustering("ground truth has no labelled point")
        if ids != set(range(max(ids) + 1)):
            raise ValueError("cluster identifiers must form a contiguous 0-based range")

    @classmethod
    def from_assignment(cls, A: AssignmentMatrix) -> "GroundTruth":
        return cls(A.n_points, tuple(frozenset(lab) for lab in A.labels()))

    @property
    def n_clusters(self) -> int:
        return 1 + max(set().union(*self.labels))

    def clusters(self) -> list[set[int]]:
        out = [set() for _ in range(self.n_clusters)]
        for p, lab in enumerate(self.labels):
            for c in lab:
                out[c].add(p)
        return out

    def to_assignment(self) -> AssignmentMatrix:
        return AssignmentMatrix.from_labels(self.labels, self.n_clusters)


def pair_f1(a: set, b: set) -> float:
    denom = len(a) + len(b)
    return 2.0 * len(a & b) / denom if denom else 0.0


def _as_sets(clusters) -> list[set]:
    if isinstance(clusters, AssignmentMatrix):
        clusters = clusters.clusters()
    elif isinstance(clusters, GroundTruth):
        clusters = clusters.clusters()
    return [set(c) for c in clusters if len(c)]


def f1_score(predicted, truth) -> float:
    """Symmetric average best-match F1 between two sets of clusters.

    ``0.5 * (mean_t max_p F1(t, p) + mean_p max_t F1(p, t))`` with
    ``F1(A, B) = 2|A & B| / (|A| + |B|)``. Empty clusters are dropped first;
    either side ending up with no cluster raises :class:`EmptyClustering`.
    Accepts lists of iterables, :class:`AssignmentMatrix` or :class:`GroundTruth`.
    """
    pred, true = _as_sets(predicted), _as_sets(truth)
    if not pred:
        raise EmptyClustering("predicted clustering has no nonempty cluster")
    if not true:
        raise EmptyClustering("ground-truth clustering has no nonempty cluster")
    F = np.array([[pair_f1(t, p) for p in pred] for t in true])
    return 0.5 * (F.max(axis=1).mean() + F.max(axis=0).mean())


# ----------------------------------------------------------------------------
# planted benchmark
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class PlantedConfig:
    n: int
    m: int
    k: int
    l: int
    overlap_frac_r: float = 0.0
    overlap_frac_c: float = 0.0
    outlier_frac_r: float = 0.0
    outlier_frac_c: float = 0.0
    signal: float = 1.0
    noise_sd: float = 0.0
    seed: int = 0

    def check(self) -> None:
        for side, n, k, ov, out in (
            ("row", self.n, self.k, self.overlap_frac_r, self.outlier_frac_r),
            ("column", self.m, self.l, self.overlap_frac_c, self.outlier_frac_c),
        ):
            if not (0.0 <= ov < 1.0 and 0.0 <= out < 1.0):
                raise ValueError(f"{side} fractions must lie in [0, 1)")
            n_ov, n_out = round_half_up(ov * n), round_half_up(out * n)
            if n_ov + n_out > n:
                raise ValueError(f"{side} overlap + outlier counts exceed {n} points")
            if k < 1 or n - n_out < k:
                raise ValueError(f"cannot plant {k} {side} clusters in {n - n_out} inlier points")
            if n_ov and k < 2:
                raise ValueError(f"{side} overlap needs at least two clusters")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be nonnegative")


def _plant_labels(rng, n, k, overlap, outlier):
    n_ov, n_out = round_half_up(overlap * n), round_half_up(outlier * n)
    perm = rng.permutation(n)
    outliers = perm[:n_out]
    inliers = perm[n_out:]
    base = np.empty(n, dtype=np.int64)
    base[inliers] = np.arange(inliers.size) % k
    labels = [set() for _ in range(n)]
    for p in inliers:
        labels[p].add(int(base[p]))
    for p in inliers[:n_ov]:
        extra = int(rng.integers(k - 1))
        labels[p].add(extra + (extra >= base[p]))
    return labels, outliers


def generate_planted(config: PlantedConfig) -> tuple[DataMatrix, GroundTruth, GroundTruth]:
    """Block-structured matrix with overlapping and outlying rows and columns.

    Entry ``(s, t)`` has mean ``signal`` when some row cluster of ``s``
    equals some column cluster of ``t`` (the diagonal co-clusters), else 0;
    Gaussian noise of scale ``noise_sd`` is added everywhere. Outlier rows
    and columns carry unstructured values drawn uniformly from
    ``[-signal, 2 * signal]``.
    """
    config.check()
    rng = np.random.default_rng(config.seed)
    rlab, rout = _plant_labels(rng, config.n, config.k, config.overlap_frac_r, config.outlier_frac_r)
    clab, cout = _plant_labels(rng, config.m, config.l, config.overlap_frac_c, config.outlier_frac_c)
    n_diag = min(config.k, config.l)
    Ru = np.zeros((config.n, n_diag))
    Cv = np.zeros((config.m, n_diag))
    for p, lab in enumerate(rlab):
        for c in lab:
            if c < n_diag:
                Ru[p, c] = 1.0
    for p, lab in enumerate(clab):
        for c in lab:
            if c < n_diag:
                Cv[p, c] = 1.0
    X = config.signal * ((Ru @ Cv.T) > 0)
    if config.noise_sd > 0:
        X = X + rng.normal(0.0, config.noise_sd, size=X.shape)
    junk = rng.uniform(-config.signal, 2.0 * config.signal, size=X.shape)
    X[rout, :] = junk[rout, :]
    X[:, cout] = junk[:, cout]
    rows = GroundTruth(config.n, tuple(frozenset(s) for s in rlab))
    cols = GroundTruth(config.m, tuple(frozenset(s) for s in clab))
    return DataMatrix(X), rows, cols


def oracle_params(config: PlantedConfig) -> tuple[float, float, float, float]:
    """The ``(alpha_r, beta_r, alpha_c, beta_c)`` that reproduce the planted counts."""
    out = []
    for n, ov, outl in ((config.n, config.overlap_frac_r, config.outlier_frac_r),
                        (config.m, config.overlap_frac_c, config.outlier_frac_c)):
        n_ov, n_out = round_half_up(ov * n), round_half_up(outl * n)
        out += [(n_ov - n_out) / n, n_out / n]
    return tuple(out)


# ----------------------------------------------------------------------------
# spy-plot ordering
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class SpyLayout:
    row_order: np.ndarray
    col_order: np.ndarray
    row_intervals: dict[int, tuple[int, int]]
    col_intervals: dict[int, tuple[int, int]]


def spy_order(A: AssignmentMatrix) -> tuple[np.ndarray, dict[int, tuple[int, int]]]:
    """Permutation grouping points by cluster, plus each cluster's span.

    Points sort by (lowest cluster id, membership count, index) so a point
    shared with a later cluster sits at the tail of its group, next to
    that later cluster. Outliers go last. The span of cluster ``c`` is
    ``[first, last + 1)`` over the permuted positions of its members, or
    ``(0, 0)`` when empty.
    """
    counts = A.memberships_per_point()
    first = np.where(counts > 0, np.argmax(A.membership, axis=1), A.n_clusters)
    order = np.lexsort((np.arange(A.n_points), counts, first))
    pos = np.empty(A.n_points, dtype=np.int64)
    pos[order] = np.arange(A.n_points)
    spans = {}
    for c in range(A.n_clusters):
        members = pos[A.membership[:, c]]
        spans[c] = (int(members.min()), int(members.max()) + 1) if members.size else (0, 0)
    return order, spans


def spy_permutation(result) -> SpyLayout:
    """Row and column orderings exposing the co-cluster blocks of a result."""
    rows, rspans = spy_order(result.U)
    cols, cspans = spy_order(result.V)
    return SpyLayout(rows, cols, rspans, cspans)
