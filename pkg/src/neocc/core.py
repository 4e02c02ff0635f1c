"""Data matrix, binary assignment matrices and parameter validation."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "DataMatrix",
    "AssignmentMatrix",
    "NormalizedColumn",
    "NeoParams",
    "DuplicateAssignment",
    "ValidationError",
    "build_assignment",
    "normalized_column",
    "validate",
    "round_half_up",
    "phase_budgets",
]

OBJECTIVES = ("M", "RCM")


class DuplicateAssignment(ValueError):
    pass


class ValidationError(ValueError):
    """Raised when parameters violate one or more constraints.

    ``violations`` holds ``(constraint_name, message)`` pairs.
    """

    def __init__(self, violations: Sequence[tuple[str, str]]):
        self.violations = list(violations)
        super().__init__("; ".join(f"[{name}] {msg}" for name, msg in self.violations))


def round_half_up(x: float) -> int:
    # the 1e-9 slack absorbs float noise such as (1 - 1/3) * 3 = 2.0000000000000004
    return int(math.floor(x + 0.5 + 1e-9))


def phase_budgets(n: int, alpha: float, beta: float) -> tuple[int, int]:
    """Number of (first-pass, second-pass) assignments for ``n`` points."""
    return round_half_up((1.0 - beta) * n), round_half_up((alpha + beta) * n)


class DataMatrix:
    """Real ``n_rows x n_cols`` matrix stored dense or as CSR.

    Sparse input of any scipy format is converted to canonical CSR
    (sorted indices, duplicates summed). All values are float64 and must be
    finite.
    """

    __slots__ = ("_dense", "_csr", "_pattern", "_t")

    def __init__(self, values):
        self._pattern = None
        self._t = None
        if sp.issparse(values):
            csr = sp.csr_matrix(values, dtype=np.float64, copy=True)
            csr.sum_duplicates()
            csr.sort_indices()
            self._csr, self._dense = csr, None
            data = csr.data
        else:
            arr = np.array(values, dtype=np.float64, copy=True)
            if arr.ndim != 2:
                raise ValueError(f"data matrix must be 2-D, got shape {arr.shape}")
            arr.setflags(write=False)
            self._dense, self._csr = arr, None
            data = arr
        shape = self.shape
        if shape[0] < 1 or shape[1] < 1:
            raise ValueError(f"data matrix needs at least one row and column, got {shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("data matrix contains NaN or Inf")

    @classmethod
    def from_coo(cls, n_rows: int, n_cols: int, rows, cols, values) -> "DataMatrix":
        return cls(sp.coo_matrix((values, (rows, cols)), shape=(n_rows, n_cols)))

    @property
    def shape(self) -> tuple[int, int]:
        src = self._dense if self._dense is not None else self._csr
        return int(src.shape[0]), int(src.shape[1])

    @property
    def n_rows(self) -> int:
        return self.shape[0]

    @property
    def n_cols(self) -> int:
        return self.shape[1]

    @property
    def storage_kind(self) -> str:
        return "dense" if self._dense is not None else "sparse"

    @property
    def is_sparse(self) -> bool:
        return self._csr is not None

    @property
    def nnz(self) -> int:
        if self._csr is not None:
            return int(self._csr.nnz)
        return int(np.count_nonzero(self._dense))

    def toarray(self) -> np.ndarray:
        if self._dense is not None:
            return self._dense
        return self._csr.toarray()

    def tocsr(self) -> sp.csr_matrix:
        if self._csr is not None:
            return self._csr
        return sp.csr_matrix(self._dense)

    @property
    def raw(self):
        """The stored ndarray or CSR matrix, for BLAS-backed products."""
        return self._dense if self._dense is not None else self._csr

    def pattern(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(indptr, indices, data)`` over stored entries.

        Dense storage stores every entry, zeros included, so kernels that walk
        stored entries treat both layouts uniformly.
        """
        if self._pattern is None:
            if self._csr is not None:
                c = self._csr
                self._pattern = (
                    c.indptr.astype(np.int64),
                    c.indices.astype(np.int64),
                    c.data,
                )
            else:
                n, m = self.shape
                indptr = np.arange(0, n * m + 1, m, dtype=np.int64)
                indices = np.tile(np.arange(m, dtype=np.int64), n)
                self._pattern = (indptr, indices, np.ascontiguousarray(self._dense).ravel())
        return self._pattern

    @property
    def T(self) -> "DataMatrix":
        if self._t is None:
            t = DataMatrix(self._dense.T if self._dense is not None else self._csr.T)
            t._t = self
            self._t = t
        return self._t

    def squared(self) -> "DataMatrix":
        if self._dense is not None:
            return DataMatrix(self._dense * self._dense)
        return DataMatrix(self._csr.multiply(self._csr))

    def __repr__(self) -> str:
        n, m = self.shape
        return f"DataMatrix({n}x{m}, {self.storage_kind}, nnz={self.nnz})"


class AssignmentMatrix:
    """Immutable binary membership table ``points x clusters``.

    A point whose row is all zero is an outlier; a point with two or more
    ones is overlapping.
    """

    __slots__ = ("_m", "_sizes", "_ptr", "_ids")

    def __init__(self, membership):
        arr = np.asarray(membership)
        if arr.ndim != 2:
            raise ValueError(f"membership must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"membership needs at least one point and cluster, got {arr.shape}")
        if arr.dtype != np.bool_:
            if not np.all((arr == 0) | (arr == 1)):
                raise ValueError("membership entries must be 0 or 1")
            arr = arr != 0
        arr = np.array(arr, dtype=np.bool_, copy=True)
        arr.setflags(write=False)
        self._m = arr
        sizes = arr.sum(axis=0, dtype=np.int64)
        sizes.setflags(write=False)
        self._sizes = sizes
        self._ptr = None
        self._ids = None

    @classmethod
    def from_pairs(cls, n_points: int, n_clusters: int, pairs: Iterable[tuple[int, int]]):
        return build_assignment(n_points, n_clusters, pairs)

    @classmethod
    def from_labels(cls, labels: Sequence[Iterable[int]], n_clusters: int | None = None):
        """Build from one iterable of cluster ids per point."""
        labels = [sorted(set(int(c) for c in lab)) for lab in labels]
        if n_clusters is None:
            n_clusters = 1 + max((lab[-1] for lab in labels if lab), default=0)
        pairs = [(p, c) for p, lab in enumerate(labels) for c in lab]
        return build_assignment(len(labels), n_clusters, pairs)

    @classmethod
    def identity(cls, n: int) -> "AssignmentMatrix":
        return cls(np.eye(n, dtype=np.bool_))

    @property
    def membership(self) -> np.ndarray:
        return self._m

    @property
    def n_points(self) -> int:
        return self._m.shape[0]

    @property
    def n_clusters(self) -> int:
        return self._m.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._m.shape

    @property
    def cluster_sizes(self) -> np.ndarray:
        return self._sizes

    @property
    def total_assignments(self) -> int:
        return int(self._sizes.sum())

    def memberships_per_point(self) -> np.ndarray:
        return self._m.sum(axis=1, dtype=np.int64)

    @property
    def outliers(self) -> np.ndarray:
        return np.flatnonzero(~self._m.any(axis=1))

    @property
    def overlapping(self) -> np.ndarray:
        return np.flatnonzero(self.memberships_per_point() >= 2)

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self._m[:, c])

    def clusters_of(self, p: int) -> np.ndarray:
        return np.flatnonzero(self._m[p])

    def clusters(self) -> list[set[int]]:
        return [set(self.members(c).tolist()) for c in range(self.n_clusters)]

    def labels(self) -> list[tuple[int, ...]]:
        return [tuple(self.clusters_of(p).tolist()) for p in range(self.n_points)]

    def as_float(self) -> np.ndarray:
        return self._m.astype(np.float64)

    def ragged(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-point cluster lists as ``(ptr, ids)``, ids ascending per point."""
        if self._ptr is None:
            p, c = np.nonzero(self._m)
            ptr = np.zeros(self.n_points + 1, dtype=np.int64)
            np.cumsum(np.bincount(p, minlength=self.n_points), out=ptr[1:])
            ids = c.astype(np.int64)
            ptr.setflags(write=False)
            ids.setflags(write=False)
            self._ptr, self._ids = ptr, ids
        return self._ptr, self._ids

    def __eq__(self, other) -> bool:
        if not isinstance(other, AssignmentMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._m, other._m))

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"AssignmentMatrix({self.n_points}x{self.n_clusters}, "
            f"assignments={self.total_assignments}, outliers={self.outliers.size}, "
            f"overlapping={self.overlapping.size})"
        )


def build_assignment(n_points: int, n_clusters: int, memberships: Iterable[tuple[int, int]]) -> AssignmentMatrix:
    if n_points < 1 or n_clusters < 1:
        raise ValueError("n_points and n_clusters must be positive")
    table = np.zeros((n_points, n_clusters), dtype=np.bool_)
    for p, c in memberships:
        if not (0 <= p < n_points and 0 <= c < n_clusters):
            raise IndexError(f"assignment ({p}, {c}) out of range for {n_points}x{n_clusters}")
        if table[p, c]:
            raise DuplicateAssignment(f"point {p} assigned to cluster {c} twice")
        table[p, c] = True
    return AssignmentMatrix(table)


@dataclass(frozen=True)
class NormalizedColumn:
    cluster_index: int
    values: np.ndarray


def normalized_column(A: AssignmentMatrix, c: int) -> NormalizedColumn:
    if not 0 <= c < A.n_clusters:
        raise IndexError(f"cluster {c} out of range for {A.n_clusters} clusters")
    size = int(A.cluster_sizes[c])
    values = np.zeros(A.n_points)
    if size:
        values[A.membership[:, c]] = 1.0 / math.sqrt(size)
    return NormalizedColumn(c, values)


@dataclass(frozen=True)
class NeoParams:
    """Solver parameters.

    ``alpha_*`` is the extra-assignment (overlap) ratio and may be negative
    down to ``-beta_*``; ``beta_*`` bounds the outlier fraction.
    """

    k: int
    l: int
    alpha_r: float = 0.0
    beta_r: float = 0.0
    alpha_c: float = 0.0
    beta_c: float = 0.0
    objective: str = "M"
    t_max: int = 100
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "objective", str(self.objective).upper())

    def swapped(self) -> "NeoParams":
        """Parameters for the transposed problem."""
        return replace(
            self, k=self.l, l=self.k,
            alpha_r=self.alpha_c, beta_r=self.beta_c,
            alpha_c=self.alpha_r, beta_c=self.beta_r,
        )

    def as_dict(self) -> dict:
        return {
            "k": self.k, "l": self.l,
            "alpha_r": self.alpha_r, "beta_r": self.beta_r,
            "alpha_c": self.alpha_c, "beta_c": self.beta_c,
            "objective": self.objective, "t_max": self.t_max,
            "tol": self.tol, "seed": self.seed,
        }


def _side_violations(side: str, n: int, n_clusters: int, alpha: float, beta: float):
    out = []
    s = side[0]
    if n_clusters < 1:
        out.append((f"{'k' if s == 'r' else 'l'}>=1", f"{side} cluster count must be >= 1, got {n_clusters}"))
    elif n < n_clusters:
        out.append(
            (f"n>={'k' if s == 'r' else 'l'}",
             f"{side} cluster count {n_clusters} exceeds the {n} points to cluster")
        )
    if not (math.isfinite(alpha) and math.isfinite(beta)):
        out.append((f"finite_{s}", f"alpha_{s}/beta_{s} must be finite"))
        return out
    if not 0.0 <= beta < 1.0:
        out.append((f"beta_{s}_range", f"need 0 <= beta_{s} < 1, got {beta}"))
    if alpha < -beta:
        out.append((f"alpha_{s}>=-beta_{s}", f"need alpha_{s} >= -beta_{s}, got {alpha} < {-beta}"))
    total = round_half_up((1.0 + alpha) * n)
    if n_clusters >= 1 and total > n_clusters * n:
        out.append(
            (f"budget_{s}",
             f"round((1+alpha_{s})*{n})={total} exceeds {n_clusters}*{n}={n_clusters * n}")
        )
    if n_clusters >= 1 and 0.0 <= beta < 1.0 and alpha >= -beta:
        n1, n2 = phase_budgets(n, alpha, beta)
        if n1 + n2 > n_clusters * n:
            out.append(
                (f"budget_{s}",
                 f"phase budgets {n1}+{n2} exceed {n_clusters}*{n}={n_clusters * n}")
            )
    return out


def validate(params: NeoParams, n: int, m: int) -> None:
    """Raise :class:`ValidationError` listing every violated constraint."""
    violations = []
    if n < 1 or m < 1:
        violations.append(("shape", f"matrix must be at least 1x1, got {n}x{m}"))
    violations += _side_violations("row", n, params.k, params.alpha_r, params.beta_r)
    violations += _side_violations("column", m, params.l, params.alpha_c, params.beta_c)
    if params.objective not in OBJECTIVES:
        violations.append(("objective", f"objective must be one of {OBJECTIVES}, got {params.objective!r}"))
    if params.t_max < 0:
        violations.append(("t_max>=0", f"t_max must be nonnegative, got {params.t_max}"))
    if not (params.tol >= 0.0):
        violations.append(("tol>=0", f"tol must be nonnegative, got {params.tol}"))
    # duplicate budget messages arise when both the total and the phase split overflow
    seen, unique = set(), []
    for v in violations:
        if v[0] not in seen:
            seen.add(v[0])
            unique.append(v)
    if unique:
        raise ValidationError(unique)
