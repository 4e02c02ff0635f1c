"""Readers and writers for matrices, assignment files and solver outputs.

Assignment files (``U.tsv``, ``V.tsv``, ground truth) hold one line per
point: the point index, a tab, and comma-separated cluster ids (empty for
an outlier). An optional first line ``# neocc-assignment n_points=N
n_clusters=K`` pins the table shape so trailing empty clusters survive a
round trip.
"""
from __future__ import annotations

import csv
import json
import math
import re
from pathlib import Path

import numpy as np

from .core import AssignmentMatrix, DataMatrix

__all__ = [
    "ParseError",
    "read_matrix",
    "read_matrix_market",
    "read_dense_csv",
    "write_matrix_market",
    "write_dense_csv",
    "read_assignment",
    "write_assignment",
    "write_assignment_dense",
    "read_trace",
    "write_trace",
    "write_summary",
]

_HEADER_RE = re.compile(r"#\s*neocc-assignment\s+n_points=(\d+)\s+n_clusters=(\d+)\s*$")


class ParseError(ValueError):
    def __init__(self, path, line: int, col: int, msg: str):
        self.path, self.line, self.col, self.msg = str(path), line, col, msg
        super().__init__(f"{self.path}:{line}:{col}: {msg}")


def _float(tok: str, path, line: int, col: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(path, line, col, f"not a number: {tok!r}") from None
    if not math.isfinite(v):
        raise ParseError(path, line, col, f"non-finite value: {tok!r}")
    return v


def _int(tok: str, path, line: int, col: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(path, line, col, f"not an integer: {tok!r}") from None


def _fields(text: str):
    """Split on whitespace, yielding ``(1-based column, token)``."""
    for m in re.finditer(r"\S+", text):
        yield m.start() + 1, m.group()


def read_matrix_market(path) -> DataMatrix:
    """Read a ``%%MatrixMarket matrix coordinate real general`` file (1-based)."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError(path, 1, 1, "empty file")
    head = lines[0].strip().lower().split()
    if len(head) != 5 or head[0] != "%%matrixmarket" or head[1] != "matrix":
        raise ParseError(path, 1, 1, "expected '%%MatrixMarket matrix coordinate real general' header")
    if head[2] != "coordinate":
        raise ParseError(path, 1, 1, f"unsupported layout {head[2]!r}; only 'coordinate' is read")
    if head[3] not in ("real", "integer"):
        raise ParseError(path, 1, 1, f"unsupported field {head[3]!r}; expected 'real'")
    if head[4] != "general":
        raise ParseError(path, 1, 1, f"unsupported symmetry {head[4]!r}; expected 'general'")
    i = 1
    while i < len(lines) and (not lines[i].strip() or lines[i].lstrip().startswith("%")):
        i += 1
    if i == len(lines):
        raise ParseError(path, i + 1, 1, "missing size line")
    size = list(_fields(lines[i]))
    if len(size) != 3:
        raise ParseError(path, i + 1, 1, "size line must hold 'rows cols entries'")
    n, m, nnz = (_int(tok, path, i + 1, col) for col, tok in size)
    if n < 1 or m < 1 or nnz < 0:
        raise ParseError(path, i + 1, 1, f"invalid dimensions {n}x{m} with {nnz} entries")
    rows, cols, vals = [], [], []
    for j in range(i + 1, len(lines)):
        text = lines[j]
        if not text.strip() or text.lstrip().startswith("%"):
            continue
        toks = list(_fields(text))
        if len(toks) != 3:
            raise ParseError(path, j + 1, toks[0][0] if toks else 1, f"expected 3 fields, got {len(toks)}")
        (c1, t1), (c2, t2), (c3, t3) = toks
        r, c = _int(t1, path, j + 1, c1), _int(t2, path, j + 1, c2)
        if not 1 <= r <= n:
            raise ParseError(path, j + 1, c1, f"row index {r} outside 1..{n}")
        if not 1 <= c <= m:
            raise ParseError(path, j + 1, c2, f"column index {c} outside 1..{m}")
        rows.append(r - 1)
        cols.append(c - 1)
        vals.append(_float(t3, path, j + 1, c3))
    if len(vals) != nnz:
        raise ParseError(path, len(lines), 1, f"size line announces {nnz} entries, found {len(vals)}")
    return DataMatrix.from_coo(n, m, np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64),
                               np.array(vals, dtype=np.float64))


def read_dense_csv(path, delimiter: str | None = None) -> DataMatrix:
    """Rectangular numeric grid; comma-separated, or tab-separated for ``.tsv``."""
    path = Path(path)
    if delimiter is None:
        delimiter = "\t" if path.suffix.lower() == ".tsv" else ","
    rows = []
    width = None
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, rec in enumerate(csv.reader(fh, delimiter=delimiter), start=1):
            if not rec or all(not f.strip() for f in rec):
                continue
            if width is None:
                width = len(rec)
            elif len(rec) != width:
                raise ParseError(path, lineno, min(len(rec), width) + 1,
                                 f"ragged row: {len(rec)} fields, expected {width}")
            rows.append([_float(f.strip(), path, lineno, col) for col, f in enumerate(rec, start=1)])
    if not rows:
        raise ParseError(path, 1, 1, "no data rows")
    return DataMatrix(np.array(rows, dtype=np.float64))


def read_matrix(path, fmt: str | None = None) -> DataMatrix:
    """Dispatch on ``fmt`` ('mtx' or 'csv') or on the file extension."""
    path = Path(path)
    if fmt is None:
        fmt = "mtx" if path.suffix.lower() == ".mtx" else "csv"
    fmt = fmt.lower()
    if fmt in ("mtx", "matrix-market", "mm"):
        return read_matrix_market(path)
    if fmt in ("csv", "dense-csv", "tsv"):
        return read_dense_csv(path)
    raise ValueError(f"unknown matrix format {fmt!r}")


def write_matrix_market(path, X: DataMatrix) -> None:
    coo = X.tocsr().tocoo()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{X.n_rows} {X.n_cols} {coo.nnz}\n")
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{r + 1} {c + 1} {float(v)!r}\n")


def write_dense_csv(path, X: DataMatrix) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        for row in X.toarray():
            w.writerow([repr(float(v)) for v in row])


def write_assignment(path, A: AssignmentMatrix) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# neocc-assignment n_points={A.n_points} n_clusters={A.n_clusters}\n")
        for p, lab in enumerate(A.labels()):
            fh.write(f"{p}\t{','.join(str(c) for c in lab)}\n")


def write_assignment_dense(path, A: AssignmentMatrix) -> None:
    """Full 0/1 table, tab-separated, one row per point."""
    np.savetxt(path, A.membership.astype(np.int8), fmt="%d", delimiter="\t")


def read_assignment(path) -> AssignmentMatrix:
    path = Path(path)
    shape = None
    labels: dict[int, list[int]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.rstrip("\r\n")
            if not text.strip():
                continue
            if text.startswith("#"):
                m = _HEADER_RE.match(text)
                if m and lineno == 1:
                    shape = int(m.group(1)), int(m.group(2))
                continue
            point_tok, sep, rest = text.partition("\t")
            if not sep:
                raise ParseError(path, lineno, len(text) + 1, "expected '<point>\\t<cluster ids>'")
            p = _int(point_tok.strip(), path, lineno, 1)
            if p < 0:
                raise ParseError(path, lineno, 1, f"negative point index {p}")
            if p in labels:
                raise ParseError(path, lineno, 1, f"point {p} listed twice")
            ids = []
            col = len(point_tok) + 2
            if rest.strip():
                for tok in rest.split(","):
                    c = _int(tok.strip(), path, lineno, col)
                    if c < 0:
                        raise ParseError(path, lineno, col, f"negative cluster id {c}")
                    if c in ids:
                        raise ParseError(path, lineno, col, f"cluster {c} repeated for point {p}")
                    ids.append(c)
                    col += len(tok) + 1
            labels[p] = ids
    if not labels and shape is None:
        raise ParseError(path, 1, 1, "no assignment lines")
    if shape is None:
        n = max(labels) + 1
        k = 1 + max((c for ids in labels.values() for c in ids), default=0)
    else:
        n, k = shape
    missing = [p for p in range(n) if p not in labels]
    if missing or any(p >= n for p in labels):
        raise ParseError(path, 1, 1, f"point indices must cover 0..{n - 1} exactly once")
    if any(c >= k for ids in labels.values() for c in ids):
        raise ParseError(path, 1, 1, f"cluster id outside 0..{k - 1}")
    table = np.zeros((n, k), dtype=np.bool_)
    for p, ids in labels.items():
        table[p, ids] = True
    return AssignmentMatrix(table)


def write_trace(path, trace) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iteration,objective\n")
        for t, v in enumerate(trace):
            fh.write(f"{t},{float(v)!r}\n")


def read_trace(path) -> list[float]:
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return [float(r[1]) for r in rows[1:] if r]


def write_summary(path, summary: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
