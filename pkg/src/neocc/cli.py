"""Command-line interface: ``neocc run | eval | spy | estimate``.

Exit codes: 0 success, 2 unreadable or malformed input, 3 invalid
parameters or semantically inconsistent inputs.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from . import _accel
from .core import NeoParams, ValidationError, validate
from .eval import EmptyClustering, f1_score, spy_order
from .io import (
    ParseError,
    read_assignment,
    read_matrix,
    write_assignment,
    write_assignment_dense,
    write_summary,
    write_trace,
)
from .solver import estimate_params, neo_cc

EXIT_OK, EXIT_INPUT, EXIT_SEMANTIC = 0, 2, 3

log = logging.getLogger("neocc")


def _err(msg: str) -> None:
    print(f"neocc: error: {msg}", file=sys.stderr)


def _load_matrix(path, fmt):
    try:
        return read_matrix(path, fmt)
    except ParseError as e:
        _err(str(e))
    except OSError as e:
        _err(f"{path}: {e.strerror or e}")
    return None


def _report_validation(e: ValidationError) -> int:
    _err("invalid parameters:")
    for name, msg in e.violations:
        print(f"  [{name}] {msg}", file=sys.stderr)
    return EXIT_SEMANTIC


def _fmt(v: float) -> str:
    return f"{v:.6g}"


# ----------------------------------------------------------------------------
# spy rendering
# ----------------------------------------------------------------------------

_ROW_COLORS = ("#d62728", "#ff7f0e", "#8c564b", "#e377c2", "#bcbd22")
_COL_COLORS = ("#9467bd", "#2ca02c", "#17becf", "#1f77b4", "#7f7f7f")


def render_spy_svg(X, row_order, col_order, row_spans, col_spans, cell: float = 4.0) -> str:
    """Permuted nonzero pattern as dots with one rectangle per nonempty cluster."""
    A = X.toarray()[np.ix_(row_order, col_order)]
    n, m = A.shape
    w, h = m * cell, n * cell
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:g}" height="{h:g}" '
        f'viewBox="0 0 {w:g} {h:g}">',
        '<g fill="#1f3b99">',
    ]
    r = cell * 0.35
    for i, j in zip(*np.nonzero(A)):
        out.append(f'<circle cx="{(j + 0.5) * cell:g}" cy="{(i + 0.5) * cell:g}" r="{r:g}"/>')
    out.append("</g>")
    out.append('<g fill="none" stroke-width="1.5">')
    for c, (s, e) in sorted(row_spans.items()):
        if e > s:
            color = _ROW_COLORS[c % len(_ROW_COLORS)]
            out.append(
                f'<rect class="row-cluster" data-cluster="{c}" x="0" y="{s * cell:g}" '
                f'width="{w:g}" height="{(e - s) * cell:g}" stroke="{color}"/>'
            )
    for c, (s, e) in sorted(col_spans.items()):
        if e > s:
            color = _COL_COLORS[c % len(_COL_COLORS)]
            out.append(
                f'<rect class="col-cluster" data-cluster="{c}" x="{s * cell:g}" y="0" '
                f'width="{(e - s) * cell:g}" height="{h:g}" stroke="{color}"/>'
            )
    out.append("</g>")
    out.append(f"<title>{escape(f'{n} x {m} co-clustered matrix')}</title>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _write_spy(out: Path, U, V, X=None, emit_svg: bool = False) -> None:
    rows, rspans = spy_order(U)
    cols, cspans = spy_order(V)
    (out / "row_order.txt").write_text("".join(f"{i}\n" for i in rows), encoding="utf-8")
    (out / "col_order.txt").write_text("".join(f"{i}\n" for i in cols), encoding="utf-8")
    intervals = {
        "rows": {str(c): list(s) for c, s in rspans.items()},
        "cols": {str(c): list(s) for c, s in cspans.items()},
    }
    (out / "intervals.json").write_text(json.dumps(intervals, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if emit_svg:
        (out / "spy.svg").write_text(render_spy_svg(X, rows, cols, rspans, cspans), encoding="utf-8")


# ----------------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------------

def cmd_run(args) -> int:
    _accel.set_threads(args.threads)
    X = _load_matrix(args.input, args.format)
    if X is None:
        return EXIT_INPUT
    params = NeoParams(
        k=args.k, l=args.l,
        alpha_r=args.alpha_r, beta_r=args.beta_r,
        alpha_c=args.alpha_c, beta_c=args.beta_c,
        objective=args.objective, t_max=args.t_max, tol=args.tol, seed=args.seed,
    )
    try:
        validate(params, X.n_rows, X.n_cols)
    except ValidationError as e:
        return _report_validation(e)
    init = None
    if (args.init_u is None) != (args.init_v is None):
        _err("--init-u and --init-v must be given together")
        return EXIT_SEMANTIC
    if args.init_u is not None:
        try:
            init = read_assignment(args.init_u), read_assignment(args.init_v)
        except ParseError as e:
            _err(str(e))
            return EXIT_INPUT
        except OSError as e:
            _err(f"{e.filename}: {e.strerror}")
            return EXIT_INPUT
        U0, V0 = init
        if U0.shape != (X.n_rows, params.k) or V0.shape != (X.n_cols, params.l):
            _err(f"init shapes {U0.shape}/{V0.shape} do not match "
                 f"({X.n_rows}, {params.k})/({X.n_cols}, {params.l})")
            return EXIT_SEMANTIC
    truth = None
    if args.truth is not None:
        try:
            truth = read_assignment(args.truth)
        except (ParseError, OSError) as e:
            _err(str(e))
            return EXIT_INPUT
        expected = X.n_cols if args.eval_side == "cols" else X.n_rows
        if truth.n_points != expected:
            _err(f"truth covers {truth.n_points} points, {args.eval_side} side has {expected}")
            return EXIT_SEMANTIC

    result = neo_cc(X, params, init=init)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_assignment(out / "U.tsv", result.U)
    write_assignment(out / "V.tsv", result.V)
    if args.dense_output:
        write_assignment_dense(out / "U_dense.tsv", result.U)
        write_assignment_dense(out / "V_dense.tsv", result.V)
    write_trace(out / "trace.csv", result.trace)
    summary = {
        "params": params.as_dict(),
        "n_rows": X.n_rows,
        "n_cols": X.n_cols,
        "iterations": result.iterations,
        "converged": result.converged,
        "final_objective": result.objective,
        "initial_objective": result.trace[0],
        "row_assignments": result.U.total_assignments,
        "col_assignments": result.V.total_assignments,
        "row_outliers": int(result.row_outliers.size),
        "col_outliers": int(result.col_outliers.size),
    }
    if truth is not None:
        pred = result.V if args.eval_side == "cols" else result.U
        try:
            summary["f1"] = f1_score(pred, truth)
        except EmptyClustering as e:
            _err(str(e))
            return EXIT_SEMANTIC
    write_summary(out / "summary.json", summary)
    if args.emit_svg:
        _write_spy(out, result.U, result.V, X, emit_svg=True)

    print(f"objective: NEO-CC-{params.objective}")
    print(f"iterations: {result.iterations} (converged: {str(result.converged).lower()})")
    print(f"final objective: {_fmt(result.objective)}")
    print(f"row outliers: {result.row_outliers.size}  column outliers: {result.col_outliers.size}")
    if "f1" in summary:
        print(f"F1 ({args.eval_side}): {100 * summary['f1']:.1f}")
    print(f"wrote {out}")
    return EXIT_OK


def _is_blank(path) -> bool:
    with open(path, encoding="utf-8") as fh:
        return all(not line.strip() or line.startswith("#") for line in fh)


def cmd_eval(args) -> int:
    pred_path = Path(args.pred)
    if pred_path.is_dir():
        pred_path = pred_path / ("V.tsv" if args.side == "cols" else "U.tsv")
    for p in (pred_path, Path(args.truth)):
        if not p.is_file():
            _err(f"{p}: no such file")
            return EXIT_INPUT
    if _is_blank(args.truth):
        _err(f"{args.truth}: ground truth is empty")
        return EXIT_SEMANTIC
    try:
        pred = read_assignment(pred_path)
        truth = read_assignment(args.truth)
    except ParseError as e:
        _err(str(e))
        return EXIT_INPUT
    if pred.n_points != truth.n_points:
        _err(f"index universes differ: prediction has {pred.n_points} points, truth {truth.n_points}")
        return EXIT_SEMANTIC
    try:
        score = f1_score(pred, truth)
    except EmptyClustering as e:
        _err(str(e))
        return EXIT_SEMANTIC
    print(f"{100 * score:.1f}")
    return EXIT_OK


def cmd_spy(args) -> int:
    res = Path(args.result_dir)
    try:
        U = read_assignment(res / "U.tsv")
        V = read_assignment(res / "V.tsv")
    except FileNotFoundError as e:
        _err(f"missing result file {e.filename}")
        return EXIT_INPUT
    except ParseError as e:
        _err(str(e))
        return EXIT_INPUT
    X = None
    if args.emit_svg:
        if args.input is None:
            _err("--emit-svg needs --input")
            return EXIT_SEMANTIC
        X = _load_matrix(args.input, args.format)
        if X is None:
            return EXIT_INPUT
        if X.shape != (U.n_points, V.n_points):
            _err(f"matrix shape {X.shape} does not match result ({U.n_points}, {V.n_points})")
            return EXIT_SEMANTIC
    out = Path(args.out) if args.out else res
    out.mkdir(parents=True, exist_ok=True)
    _write_spy(out, U, V, X, emit_svg=args.emit_svg)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    _accel.set_threads(args.threads)
    X = _load_matrix(args.input, args.format)
    if X is None:
        return EXIT_INPUT
    try:
        a_r, b_r, a_c, b_c = estimate_params(X, args.k, args.l, args.delta, args.gamma, args.seed)
    except ValidationError as e:
        return _report_validation(e)
    print(f"alpha_r={a_r:.6g} beta_r={b_r:.6g} alpha_c={a_c:.6g} beta_c={b_c:.6g}")
    return EXIT_OK


# ----------------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _err(message)
        raise SystemExit(EXIT_INPUT)


def _add_input(p):
    p.add_argument("input", help="matrix file (.mtx Matrix Market or dense .csv/.tsv)")
    p.add_argument("--format", choices=["mtx", "csv"], default=None,
                   help="input format (default: by extension)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="neocc", description="Non-exhaustive, overlapping co-clustering.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log per-iteration objectives")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="co-cluster a matrix")
    _add_input(p)
    p.add_argument("-k", type=int, required=True, help="number of row clusters")
    p.add_argument("-l", type=int, required=True, help="number of column clusters")
    p.add_argument("--alpha-r", type=float, default=0.0)
    p.add_argument("--beta-r", type=float, default=0.0)
    p.add_argument("--alpha-c", type=float, default=0.0)
    p.add_argument("--beta-c", type=float, default=0.0)
    p.add_argument("--objective", type=str.upper, choices=["M", "RCM"], default="M")
    p.add_argument("--t-max", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init-u", default=None, help="initial row assignment file")
    p.add_argument("--init-v", default=None, help="initial column assignment file")
    p.add_argument("--truth", default=None, help="ground-truth assignment file to score against")
    p.add_argument("--eval-side", choices=["cols", "rows"], default="cols")
    p.add_argument("--out", "-o", default="neocc_out", help="output directory")
    p.add_argument("--emit-svg", action="store_true", help="also write spy-plot files")
    p.add_argument("--dense-output", action="store_true", help="also write full 0/1 assignment tables")
    p.add_argument("--threads", type=int, default=None, help="numba threads (env NEOCC_THREADS)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="F1 of predicted clusters against ground truth")
    p.add_argument("pred", help="assignment file, or a result directory")
    p.add_argument("truth", help="ground-truth assignment file")
    p.add_argument("--side", choices=["cols", "rows"], default="cols",
                   help="which side of a result directory to score")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("spy", help="row/column orderings and cluster spans of a result")
    p.add_argument("result_dir")
    p.add_argument("--input", default=None, help="matrix file, needed for --emit-svg")
    p.add_argument("--format", choices=["mtx", "csv"], default=None)
    p.add_argument("--emit-svg", action="store_true")
    p.add_argument("--out", default=None, help="output directory (default: result_dir)")
    p.set_defaults(func=cmd_spy)

    p = sub.add_parser("estimate", help="suggest alpha/beta parameters")
    _add_input(p)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-l", type=int, required=True)
    p.add_argument("--delta", type=float, default=3.0)
    p.add_argument("--gamma", type=float, default=1.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_estimate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    if args.verbose:
        log.setLevel(logging.DEBUG)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
