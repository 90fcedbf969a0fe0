"""Command-line front end: ``coopindex <command> [files] [options]``."""

from __future__ import annotations

import argparse
import io
import math
import sys
from typing import IO, Sequence

import numpy as np

from . import io as mio
from .core import (
    CoopIndexError,
    DimensionError,
    InvalidMatrixError,
    LabeledMatrix,
    column_normalize,
    row_normalize,
)
from .qgaussian import DEFAULT_AXIS_MAX, DEFAULT_AXIS_STEP, DEFAULT_FIT_STEP, axis_grid, phase_diagram
from .sinkhorn import DEFAULT_MAX_ITER, DEFAULT_TOL, cooperative_index_report, cooperative_iterate, write_trace_csv
from .structure import PERMANENT_CAP, count_positive_diagonals, perfect_matching, triangularize
from .teaching import ThresholdProblem, average_teaching_dimension, build_threshold_learner
from .transmission import (
    expected_teaching_dimension,
    machine_teaching_matrix,
    simulate_transmission,
    ti_certificate,
    transmission_index,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MALFORMED = 3
EXIT_DIMENSION = 4
EXIT_MODULE = 5

EPILOG = f"""\
exit status:
  {EXIT_OK}  success
  {EXIT_USAGE}  bad command line
  {EXIT_MALFORMED}  unreadable or malformed input file, or invalid matrix entries
  {EXIT_DIMENSION}  dimension mismatch between inputs
  {EXIT_MODULE}  computation error (undefined quantity, no positive diagonal, ...)

Matrices are headerless CSV (rows = data sets, columns = concepts) or JSON
objects {{"concepts", "datasets", "dataset_sizes", "entries"}}; files ending
in .json are read as JSON unless --format says otherwise.
"""


class _Printer:
    def __init__(self, out: IO[str], precision: int):
        self.out = out
        self.precision = precision

    def num(self, x: float) -> str:
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.{self.precision}f}"

    def exact(self, x: float) -> str:
        """Integral values print as integers, everything else as :meth:`num`."""
        if math.isfinite(x) and x == int(x):
            return str(int(x))
        return self.num(x)

    def __call__(self, *parts: str) -> None:
        print(*parts, file=self.out)


def _read(path: str, args) -> LabeledMatrix:
    return mio.read_matrix(path, args.format if args.format_given else None)


def _sizes(args, M: LabeledMatrix) -> list[int]:
    if args.sizes:
        try:
            return [int(s) for s in args.sizes.split(",")]
        except ValueError:
            raise mio.MalformedInputError(f"--sizes must be comma-separated integers, got {args.sizes!r}") from None
    if M.index is not None:
        return list(M.index.dataset_sizes)
    return [1] * M.shape[0]


def _write_output(args, text: str, out: IO[str]) -> None:
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        out.write(text)


def cmd_ti(args, p: _Printer, out) -> None:
    L = _read(args.files[0], args).entries
    T = _read(args.files[1], args).entries
    cert = ti_certificate(L, T, args.tol)
    p("TI =", p.num(cert.ti_value))
    p("condition (i) L=1 where T>0:", "holds" if cert.condition_i_holds else "violated")
    if cert.violations:
        p("  violations:", " ".join(f"({i},{j})" for i, j in cert.violations))
    p("condition (ii) no zero column:", "holds" if cert.condition_ii_holds else "violated")
    if cert.zero_columns:
        p("  zero columns:", " ".join(map(str, cert.zero_columns)))
    p("optimal:", "yes" if cert.optimal else "no")


def cmd_etd(args, p: _Printer, out) -> None:
    first = _read(args.files[0], args)
    if len(args.files) == 2:
        L, T = first.entries, _read(args.files[1], args).entries
    else:
        L, T = row_normalize(first.entries), column_normalize(first.entries)
    p("ETD =", p.num(expected_teaching_dimension(L, T, _sizes(args, first))))


def cmd_atd(args, p: _Printer, out) -> None:
    C = _read(args.files[0], args)
    p("ATD =", p.exact(average_teaching_dimension(C.entries, _sizes(args, C))))


def _structure_report(M: np.ndarray, p: _Printer) -> None:
    n = M.shape[0]
    if n <= PERMANENT_CAP:
        p("positive diagonals:", str(count_positive_diagonals(M)))
    else:
        p("positive diagonals: not counted (n >", str(PERMANENT_CAP) + ")")
    w = triangularize(M)
    p("triangularizable:", "yes" if w else "no")
    if w:
        p("row permutation:", " ".join(map(str, w.row_perm)))
        p("column permutation:", " ".join(map(str, w.col_perm)))


def cmd_ci(args, p: _Printer, out) -> None:
    M = _read(args.files[0], args).entries
    rep = cooperative_index_report(M, mode=args.mode, max_iter=args.max_iter, tol=args.tol)
    p("CI =", p.exact(rep.ci))
    p("mode:", rep.mode)
    p("iterations:", str(rep.iterations))
    p("converged:", "yes" if rep.converged else "no")
    _structure_report(M, p)


def cmd_sinkhorn(args, p: _Printer, out) -> None:
    M = _read(args.files[0], args)
    A = M.entries
    ref = None
    if A.shape[0] == A.shape[1]:
        ref = perfect_matching(A)
    res = cooperative_iterate(
        A, max_iter=args.max_iter, tol=args.tol, reference_diagonal=ref, record_trace=True
    )
    p("iterations:", str(res.iterations))
    p("converged:", "yes" if res.converged else "no")
    p("residual:", f"{res.residual:.3e}")
    p("reference diagonal:", " ".join(map(str, ref)) if ref is not None else "none")
    p("L_limit:")
    out.write(mio.format_matrix(LabeledMatrix(res.L_limit, M.index), args.format))
    p("T_limit:")
    out.write(mio.format_matrix(LabeledMatrix(res.T_limit, M.index), args.format))
    p("trace:")
    if args.output:
        with open(args.output, "w") as fh:
            write_trace_csv(res, fh)
        p(f"written to {args.output}")
    else:
        write_trace_csv(res, out)


def cmd_diagonals(args, p: _Printer, out) -> None:
    M = _read(args.files[0], args).entries
    p("positive diagonals:", str(count_positive_diagonals(M)))


def cmd_triangularize(args, p: _Printer, out) -> None:
    M = _read(args.files[0], args)
    w = triangularize(M.entries)
    if w is None:
        p("none")
        return
    p("row permutation:", " ".join(map(str, w.row_perm)))
    p("column permutation:", " ".join(map(str, w.col_perm)))
    if args.output:
        _write_output(args, mio.format_matrix(w.apply(M.entries), args.format), out)


def cmd_mt_demo(args, p: _Printer, out) -> None:
    learner = build_threshold_learner(ThresholdProblem((1, 2, 3), (0, 1, 2, 3)))
    L = learner.entries
    idx = learner.index
    width = max(len(s) for s in idx.dataset_labels)
    p(" " * width, *(f"{c:>8}" for c in idx.concept_labels))
    for label, row in zip(idx.dataset_labels, L):
        p(f"{label:<{width}}", *(f"{x:8.4f}" for x in row))
    T_full = machine_teaching_matrix(L, args.tie_rule)
    chosen = [idx.dataset_labels[i] for i in np.argmax(T_full, axis=0)]
    p("machine teaching picks:", ", ".join(f"{c}->{d}" for c, d in zip(idx.concept_labels, chosen)))
    L3 = L[:3]
    T3 = machine_teaching_matrix(L3, args.tie_rule)
    p("TI(full) =", p.num(transmission_index(L, T_full)))
    p("TI(truncated) =", p.num(transmission_index(L3, T3)))


def cmd_simulate(args, p: _Printer, out) -> None:
    L = _read(args.files[0], args).entries
    T = _read(args.files[1], args).entries
    est = simulate_transmission(L, T, args.episodes, args.seed)
    p("TI (simulated) =", p.num(est))
    p("TI (exact) =", p.num(transmission_index(L, T)))
    p("episodes:", str(args.episodes))
    p("seed:", str(args.seed))


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    return lo, hi


def cmd_phase_diagram(args, p: _Printer, out) -> None:
    a_lo, a_hi = args.a_range
    d_lo, d_hi = args.delta_range
    diagram = phase_diagram(
        args.q,
        axis_grid(a_lo, a_hi, args.step),
        axis_grid(d_lo, d_hi, args.step),
        fit_step=args.fit_step,
        workers=args.workers,
        max_iter=args.max_iter,
        tol=args.tol,
    )
    if args.output:
        with open(args.output, "w") as fh:
            diagram.write_csv(fh, args.precision)
        cols = diagram.optimal_a_columns()
        p("cells:", str(diagram.ci_values.size))
        p("a columns with CI = 1 at every delta:", " ".join(p.num(a) for a in cols) if cols.size else "none")
    else:
        diagram.write_csv(out, args.precision)


COMMANDS = {
    "ti": (cmd_ti, "Transmission Index of L and T with its optimality certificate", 2),
    "etd": (cmd_etd, "Expected Teaching Dimension of a matrix's normalizations (or of L, T)", (1, 2)),
    "atd": (cmd_atd, "Average Teaching Dimension of a 0/1 consistency matrix", 1),
    "ci": (cmd_ci, "Cooperative Index of M with the diagonal structure verdict", 1),
    "sinkhorn": (cmd_sinkhorn, "run the cooperative iteration, print limits and trace", 1),
    "diagonals": (cmd_diagonals, "count positive diagonals (pattern permanent)", 1),
    "triangularize": (cmd_triangularize, "permutations to upper-triangular form, or 'none'", 1),
    "mt-demo": (cmd_mt_demo, "machine teaching on threshold classifiers", 0),
    "simulate": (cmd_simulate, "Monte Carlo estimate of TI from L and T", 2),
    "phase-diagram": (cmd_phase_diagram, "CI sweep of the q-Gaussian regression example (CSV)", 0),
}


class _FormatAction(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)
        namespace.format_given = True


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="convergence / comparison tolerance (default 1e-10)")
    common.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER, help="iteration cap (default 1000000)")
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--format", choices=("csv", "json"), default="csv", action=_FormatAction,
                        help="matrix format for reading and writing (default: by extension / csv)")
    common.add_argument("--output", metavar="PATH", help="write the main artifact here instead of stdout")
    common.add_argument("--precision", type=int, default=6, help="decimals in printed numbers (default 6)")

    parser = argparse.ArgumentParser(
        prog="coopindex",
        description="Transmission Index, Cooperative Index and teaching-dimension tools.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.set_defaults(format_given=False)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, help_text, nfiles) in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        if nfiles == (1, 2):
            sp.add_argument("files", nargs="+", metavar="FILE")
        elif nfiles:
            sp.add_argument("files", nargs=nfiles, metavar="FILE")
        if name in ("etd", "atd"):
            sp.add_argument("--sizes", help="comma-separated data-set sizes (default: from JSON, else all 1)")
        if name == "ci":
            sp.add_argument("--mode", choices=("structural", "iterative"), default="structural")
        if name == "mt-demo":
            sp.add_argument("--tie-rule", choices=("uniform-split", "lowest-index"), default="uniform-split")
        if name == "simulate":
            sp.add_argument("--episodes", type=int, default=1_000_000)
        if name == "phase-diagram":
            sp.add_argument("--q", type=float, default=0.0)
            sp.add_argument("--a-range", type=_range, default=(DEFAULT_AXIS_STEP, DEFAULT_AXIS_MAX), metavar="LO:HI")
            sp.add_argument("--delta-range", type=_range, default=(DEFAULT_AXIS_STEP, DEFAULT_AXIS_MAX), metavar="LO:HI")
            sp.add_argument("--step", type=float, default=DEFAULT_AXIS_STEP, help="axis step for a and delta")
            sp.add_argument("--fit-step", type=float, default=DEFAULT_FIT_STEP, help="offset grid step of the ML fits")
            sp.add_argument("--workers", type=int, default=1)
    return parser


def main(argv: Sequence[str] | None = None, out: IO[str] | None = None, err: IO[str] | None = None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "etd" and len(args.files) > 2:
        print("coopindex: error: etd takes one matrix or an L and a T file", file=err)
        return EXIT_USAGE
    if args.tol <= 0 or args.max_iter < 1:
        print("coopindex: error: --tol must be > 0 and --max-iter >= 1", file=err)
        return EXIT_USAGE
    handler = COMMANDS[args.command][0]
    # buffer so nothing is printed when a command fails part-way
    buf = io.StringIO()
    try:
        handler(args, _Printer(buf, args.precision), buf)
    except (mio.MalformedInputError, InvalidMatrixError) as exc:
        print(f"coopindex: error: {exc}", file=err)
        return EXIT_MALFORMED
    except DimensionError as exc:
        print(f"coopindex: error: {exc}", file=err)
        return EXIT_DIMENSION
    except (CoopIndexError, ValueError) as exc:
        print(f"coopindex: error: {exc}", file=err)
        return EXIT_MODULE
    out.write(buf.getvalue())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
