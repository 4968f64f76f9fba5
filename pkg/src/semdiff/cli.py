"""Batch command-line interface.

Subcommands:

  simulate          one run, trace CSV (step, a, b, x, power, direction, dx,
                    snapped_x, action)
  compare           fuzzy-vs-binary comparison CSV (n, target_index, t_fuzzy,
                    t_binary, outcome)
  optimize-weights  exhaustive weight search, one-row summary CSV
  reproduce-tables  rebuild the published reference tables and the
                    divergence report; exits 1 if a golden trace mismatches
  calibrate-binary  survey stop-rule x binary-convention pairs against the
                    published n=9 data
  serve             run the session service

Every CSV ends with tool_version and seed columns and is written atomically
(temp file + rename), so identical invocations produce identical bytes.
The default output directory is $SEMDIFF_OUT_DIR (falling back to the
current directory).
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import tempfile
from typing import Iterable, List, Optional, Sequence

from . import __version__
from .core import StepWeights
from .reference import (
    COMPARISON_SUMMARY,
    DIVERGENCES,
    N9_BINARY_COLUMN,
    N9_FUZZY_COLUMN,
    N9_HEADLINE,
    N9_WEIGHTS,
    OPPOSITE_PAIR_RULES,
    WORKED_TRACE_A,
    WORKED_TRACE_A_TARGET,
    WORKED_TRACE_B,
    WORKED_TRACE_B_TARGET,
    calibrate_binary,
    check_worked_trace,
    _mod,
)
from .simulate import (
    CALIBRATED_CONVENTIONS,
    DEFAULT_CONVENTIONS,
    Conventions,
    PolicyMode,
    UserPolicy,
    compare_vs_binary,
    optimize_weights,
    simulate_run,
)
from .tolerant import IntervalAction


def _out_dir(explicit: Optional[str]) -> str:
    return explicit or os.environ.get("SEMDIFF_OUT_DIR", ".")


def write_csv_atomic(path: str, header: Sequence[str], rows: Iterable[Sequence], seed: int) -> None:
    """Write rows + (tool_version, seed) columns atomically with RFC-4180 quoting."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
    writer.writerow(list(header) + ["tool_version", "seed"])
    for row in rows:
        writer.writerow(list(row) + [__version__, seed])
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(buffer.getvalue())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_weights(text: str) -> StepWeights:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("weights must be 'slightly,moderately,significantly'")
    w = StepWeights(*parts)
    w.validate()
    return w


def _conventions(name: str) -> Conventions:
    if name == "default":
        return DEFAULT_CONVENTIONS
    if name == "calibrated":
        return CALIBRATED_CONVENTIONS
    raise argparse.ArgumentTypeError(f"unknown conventions {name!r}")


TRACE_HEADER = ("step", "a", "b", "x", "power", "direction", "dx", "snapped_x", "action")
COMPARISON_HEADER = ("n", "target_index", "t_fuzzy", "t_binary", "outcome")


def _action_label(action) -> str:
    if action is None:
        return ""
    return {
        IntervalAction.UNCHANGED: "unchanged",
        IntervalAction.SET_LOWER_TO_PREV_POSITION: "set_lower",
        IntervalAction.SET_UPPER_TO_PREV_POSITION: "set_upper",
    }[action]


def cmd_simulate(args) -> int:
    weights = args.weights
    policy = UserPolicy(
        mode=PolicyMode.ERRONEOUS if args.policy == "erroneous" else PolicyMode.ERROR_FREE,
        p_err=args.p_err if args.policy == "erroneous" else 0.0,
        rng_seed=args.seed,
    )
    trace = simulate_run(
        args.n, args.target_index, weights, policy, algorithm=args.algorithm, stop=args.stop
    )
    rows = [
        (
            i,
            repr(s.lower),
            repr(s.upper),
            repr(s.position),
            s.modifier.power.label,
            s.modifier.direction.label,
            repr(s.dx),
            repr(s.variant),
            _action_label(s.action),
        )
        for i, s in enumerate(trace.steps)
    ]
    path = os.path.join(_out_dir(args.out_dir), args.out)
    write_csv_atomic(path, TRACE_HEADER, rows, args.seed)
    print(
        f"n={args.n} target_index={args.target_index} steps={trace.step_count} "
        f"final_variant={trace.final_variant!r} terminated={trace.terminated} "
        f"confirmed={trace.confirmed} -> {path}"
    )
    return 0


def cmd_compare(args) -> int:
    conventions = args.conventions
    report = compare_vs_binary(args.n, args.weights, conventions=conventions)
    rows = [
        (report.n, t.target_index, t.t_fuzzy, t.t_binary, t.outcome) for t in report.per_target
    ]
    path = os.path.join(_out_dir(args.out_dir), args.out)
    write_csv_atomic(path, COMPARISON_HEADER, rows, seed=0)
    print(
        f"win_rate={report.win_rate:.3f}, {report.wins}/{report.draws}/{report.losses} "
        f"(fuzzy_stop={conventions.fuzzy_stop}, binary={conventions.binary}) -> {path}"
    )
    return 0


def cmd_optimize(args) -> int:
    weights, report = optimize_weights(args.n, resolution=args.resolution, conventions=args.conventions)
    path = os.path.join(_out_dir(args.out_dir), args.out)
    write_csv_atomic(
        path,
        ("n", "w_slightly", "w_moderately", "w_significantly", "wins", "draws", "losses", "win_rate"),
        [
            (
                args.n,
                repr(weights.slightly),
                repr(weights.moderately),
                repr(weights.significantly),
                report.wins,
                report.draws,
                report.losses,
                f"{report.win_rate:.6f}",
            )
        ],
        seed=0,
    )
    print(
        f"n={args.n} optimum w=({weights.slightly:g},{weights.moderately:g},{weights.significantly:g}) "
        f"win_rate={report.win_rate:.3f} ({report.wins}/{report.draws}/{report.losses}) -> {path}"
    )
    return 0


def _reproduce_table1(out_dir: str) -> List[str]:
    rows = []
    problems = []
    for n, ws, wm, wg, wins, draws, losses in COMPARISON_SUMMARY:
        report = compare_vs_binary(n, StepWeights(ws, wm, wg), conventions=CALIBRATED_CONVENTIONS)
        match = (report.wins, report.draws, report.losses) == (wins, draws, losses)
        rows.append(
            (n, ws, wm, wg, wins, draws, losses, report.wins, report.draws, report.losses, match)
        )
        if n == 9 and not match:
            problems.append(
                f"table1 n=9 split {report.wins}/{report.draws}/{report.losses} != "
                f"published {wins}/{draws}/{losses}"
            )
    write_csv_atomic(
        os.path.join(out_dir, "table1.csv"),
        (
            "n", "w_slightly", "w_moderately", "w_significantly",
            "published_wins", "published_draws", "published_losses",
            "ours_wins", "ours_draws", "ours_losses", "split_match",
        ),
        rows,
        seed=0,
    )
    return problems


def _reproduce_table2(out_dir: str) -> List[str]:
    report = compare_vs_binary(9, N9_WEIGHTS, conventions=CALIBRATED_CONVENTIONS)
    rows = []
    for t in report.per_target:
        rows.append(
            (
                t.target_index,
                N9_FUZZY_COLUMN[t.target_index],
                t.t_fuzzy,
                N9_BINARY_COLUMN[t.target_index],
                t.t_binary,
                t.outcome,
            )
        )
    write_csv_atomic(
        os.path.join(out_dir, "table2.csv"),
        ("target_index", "published_t_fuzzy", "ours_t_fuzzy", "published_t_binary", "ours_t_binary", "ours_outcome"),
        rows,
        seed=0,
    )
    split = (report.wins, report.draws, report.losses)
    return [] if split == N9_HEADLINE else [f"table2 split {split} != published headline {N9_HEADLINE}"]


def _reproduce_table3(out_dir: str) -> List[str]:
    from .tolerant import classify_pair

    problems = []
    rows = []
    for first, second, expected in OPPOSITE_PAIR_RULES:
        got = classify_pair(_mod(first), _mod(second))
        rows.append((first, second, _action_label(expected), _action_label(got), got is expected))
        if got is not expected:
            problems.append(f"table3 {first} & {second}: {got} != {expected}")
    write_csv_atomic(
        os.path.join(out_dir, "table3.csv"),
        ("first_input", "second_input", "published_action", "ours_action", "match"),
        rows,
        seed=0,
    )
    return problems


def _reproduce_worked_trace(out_dir: str, name: str, rows, target) -> List[str]:
    replayed, checks, ok = check_worked_trace(rows, target)
    csv_rows = []
    for want, got in zip(rows, replayed):
        csv_rows.append(
            (
                want.step,
                repr(got.lower),
                repr(got.upper),
                repr(got.position),
                got.modifier.power.label,
                got.modifier.direction.label,
                repr(got.dx),
                repr(got.variant),
                "error" if want.is_error else "",
            )
        )
    write_csv_atomic(
        os.path.join(out_dir, f"{name}.csv"),
        ("step", "a", "b", "x", "power", "direction", "dx", "snapped_x", "flag"),
        csv_rows,
        seed=0,
    )
    if ok:
        return []
    return [
        f"{name} step {c.step} {c.field}: expected {c.expected!r}, got {c.actual!r}"
        for c in checks
        if not c.ok
    ]


def cmd_reproduce(args) -> int:
    out_dir = _out_dir(args.out_dir)
    os.makedirs(out_dir, exist_ok=True)
    wanted = ("1", "2", "3", "4", "5") if args.table == "all" else (args.table,)
    problems: List[str] = []
    if "1" in wanted:
        problems += _reproduce_table1(out_dir)
    if "2" in wanted:
        problems += _reproduce_table2(out_dir)
    if "3" in wanted:
        problems += _reproduce_table3(out_dir)
    if "4" in wanted:
        problems += _reproduce_worked_trace(out_dir, "table4", WORKED_TRACE_A, WORKED_TRACE_A_TARGET)
    if "5" in wanted:
        problems += _reproduce_worked_trace(out_dir, "table5", WORKED_TRACE_B, WORKED_TRACE_B_TARGET)

    report_lines = ["known divergences from the published tables:"]
    report_lines += [f"  - {d}" for d in DIVERGENCES]
    calibration = calibrate_binary()
    report_lines.append("")
    report_lines += [f"calibration: {note}" for note in calibration.notes]
    report_path = os.path.join(out_dir, "divergence_report.txt")
    fd, tmp = tempfile.mkstemp(dir=out_dir, suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write("\n".join(report_lines) + "\n")
    os.replace(tmp, report_path)

    if problems:
        for p in problems:
            print(f"GOLDEN MISMATCH: {p}", file=sys.stderr)
        return 1
    print(f"reference tables reproduced into {out_dir} (divergence report: {report_path})")
    return 0


def cmd_calibrate(args) -> int:
    report = calibrate_binary()
    rows = [
        (
            e.fuzzy_stop,
            e.binary,
            e.split[0],
            e.split[1],
            e.split[2],
            e.reproduces_headline,
            e.binary_column_matches,
            e.fuzzy_column_matches,
        )
        for e in report.entries
    ]
    path = os.path.join(_out_dir(args.out_dir), args.out)
    write_csv_atomic(
        path,
        (
            "fuzzy_stop", "binary_convention", "wins", "draws", "losses",
            "reproduces_headline", "binary_column_matches", "fuzzy_column_matches",
        ),
        rows,
        seed=0,
    )
    for note in report.notes:
        print(note)
    print(f"-> {path}")
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    serve(args.data_dir, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semdiff", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one simulated refinement and write its trace")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--target-index", type=int, required=True)
    p.add_argument("--weights", type=_parse_weights, default=StepWeights(0.25, 0.35, 0.45))
    p.add_argument("--algorithm", choices=("simple", "tolerant"), default="simple")
    p.add_argument("--stop", choices=("precision", "confirm"), default="precision")
    p.add_argument("--policy", choices=("error-free", "erroneous"), default="error-free")
    p.add_argument("--p-err", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="trace.csv")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="per-target comparison against the binary baseline")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--weights", type=_parse_weights, required=True)
    p.add_argument("--conventions", type=_conventions, default=CALIBRATED_CONVENTIONS)
    p.add_argument("--out", default="comparison.csv")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("optimize-weights", help="brute-force weight search")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--resolution", type=float, default=0.01)
    p.add_argument("--conventions", type=_conventions, default=DEFAULT_CONVENTIONS)
    p.add_argument("--out", default="optimum.csv")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("reproduce-tables", help="rebuild the published reference tables")
    p.add_argument("--table", choices=("1", "2", "3", "4", "5", "all"), default="all")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("calibrate-binary", help="survey binary conventions against published data")
    p.add_argument("--out", default="calibration.csv")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("serve", help="run the session service")
    p.add_argument("--data-dir", default="./semdiff-sessions")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8764)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
