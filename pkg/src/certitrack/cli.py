"""Command-line front end.

Subcommands:
  solve       track a target system from a chosen start (all paths for the
              total-degree start, one path otherwise); writes a solutions CSV
  track       like solve, but also writes the per-step trace CSV of one path
  bench       average steps per path on random or Katsura targets
  conjecture  compare good / total-degree / random start pairs on random
              degree-2 targets
  entropy     root-hit histogram and Shannon entropy of the random start pair

CSV columns are fixed per subcommand (see the writers below); floats are
printed with 17 significant digits so reruns with the same seed produce
byte-identical files.  Wall-clock times go to stderr, never into the CSV.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from .experiments import (
    PAIR_KINDS,
    run_bench,
    run_conjecture,
    run_entropy,
    run_solve,
)
from .heuristic import HeuristicOptions
from .polysys import parse_system_json
from .tracker import TrackerOptions, write_trace_csv
from .start_systems import good_initial_pair, random_initial_pair, total_degree_start
from .bw import normalize_to_sphere
from . import polysys
from .tracker import track_path

FLOAT_FMT = "%.17g"


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return FLOAT_FMT % x


def _load_system(path: str):
    return parse_system_json(Path(path).read_text())


def _write_rows(out: str | None, header: list[str], rows) -> None:
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if out:
            fh.close()


def _solution_rows(solve_rows, n_coords: int):
    rows = []
    for r in solve_rows:
        row = [r.path, r.status, r.steps]
        if r.endpoint is None:
            row += [""] * (2 * n_coords)
        else:
            row += [_fmt(c.real) for c in r.endpoint]
            row += [_fmt(c.imag) for c in r.endpoint]
        rows.append(row)
    return rows


def cmd_solve(args) -> int:
    system = _load_system(args.system)
    opts = TrackerOptions(t_step_min=args.t_step_min, record_trace=False)
    rows = run_solve(system, args.start, args.seed, opts)
    n_coords = (system.n + 1) if isinstance(system, polysys.PolySystem) else system.n + 1
    header = ["path", "status", "steps"]
    header += [f"re{j}" for j in range(n_coords)] + [f"im{j}" for j in range(n_coords)]
    _write_rows(args.out, header, _solution_rows(rows, n_coords))
    failed = sum(1 for r in rows if r.status != "Success")
    print(f"{len(rows) - failed}/{len(rows)} paths succeeded", file=sys.stderr)
    return 1 if failed == len(rows) else 0


def cmd_track(args) -> int:
    system = _load_system(args.system)
    if isinstance(system, polysys.AffineSystem):
        system = polysys.homogenize(system)
    f = normalize_to_sphere(system)
    opts = TrackerOptions(t_step_min=args.t_step_min, record_trace=True)
    seed = args.seed
    if args.start == "total":
        start = total_degree_start(f.degrees, np.random.default_rng([seed, 1]))
        g, z0 = start.g, start.roots[args.path]
    elif args.start == "good":
        pair = good_initial_pair(f.degrees)
        g, z0 = pair.g, pair.zeta0
    else:
        pair = random_initial_pair(f.degrees, np.random.default_rng([seed, 2]))
        g, z0 = pair.g, pair.zeta0
    result = track_path(g, f, z0, opts)
    write_trace_csv(result, args.out or "/dev/stdout")
    print(f"status={result.status.value} steps={result.num_steps}", file=sys.stderr)
    return 0 if result.success else 1


def cmd_bench(args) -> int:
    degrees = [int(d) for d in args.degrees.split(",")] if args.degrees else None
    trackers = ("certified", "heuristic") if args.tracker == "both" else (args.tracker,)
    reports = run_bench(
        family=args.family,
        degrees=degrees,
        n=args.n,
        trials=args.trials,
        trackers=trackers,
        seed=args.seed,
        threads=args.threads,
        opts=TrackerOptions(record_trace=False),
        heuristic_opts=HeuristicOptions(record_trace=False),
    )
    rows = []
    for kind, report in reports.items():
        for p in report.per_path:
            rows.append([p.trial, p.path, p.tracker, p.status, p.steps])
    _write_rows(args.out, ["trial", "path", "tracker", "status", "steps"], rows)
    for kind, report in reports.items():
        print(
            f"{kind}: mean_steps={report.mean_steps:.6g} variance={report.variance_steps:.6g} "
            f"failures={report.failures} wall_time_s={report.wall_time_s:.2f}",
            file=sys.stderr,
        )
    return 0


def cmd_conjecture(args) -> int:
    reports = run_conjecture(
        n=args.n,
        trials=args.trials,
        seed=args.seed,
        threads=args.threads,
        verify_bound=args.verify_bound,
    )
    header = ["kind", "n", "trials", "mean_steps", "variance_steps", "failures", "bound"]
    rows = [
        [r.kind, r.n, r.trials, _fmt(r.mean_steps), _fmt(r.variance_steps), r.failures, _fmt(r.bound)]
        for r in reports
    ]
    _write_rows(args.out, header, rows)
    violations = sum(r.bound_violations for r in reports)
    if args.verify_bound:
        print(f"step-bound violations: {violations}", file=sys.stderr)
    return 1 if violations else 0


def cmd_entropy(args) -> int:
    degrees = [int(d) for d in args.degrees.split(",")]
    report = run_entropy(
        degrees,
        epsilon=args.epsilon,
        runs=args.runs,
        variant=args.variant,
        seed=args.seed,
        threads=args.threads,
    )
    rows = [[i, hits] for i, hits in enumerate(report.root_hits)]
    _write_rows(args.out, ["root", "hits"], rows)
    print(
        f"runs={report.runs} failures={report.failures} entropy_bits={report.entropy_bits:.6f} "
        f"(max {math.log2(len(report.root_hits)):.6f})",
        file=sys.stderr,
    )
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="master seed (unsigned 64-bit)")
    p.add_argument("--out", type=str, default=None, help="output CSV path (default: stdout)")
    p.add_argument("--threads", type=int, default=1, help="worker processes for trials")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="certitrack", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="track a target system to its solutions")
    p.add_argument("system", help="system file (JSON: degrees + terms)")
    p.add_argument("--start", choices=["total", "good", "random"], default="total")
    p.add_argument("--t-step-min", type=float, default=1e-6)
    _add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("track", help="track one path and dump its step trace")
    p.add_argument("system")
    p.add_argument("--start", choices=["total", "good", "random"], default="total")
    p.add_argument("--path", type=int, default=0, help="start-root index for --start total")
    p.add_argument("--t-step-min", type=float, default=1e-6)
    _add_common(p)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("bench", help="steps-per-path benchmark")
    p.add_argument("--family", choices=["random", "katsura"], required=True)
    p.add_argument("--degrees", type=str, default=None, help="comma-separated, e.g. 2,2")
    p.add_argument("--n", type=int, default=None, help="Katsura size")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--tracker", choices=["certified", "heuristic", "both"], default="certified")
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("conjecture", help="compare start pairs on random targets")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=30)
    p.add_argument("--verify-bound", action="store_true", help="check the step bound per path (slow)")
    _add_common(p)
    p.set_defaults(func=cmd_conjecture)

    p = sub.add_parser("entropy", help="root equidistribution of the random pair")
    p.add_argument("--degrees", type=str, default="2,2,2")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--runs", type=int, default=800)
    p.add_argument("--variant", choices=["ball", "unitary"], default="ball")
    _add_common(p)
    p.set_defaults(func=cmd_entropy)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
