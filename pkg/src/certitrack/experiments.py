"""Experiment harness: benchmark step counts, the start-pair comparison
experiment, and the root-equidistribution experiment, all seeded and
reproducible.

Trials are independent and draw their randomness from generators derived
deterministically from (master seed, trial index), so results do not depend
on the number of workers.  Means and variances are computed over successful
paths only; failures are reported in their own column.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import polysys
from .bw import normalize_to_sphere, riemann_distance
from .newton import refine
from .polysys import AffineSystem, PolySystem, space_dimension
from .start_systems import (
    good_initial_pair,
    good_system_raw,
    random_initial_pair,
    random_initial_pair_unitary,
    random_system_on_sphere,
    solve_all_total_degree,
    total_degree_initial_pair,
    total_degree_start,
)
from .tracker import (
    TrackerOptions,
    TrackStatus,
    make_linear_homotopy,
    theorem_step_bound,
    track_linear,
    track_path,
)
from .heuristic import HeuristicOptions, track_heuristic


class AmbiguousMatchError(Exception):
    """An endpoint sits (numerically) equidistant from two reference roots."""


def shannon_entropy(hits) -> float:
    """Entropy in bits of the empirical output distribution; zero-count
    buckets contribute nothing (the 0 log 0 = 0 convention)."""
    counts = np.asarray(list(hits), dtype=np.float64)
    if counts.size == 0 or counts.sum() <= 0:
        raise ValueError("histogram must contain at least one hit")
    if np.any(counts < 0):
        raise ValueError("negative counts make no sense")
    p = counts / counts.sum()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def nearest_root(endpoint, references, tie_tol: float = 1e-12) -> tuple[int, float]:
    """Index and distance of the nearest reference root under d_R."""
    dists = [riemann_distance(endpoint, ref) for ref in references]
    order = np.argsort(dists)
    best = int(order[0])
    if len(dists) > 1 and dists[int(order[1])] - dists[best] <= tie_tol:
        raise AmbiguousMatchError(
            f"endpoint equidistant from roots {best} and {int(order[1])} "
            f"(distances {dists[best]:.6e}, {dists[int(order[1])]:.6e})"
        )
    return best, dists[best]


def match_roots(endpoints, references, tie_tol: float = 1e-12) -> list[int]:
    """Nearest-neighbor assignment of endpoints to reference roots.

    References must be pairwise separated (> 1e-4 in d_R).  Certified
    endpoints of distinct paths land on distinct roots, so the assignment is
    injective for them; ties raise AmbiguousMatchError.
    """
    refs = list(references)
    for i in range(len(refs)):
        for j in range(i + 1, len(refs)):
            if riemann_distance(refs[i], refs[j]) <= 1e-4:
                raise ValueError(f"reference roots {i} and {j} are not separated")
    return [nearest_root(z, refs, tie_tol)[0] for z in endpoints]


def katsura_system(n: int) -> AffineSystem:
    """The Katsura benchmark with n variables: one linear and n-1 quadratic
    equations.

    Variables u_0..u_{n-1}; the linear equation is u_0 + 2(u_1 + ... +
    u_{n-1}) = 1 and the quadratic ones are sum_{|i|<n} u_|i| u_|k-i| = u_k
    for k = 0..n-2, with u_j = 0 for j >= n.  Total degree 2^(n-1).
    """
    if n < 2:
        raise ValueError("the benchmark needs at least 2 variables")

    def e(*pairs):
        expo = [0] * n
        for idx, power in pairs:
            expo[idx] += power
        return tuple(expo)

    equations = []
    linear = [(e((0, 1)), 1.0 + 0.0j)]
    linear += [(e((j, 1)), 2.0 + 0.0j) for j in range(1, n)]
    linear.append((e(), -1.0 + 0.0j))
    equations.append(linear)
    for k in range(n - 1):
        terms: dict[tuple[int, ...], complex] = {}
        for i in range(-(n - 1), n):
            a, b = abs(i), abs(k - i)
            if a >= n or b >= n:
                continue
            key = e((a, 1), (b, 1))
            terms[key] = terms.get(key, 0.0) + 1.0
        key = e((k, 1))
        terms[key] = terms.get(key, 0.0) - 1.0
        equations.append(sorted(terms.items()))
    degrees = [1] + [2] * (n - 1)
    return AffineSystem.from_terms(degrees, equations)


# ---------------------------------------------------------------------------
# Benchmark experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathStat:
    trial: int
    path: int
    tracker: str
    status: str
    steps: int


@dataclass(frozen=True)
class ExperimentReport:
    per_path: tuple[PathStat, ...]
    mean_steps: float
    variance_steps: float
    failures: int
    wall_time_s: float


def _summarize(per_path, wall_time_s: float) -> ExperimentReport:
    good = [p.steps for p in per_path if p.status == TrackStatus.SUCCESS.value]
    failures = len(per_path) - len(good)
    mean = float(np.mean(good)) if good else math.nan
    var = float(np.var(good, ddof=1)) if len(good) > 1 else 0.0
    return ExperimentReport(tuple(per_path), mean, var, failures, wall_time_s)


def _bench_trial(args) -> list[PathStat]:
    family, degrees, n, trial, seed, trackers, opts, heuristic_opts = args
    rows: list[PathStat] = []
    if family == "random":
        rng = np.random.default_rng([seed, trial, 0])
        target = random_system_on_sphere(degrees, rng)
    elif family == "katsura":
        target = normalize_to_sphere(polysys.homogenize(katsura_system(n)))
        degrees = target.degrees
    else:
        raise ValueError(f"unknown family {family!r}")
    start = total_degree_start(degrees, np.random.default_rng([seed, trial, 1]))
    for kind in trackers:
        for path_id, root in enumerate(start.roots):
            if kind == "certified":
                result = track_path(start.g, target, root, opts)
            else:
                hom = make_linear_homotopy(start.g, target)
                result = track_heuristic(hom, root, heuristic_opts)
            rows.append(PathStat(trial, path_id, kind, result.status.value, result.num_steps))
    return rows


def run_bench(
    family: str,
    degrees=None,
    n: int | None = None,
    trials: int = 10,
    trackers=("certified",),
    seed: int = 0,
    threads: int = 1,
    opts: TrackerOptions | None = None,
    heuristic_opts: HeuristicOptions | None = None,
) -> dict[str, ExperimentReport]:
    """Average steps per total-degree path for random or Katsura targets."""
    if opts is None:
        opts = TrackerOptions(record_trace=False)
    if heuristic_opts is None:
        heuristic_opts = HeuristicOptions(record_trace=False)
    if family == "random":
        if degrees is None:
            raise ValueError("the random family needs --degrees")
        degrees = tuple(int(d) for d in degrees)
    elif family == "katsura":
        if n is None:
            raise ValueError("the katsura family needs --n")
        trials = 1  # deterministic benchmark system
    else:
        raise ValueError(f"unknown family {family!r}")
    t0 = time.perf_counter()
    args = [
        (family, degrees, n, trial, seed, tuple(trackers), opts, heuristic_opts)
        for trial in range(trials)
    ]
    rows_nested = _map_trials(_bench_trial, args, threads)
    wall = time.perf_counter() - t0
    reports = {}
    for kind in trackers:
        rows = [p for rows in rows_nested for p in rows if p.tracker == kind]
        reports[kind] = _summarize(rows, wall)
    return reports


# ---------------------------------------------------------------------------
# Start-pair comparison experiment
# ---------------------------------------------------------------------------


PAIR_KINDS = ("good", "total", "random")


@dataclass(frozen=True)
class ConjectureReport:
    kind: str
    n: int
    trials: int
    mean_steps: float
    variance_steps: float
    failures: int
    bound: float
    bound_violations: int


def conjecture_bound(n: int, d: int = 2) -> float:
    """The average-steps bound 71 pi d^{3/2} n N / sqrt(2) for degrees (d,...,d)."""
    N = space_dimension((d,) * n) - 1
    return 71.0 * math.pi * d**1.5 * n * N / math.sqrt(2.0)


def _conjecture_trial(args):
    n, trial, seed, opts, verify_bound = args
    degrees = (2,) * n
    target = random_system_on_sphere(degrees, np.random.default_rng([seed, trial, 0]))
    out = []
    for j, kind in enumerate(PAIR_KINDS):
        rng = np.random.default_rng([seed, trial, 1 + j])
        if kind == "good":
            pair = good_initial_pair(degrees)
        elif kind == "total":
            pair = total_degree_initial_pair(degrees, rng)
        else:
            pair = random_initial_pair(degrees, rng)
        hom = make_linear_homotopy(pair.g, target)
        result = track_linear(hom, pair.zeta0, opts)
        violated = False
        if verify_bound and result.success:
            violated = result.num_steps > theorem_step_bound(hom, pair.zeta0)
        out.append((kind, result.status.value, result.num_steps, violated))
    return out


def run_conjecture(
    n: int,
    trials: int = 30,
    seed: int = 0,
    threads: int = 1,
    opts: TrackerOptions | None = None,
    verify_bound: bool = False,
) -> list[ConjectureReport]:
    """Mean certified steps from the good / total-degree / random start pairs
    to random targets with all degrees 2."""
    if opts is None:
        opts = TrackerOptions(record_trace=False)
    args = [(n, trial, seed, opts, verify_bound) for trial in range(trials)]
    rows_nested = _map_trials(_conjecture_trial, args, threads)
    bound = conjecture_bound(n)
    reports = []
    for kind in PAIR_KINDS:
        stats = [row for rows in rows_nested for row in rows if row[0] == kind]
        good = [steps for _, status, steps, _ in stats if status == TrackStatus.SUCCESS.value]
        failures = len(stats) - len(good)
        violations = sum(1 for *_, v in stats if v)
        mean = float(np.mean(good)) if good else math.nan
        var = float(np.var(good, ddof=1)) if len(good) > 1 else 0.0
        reports.append(
            ConjectureReport(kind, n, trials, mean, var, failures, bound, violations)
        )
    return reports


# ---------------------------------------------------------------------------
# Equidistribution experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EntropyReport:
    root_hits: tuple[int, ...]
    runs: int
    failures: int
    entropy_bits: float


def entropy_target(degrees, epsilon: float, rng: np.random.Generator) -> PolySystem:
    """Perturbed conjectured system: normalize(g + epsilon * h) with h uniform
    on the sphere; one well-conditioned root, the rest poorly conditioned."""
    g = good_system_raw(degrees)
    h = random_system_on_sphere(degrees, rng)
    return normalize_to_sphere(g + epsilon * h)


def _entropy_run(args):
    degrees, variant, run, seed, opts, f, references = args
    rng = np.random.default_rng([seed, 2, run])
    if variant == "ball":
        pair = random_initial_pair(degrees, rng)
    elif variant == "unitary":
        pair = random_initial_pair_unitary(degrees, rng)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    result = track_path(pair.g, f, pair.zeta0, opts)
    if not result.success:
        return None
    root = refine(f, result.endpoint)
    idx, dist = nearest_root(root, references)
    if dist > 1e-4:
        return None
    return idx


def run_entropy(
    degrees,
    epsilon: float = 0.1,
    runs: int = 800,
    variant: str = "ball",
    seed: int = 0,
    threads: int = 1,
    opts: TrackerOptions | None = None,
) -> EntropyReport:
    """Histogram of which root the random start pair discovers, with its
    Shannon entropy; maximal entropy means equidistribution."""
    if opts is None:
        opts = TrackerOptions(record_trace=False)
    degrees = tuple(int(d) for d in degrees)
    f = entropy_target(degrees, epsilon, np.random.default_rng([seed, 0]))
    report = solve_all_total_degree(f, opts, rng=np.random.default_rng([seed, 1]))
    if report.num_failed:
        raise RuntimeError("failed to compute the reference roots of the target")
    references = [refine(f, z) for z in report.endpoints]
    args = [(degrees, variant, run, seed, opts, f, references) for run in range(runs)]
    outcomes = _map_trials(_entropy_run, args, threads)
    hits = [0] * len(references)
    failures = 0
    for idx in outcomes:
        if idx is None:
            failures += 1
        else:
            hits[idx] += 1
    entropy = shannon_entropy(hits) if sum(hits) else math.nan
    return EntropyReport(tuple(hits), runs, failures, entropy)


def _map_trials(fn, args_list, threads: int):
    if threads <= 1:
        return [fn(a) for a in args_list]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, args_list))


# ---------------------------------------------------------------------------
# Solve / track front end
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolveRow:
    path: int
    status: str
    steps: int
    endpoint: np.ndarray | None


def run_solve(
    system: PolySystem | AffineSystem,
    start_kind: str = "total",
    seed: int = 0,
    opts: TrackerOptions | None = None,
) -> list[SolveRow]:
    """Solve a target system: all total-degree paths, or one path from the
    good or random start pair.  Affine inputs are homogenized; every target
    is normalized to the sphere."""
    if opts is None:
        opts = TrackerOptions()
    if isinstance(system, AffineSystem):
        system = polysys.homogenize(system)
    f = normalize_to_sphere(system)
    if start_kind == "total":
        report = solve_all_total_degree(f, opts, rng=np.random.default_rng([seed, 1]))
        return [
            SolveRow(i, r.status.value, r.num_steps, r.endpoint if r.success else None)
            for i, r in enumerate(report.results)
        ]
    if start_kind == "good":
        pair = good_initial_pair(f.degrees)
    elif start_kind == "random":
        pair = random_initial_pair(f.degrees, np.random.default_rng([seed, 2]))
    else:
        raise ValueError(f"unknown start kind {start_kind!r}")
    result = track_path(pair.g, f, pair.zeta0, opts)
    endpoint = result.endpoint if result.success else None
    return [SolveRow(0, result.status.value, result.num_steps, endpoint)]
