"""Pair schedulers, the asynchronous evolution loop, and switching
diagnostics.

A scheduler picks which region pair exchanges at each step. The runner
applies the chosen exchange map, records the coverage cost and
degeneracy monitors, and stops on convergence (small fixed-point
residual), on budget exhaustion, or when a region degenerates.

Also included: empirical persistency checks for schedulers, and a pair
of radial maps on the plane whose switched iterations show why
convergence needs persistent switching. The radius never increases
under either map, yet an adversarial schedule keeps the state circling
the unit circle forever instead of settling.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import gossip as gp
from . import partition as pt
from .geometry import Density, PerformanceFunction, VanishedRegion
from .partition import DegenerateEvolution, Partition


def all_pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


class RoundRobin:
    """Cycles through all pairs in lexicographic order."""

    def __init__(self, n: int):
        self.pairs = all_pairs(n)

    def select(self, t: int, partition: Partition) -> tuple[int, int]:
        return self.pairs[t % len(self.pairs)]


class Periodic:
    """Repeats a fixed pair sequence forever."""

    def __init__(self, sequence):
        self.sequence = [tuple(sorted(p)) for p in sequence]
        if not self.sequence:
            raise ValueError("periodic schedule needs at least one pair")

    def select(self, t: int, partition: Partition) -> tuple[int, int]:
        return self.sequence[t % len(self.sequence)]


class ExplicitSchedule:
    """Plays out a finite pair list; the run ends when it is exhausted."""

    def __init__(self, pairs):
        self.pairs = [tuple(sorted(p)) for p in pairs]

    def select(self, t: int, partition: Partition):
        if t >= len(self.pairs):
            return None
        return self.pairs[t]


class UniformRandom:
    """Independently uniform over all pairs."""

    def __init__(self, n: int, seed: int):
        self.pairs = all_pairs(n)
        self.rng = np.random.default_rng(seed)

    def select(self, t: int, partition: Partition) -> tuple[int, int]:
        return self.pairs[int(self.rng.integers(len(self.pairs)))]


class AdjacentRandom:
    """Uniform over pairs currently within delta of each other."""

    def __init__(self, seed: int, delta: float):
        if delta <= 0.0:
            raise ValueError("adjacency threshold must be positive")
        self.delta = float(delta)
        self.rng = np.random.default_rng(seed)

    def select(self, t: int, partition: Partition):
        pairs = pt.adjacency_pairs(partition, self.delta)
        if not pairs:
            return None
        return pairs[int(self.rng.integers(len(pairs)))]


@dataclass(frozen=True)
class TraceStep:
    t: int
    pair: tuple[int, int]
    h: float
    residual: float
    min_centroid_gap: float
    min_region_area: float
    max_piece_count: int


@dataclass
class EvolutionTrace:
    steps: list = field(default_factory=list)
    final: Partition | None = None
    termination: str = "step_budget"
    final_residual: float = math.nan
    stop_tol: float = math.nan
    snapshots: list = field(default_factory=list)

    def h_series(self) -> np.ndarray:
        return np.array([s.h for s in self.steps])


def run_evolution(initial: Partition, density: Density,
                  perf: PerformanceFunction, scheduler, *,
                  map_kind: str = "gossip", delta: float | None = None,
                  budget: int = 5000, stop_tol: float | None = None,
                  check_every: int = 5, order: int = 6,
                  refine: int = 1, snapshot_steps=()) -> EvolutionTrace:
    """Evolve a partition by scheduled pairwise exchanges.

    map_kind "gossip" applies the full exchange; "partial" the
    distance-limited one (needs delta). The fixed-point residual is
    evaluated every check_every steps (and at the end); the run stops
    once it reaches stop_tol, which defaults to 1e-6 times the
    environment area. Residual entries between evaluations repeat the
    most recent value. A region dropping below the area tolerance aborts
    the run with DegenerateEvolution carrying the partial trace.
    The partition state is recorded before each step listed in
    snapshot_steps; steps past the end of the run record the final
    state.
    """
    env = initial.env
    if stop_tol is None:
        stop_tol = 1e-6 * env.area
    if map_kind == "partial":
        if delta is None:
            raise ValueError("partial map needs delta")
        delta = gp.check_delta(env, delta)
    elif map_kind != "gossip":
        raise ValueError(f"unknown map kind {map_kind!r}")
    residual_mode = "adjacent" if isinstance(scheduler, AdjacentRandom) else "full"
    residual_delta = scheduler.delta if residual_mode == "adjacent" else None

    trace = EvolutionTrace(stop_tol=stop_tol)
    current = initial
    residual = math.nan
    snaps = sorted(set(int(s) for s in snapshot_steps))

    def compute_residual(p: Partition) -> float:
        return gp.fixed_point_residual(p, density, perf, mode=residual_mode,
                                       delta=residual_delta, order=order,
                                       refine=refine)

    for t in range(budget):
        while snaps and snaps[0] <= t:
            trace.snapshots.append((snaps.pop(0), current))
        if t % max(check_every, 1) == 0:
            residual = compute_residual(current)
            if residual <= stop_tol:
                trace.termination = "converged"
                break
        choice = scheduler.select(t, current)
        if choice is None:
            trace.termination = "step_budget"
            break
        i, j = choice
        try:
            if map_kind == "gossip":
                out = gp.gossip_step(current, i, j, density, perf, order, refine)
            else:
                out = gp.partial_gossip_step(current, i, j, delta, density,
                                             perf, order, refine)
        except VanishedRegion as exc:
            trace.termination = "degenerate"
            trace.final = current
            raise DegenerateEvolution(str(exc), step=t, trace=trace) from exc
        current = out.partition
        report = pt.degeneracy_report(current, density, perf, order, refine)
        trace.steps.append(TraceStep(
            t=t, pair=(i, j), h=out.h_after, residual=residual,
            min_centroid_gap=report.min_centroid_gap,
            min_region_area=report.min_region_area,
            max_piece_count=report.max_piece_count))
    else:
        residual = compute_residual(current)
        trace.termination = "converged" if residual <= stop_tol else "step_budget"
    trace.final = current
    for s in snaps:
        trace.snapshots.append((s, current))
    trace.final_residual = residual if not math.isnan(residual) \
        else compute_residual(current)
    if trace.termination == "converged" and trace.final_residual > stop_tol:
        trace.final_residual = compute_residual(current)
    return trace


def run_lloyd(initial: Partition, density: Density,
              perf: PerformanceFunction, *, budget: int = 5000,
              stop_tol: float | None = None, check_every: int = 1,
              order: int = 6, refine: int = 1,
              snapshot_steps=()) -> EvolutionTrace:
    """Synchronous comparison baseline: every region re-seats at once.

    Records the same trace shape as the pairwise runner; the pair field
    is (-1, -1) since all regions move per step.
    """
    env = initial.env
    if stop_tol is None:
        stop_tol = 1e-6 * env.area
    trace = EvolutionTrace(stop_tol=stop_tol)
    current = initial
    residual = math.nan
    snaps = sorted(set(int(s) for s in snapshot_steps))
    for t in range(budget):
        while snaps and snaps[0] <= t:
            trace.snapshots.append((snaps.pop(0), current))
        if t % max(check_every, 1) == 0:
            residual = gp.fixed_point_residual(current, density, perf,
                                               order=order, refine=refine)
            if residual <= stop_tol:
                trace.termination = "converged"
                break
        try:
            current = gp.lloyd_step(current, density, perf, order, refine)
        except VanishedRegion as exc:
            trace.termination = "degenerate"
            trace.final = current
            raise DegenerateEvolution(str(exc), step=t, trace=trace) from exc
        cs = pt.centroids(current, density, perf, order, refine)
        h = pt.multicenter_cost(current, cs, density, perf, order, refine)
        report = pt.degeneracy_report(current, density, perf, order, refine)
        trace.steps.append(TraceStep(
            t=t, pair=(-1, -1), h=h, residual=residual,
            min_centroid_gap=report.min_centroid_gap,
            min_region_area=report.min_region_area,
            max_piece_count=report.max_piece_count))
    else:
        residual = gp.fixed_point_residual(current, density, perf,
                                           order=order, refine=refine)
        trace.termination = "converged" if residual <= stop_tol else "step_budget"
    trace.final = current
    for s in snaps:
        trace.snapshots.append((s, current))
    trace.final_residual = residual if not math.isnan(residual) \
        else gp.fixed_point_residual(current, density, perf,
                                     order=order, refine=refine)
    return trace


# ---------------------------------------------------------------------------
# trace serialization

def write_trace(trace: EvolutionTrace, path_or_file):
    """Line format: t i j h residual min_gap min_area max_pieces."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    f = open(path_or_file, "w") if own else path_or_file
    try:
        f.write("# t i j h residual min_centroid_gap min_region_area max_pieces\n")
        for s in trace.steps:
            f.write(f"{s.t} {s.pair[0]} {s.pair[1]} {s.h!r} {s.residual!r} "
                    f"{s.min_centroid_gap!r} {s.min_region_area!r} "
                    f"{s.max_piece_count}\n")
        f.write(f"# termination {trace.termination} "
                f"residual {trace.final_residual!r}\n")
        if trace.final is not None:
            pt.write_snapshot(trace.final, f,
                              step=trace.steps[-1].t if trace.steps else 0)
    finally:
        if own:
            f.close()


def trace_string(trace: EvolutionTrace) -> str:
    buf = io.StringIO()
    write_trace(trace, buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# persistency checks

def check_uniform_persistency(pair_sequence, pairs, window: int) -> bool:
    """True when every pair occurs in every window of the given length."""
    seq = [tuple(sorted(p)) for p in pair_sequence]
    if len(seq) < 2 * window:
        raise ValueError("sequence too short to judge the window")
    for pair in pairs:
        pair = tuple(sorted(pair))
        hits = [t for t, p in enumerate(seq) if p == pair]
        if not hits:
            return False
        if hits[0] >= window or (len(seq) - 1 - hits[-1]) >= window:
            return False
        if any(b - a > window for a, b in zip(hits, hits[1:])):
            return False
    return True


def _wilson(k: int, n: int, z: float = 1.959963984540054):
    if n == 0:
        return 0.0, 0.0, 0.0
    p = k / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4 * n * n)) / denom
    return p, max(center - half, 0.0), min(center + half, 1.0)


def empirical_persistency(scheduler, partition: Partition, pairs,
                          n_steps: int, window: int) -> dict:
    """Per-pair hit probability over disjoint windows, with 95% Wilson CI.

    The scheduler runs against the fixed partition; selections that
    return None count as idle steps.
    """
    seq = []
    for t in range(n_steps):
        choice = scheduler.select(t, partition)
        seq.append(tuple(sorted(choice)) if choice is not None else None)
    n_windows = len(seq) // window
    stats = {}
    for pair in pairs:
        pair = tuple(sorted(pair))
        k = sum(1 for w in range(n_windows)
                if pair in seq[w * window:(w + 1) * window])
        p, lo, hi = _wilson(k, n_windows)
        stats[pair] = {"p": p, "ci_low": lo, "ci_high": hi,
                       "windows": n_windows, "hits": k}
    return stats


# ---------------------------------------------------------------------------
# radial counterexample maps (polar coordinates, angle kept in [0, 2*pi))

TWO_PI = 2.0 * math.pi


def polar_spiral(rho: float, theta: float) -> tuple[float, float]:
    """Radial contraction that rotates while outside the unit circle."""
    if rho <= 1.0:
        return rho * rho, theta
    return (2.0 * rho - 1.0) / rho, (theta + rho - 1.0) % TWO_PI


def polar_damp(rho: float, theta: float) -> tuple[float, float]:
    """Shrinks the radius on the upper half-plane, identity below."""
    if 0.0 <= theta <= math.pi:
        return (1.0 - math.sin(theta)) * rho, theta
    return rho, theta


@dataclass
class PolarTrace:
    states: np.ndarray  # (n+1, 2) of (rho, theta)
    labels: list  # applied map name per step


def run_polar(mode: str, steps: int, rho0: float,
              theta0: float = 0.0) -> PolarTrace:
    """Switched iteration of the two radial maps.

    "alternating" applies spiral, damp, spiral, ... . "adversarial"
    applies damp only when the angle sits in the lower half-circle and
    the previous applied map was the spiral; there the damp map is the
    identity, so the radius still only decreases through the spiral, and
    the state keeps circling instead of converging.
    """
    rho, theta = float(rho0), float(theta0) % TWO_PI
    states = [(rho, theta)]
    labels = []
    last_was_spiral = False
    for t in range(steps):
        if mode == "alternating":
            use_damp = (t % 2 == 1)
        elif mode == "adversarial":
            use_damp = (math.pi <= theta <= TWO_PI) and last_was_spiral
        else:
            raise ValueError(f"unknown mode {mode!r}")
        if use_damp:
            rho, theta = polar_damp(rho, theta)
            last_was_spiral = False
            labels.append("damp")
        else:
            rho, theta = polar_spiral(rho, theta)
            last_was_spiral = True
            labels.append("spiral")
        states.append((rho, theta))
    return PolarTrace(states=np.array(states), labels=labels)


def spiral_radius_offsets(rho0: float, n: int) -> np.ndarray:
    """rho - 1 along pure spiral iterations from rho0 > 1.

    Iterates the offset x -> x / (1 + x), which is the spiral map in
    shifted coordinates and numerically stable near the unit circle.
    """
    if rho0 <= 1.0:
        raise ValueError("needs a start outside the unit circle")
    x = rho0 - 1.0
    out = np.empty(n)
    for i in range(n):
        x = x / (1.0 + x)
        out[i] = x
    return out


def circular_spread(angles) -> float:
    """Arc length covered: full circle minus the largest angular gap."""
    a = np.sort(np.asarray(angles, dtype=float) % TWO_PI)
    if len(a) == 0:
        return 0.0
    if len(a) == 1:
        return 0.0
    gaps = np.diff(a)
    wrap = a[0] + TWO_PI - a[-1]
    return TWO_PI - max(float(gaps.max()), float(wrap))


def distance_to_polar_limit_set(rho: float, theta: float) -> float:
    """Distance to {radius 1, lower half-circle} union {origin}."""
    theta = theta % TWO_PI
    x = rho * math.cos(theta)
    y = rho * math.sin(theta)
    if math.pi <= theta <= TWO_PI:
        d_arc = abs(rho - 1.0)
    else:
        d_arc = min(math.hypot(x + 1.0, y), math.hypot(x - 1.0, y))
    return min(d_arc, rho)
