"""Robotic-network simulation that drives the distance-limited exchange.

One agent per region. Each agent loops through a three-phase epoch
machine: travel to a waypoint sampled near its region's internal
boundary, wait there for one leg time, then with probability one half
wait a second leg before traveling again. All phases last exactly one
leg time d = diam(Q) / min speed, so agents with different start
offsets stay desynchronized forever.

Pairs of agents within communication radius exchange territory at the
sample times of a rate-limited Poisson process, discretized to the
fixed simulation step: per step an in-range pair trades with
probability 1 - exp(-rate * dt). Each trade applies the
distance-limited pairwise map to the shared partition, so the coverage
cost never increases and far-apart regions are left alone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from . import gossip as gp
from . import partition as pt
from .geometry import Density, GeometryError, PerformanceFunction, Region, \
    VanishedRegion
from .partition import DegenerateEvolution, Environment, Partition
from .switching import _wilson


class SamplingExhausted(GeometryError):
    """Waypoint rejection sampling ran out of attempts."""


# phases of the epoch machine; every phase lasts exactly one leg time
TRAVEL = "travel"
WAIT_1 = "wait1"
WAIT_2 = "wait2"
PHASES = (TRAVEL, WAIT_1, WAIT_2)


def epoch_transition(phase: str, rng) -> str:
    """One step of the three-phase chain.

    travel -> wait1 always; wait1 -> travel or wait2 with equal
    probability; wait2 -> travel always. The stationary split makes a
    full epoch last two or three legs with equal probability.
    """
    if phase == TRAVEL:
        return WAIT_1
    if phase == WAIT_1:
        return TRAVEL if rng.random() < 0.5 else WAIT_2
    if phase == WAIT_2:
        return TRAVEL
    raise ValueError(f"unknown phase {phase!r}")


def phase_frequencies(start: str, n_transitions: int, trials: int,
                      rng) -> dict:
    """Empirical end-phase distribution after a fixed number of
    transitions from a common start phase."""
    counts = dict.fromkeys(PHASES, 0)
    for _ in range(trials):
        phase = start
        for _ in range(n_transitions):
            phase = epoch_transition(phase, rng)
        counts[phase] += 1
    return {k: v / trials for k, v in counts.items()}


@dataclass(frozen=True)
class NetConfig:
    """Motion and communication parameters for the network simulation.

    The waypoint margin (how far destinations may sit from the internal
    boundary) and the trade range of the distance-limited map must both
    stay below a quarter of the communication radius, otherwise waiting
    agents are not guaranteed to hear each other across a shared edge.
    time_step defaults to 1/200 of the leg time; an explicit value is
    snapped so that a leg is a whole number of steps.
    """

    speeds: tuple = (1.0, 1.0, 1.0)
    comm_radius: float = 1.0
    comm_rate: float = 2.0
    waypoint_margin: float = 0.2
    delta: float = 0.2
    time_step: float | None = None
    seed: int = 0

    def __post_init__(self):
        if len(self.speeds) == 0 or min(self.speeds) <= 0.0:
            raise ValueError("speeds must be positive")
        if self.comm_radius <= 0.0 or self.comm_rate < 0.0:
            raise ValueError("communication parameters must be positive")
        if not 0.0 < self.waypoint_margin < 0.25 * self.comm_radius:
            raise ValueError("waypoint margin must sit in (0, comm_radius/4)")
        if not 0.0 < self.delta < 0.25 * self.comm_radius:
            raise ValueError("trade range must sit in (0, comm_radius/4)")
        if self.time_step is not None and self.time_step <= 0.0:
            raise ValueError("time step must be positive")


def leg_time(env: Environment, config: NetConfig) -> float:
    """Duration of every phase: the environment diameter at the slowest
    agent's speed, so any travel leg can finish in time."""
    return env.diameter / float(min(config.speeds))


def _steps_per_leg(env: Environment, config: NetConfig) -> int:
    if config.time_step is None:
        return 200
    return max(1, round(leg_time(env, config) / config.time_step))


# ---------------------------------------------------------------------------
# waypoint sampling

def _dist_to_segments(pts: np.ndarray, s1: np.ndarray,
                      s2: np.ndarray) -> np.ndarray:
    """Per-point distance to the nearest of the given segments."""
    ab = s2 - s1
    den = np.einsum("ij,ij->i", ab, ab)
    den = np.where(den == 0.0, 1.0, den)
    ap = pts[:, None, :] - s1[None, :, :]
    tt = np.clip(np.einsum("pki,ki->pk", ap, ab) / den[None, :], 0.0, 1.0)
    diff = ap - tt[:, :, None] * ab[None, :, :]
    return np.sqrt(np.einsum("pki,pki->pk", diff, diff).min(axis=1))


def internal_boundary_segments(region: Region, env: Environment):
    """Edges of the region's pieces that lie neither on the environment
    wall nor on a seam between two pieces of the same region.

    Returns (starts, ends) arrays; empty when the region has no
    internal boundary (it covers the whole environment).
    """
    tol = 10.0 * env.tol_point
    wall = env.polygon.vertices
    wall_segs = (wall, np.roll(wall, -1, axis=0))
    starts, ends = [], []
    for k, piece in enumerate(region.pieces):
        v = piece.vertices
        nxt = np.roll(v, -1, axis=0)
        for a, b in zip(v, nxt):
            mid = 0.5 * (a + b)
            on_wall = bool(np.all(_dist_to_segments(
                np.array([a, b, mid]), *wall_segs) <= tol))
            if on_wall:
                continue
            seam = False
            for m, other in enumerate(region.pieces):
                if m != k and bool(other.contains(mid, tol=tol)[0]):
                    seam = True
                    break
            if not seam:
                starts.append(a)
                ends.append(b)
    if not starts:
        return np.zeros((0, 2)), np.zeros((0, 2))
    return np.array(starts), np.array(ends)


def random_destination(region: Region, env: Environment, margin: float,
                       rng, max_attempts: int = 10_000) -> np.ndarray:
    """Uniform sample near the region's internal boundary.

    Draws an arc-length-uniform boundary point, offsets it uniformly in
    a disk of the given radius, and rejects draws that fall farther
    than the margin from the internal boundary.
    """
    starts, ends = internal_boundary_segments(region, env)
    if len(starts) == 0:
        raise SamplingExhausted("region has no internal boundary")
    lengths = np.hypot(*(ends - starts).T)
    cum = np.cumsum(lengths)
    total = cum[-1]
    if total <= 0.0:
        raise SamplingExhausted("internal boundary has zero length")
    for _ in range(max_attempts):
        k = int(np.searchsorted(cum, rng.random() * total))
        base = starts[k] + rng.random() * (ends[k] - starts[k])
        r = margin * math.sqrt(rng.random())
        ang = 2.0 * math.pi * rng.random()
        q = base + r * np.array([math.cos(ang), math.sin(ang)])
        if float(_dist_to_segments(q[None, :], starts, ends)[0]) <= margin:
            return q
    raise SamplingExhausted(f"no valid waypoint in {max_attempts} draws")


# ---------------------------------------------------------------------------
# agents and the simulation loop

@dataclass
class AgentState:
    region_index: int
    position: np.ndarray
    clock_offset: float
    phase: str
    steps_left: int
    leg_start: np.ndarray
    destination: np.ndarray


@dataclass(frozen=True)
class CommEvent:
    time: float
    pair: tuple[int, int]
    changed: bool
    traded_area: float
    h: float


@dataclass
class NetTrace:
    config: NetConfig
    leg: float
    dt: float
    events: list = field(default_factory=list)
    transitions: dict = field(default_factory=dict)
    snapshots: list = field(default_factory=list)
    final: Partition | None = None
    termination: str = "horizon"
    elapsed: float = 0.0

    def h_series(self) -> np.ndarray:
        return np.array([e.h for e in self.events])


def _start_position(region: Region) -> np.ndarray:
    big = max(region.pieces, key=lambda p: p.area)
    return geo.mass_centroid(Region((big,)), geo.UniformDensity())


def simulate(config: NetConfig, initial: Partition, density: Density,
             perf: PerformanceFunction, duration: float, *,
             order: int = 6, refine: int = 1,
             snapshot_times=()) -> NetTrace:
    """Run the network for the given duration of simulated time.

    Agents start at their region's reference point, hold still for
    their clock offset (uniform over one leg), then loop through the
    epoch machine. Each simulation step advances motion first and then
    flips a coin per in-range pair for a trade. A vanished region
    aborts the run with the partial trace attached.
    """
    env = initial.env
    n = initial.n
    if len(config.speeds) != n:
        raise ValueError(f"{len(config.speeds)} speeds for {n} regions")
    leg = leg_time(env, config)
    per_leg = _steps_per_leg(env, config)
    dt = leg / per_leg
    p_comm = 1.0 - math.exp(-config.comm_rate * dt)
    rng = np.random.default_rng(config.seed)
    current = initial
    trace = NetTrace(config=config, leg=leg, dt=dt)
    counts = trace.transitions

    agents = []
    for i in range(n):
        pos = _start_position(current.regions[i])
        hold = int(rng.integers(per_leg))
        agents.append(AgentState(
            region_index=i, position=pos, clock_offset=hold * dt,
            phase=WAIT_1 if hold > 0 else TRAVEL,
            steps_left=hold if hold > 0 else per_leg,
            leg_start=pos, destination=pos))
    for a in agents:
        if a.phase == TRAVEL:
            a.destination = random_destination(
                current.regions[a.region_index], env,
                config.waypoint_margin, rng)
    # the initial hold is not an epoch phase: it only desynchronizes
    # clocks, so it is excluded from the transition counts
    held = [a.phase == WAIT_1 for a in agents]

    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    snap_times = sorted(float(t) for t in snapshot_times)
    snap_idx = 0
    total_steps = max(0, round(duration / dt))
    t = 0.0
    for k in range(total_steps):
        while snap_idx < len(snap_times) and snap_times[snap_idx] <= t + 0.5 * dt:
            trace.snapshots.append((snap_times[snap_idx], current))
            snap_idx += 1
        for idx, a in enumerate(agents):
            a.steps_left -= 1
            if a.phase == TRAVEL:
                frac = (per_leg - a.steps_left) / per_leg
                a.position = a.leg_start + frac * (a.destination - a.leg_start)
            if a.steps_left == 0:
                if held[idx]:
                    held[idx] = False
                    nxt = TRAVEL
                else:
                    nxt = epoch_transition(a.phase, rng)
                    key = (a.phase, nxt)
                    counts[key] = counts.get(key, 0) + 1
                if nxt == TRAVEL:
                    a.leg_start = a.position.copy()
                    a.destination = random_destination(
                        current.regions[a.region_index], env,
                        config.waypoint_margin, rng)
                a.phase = nxt
                a.steps_left = per_leg
        t = (k + 1) * dt
        for (i, j) in pairs:
            dx = agents[i].position[0] - agents[j].position[0]
            dy = agents[i].position[1] - agents[j].position[1]
            if math.hypot(dx, dy) > config.comm_radius:
                continue
            if rng.random() >= p_comm:
                continue
            try:
                out = gp.partial_gossip_step(current, i, j, config.delta,
                                             density, perf, order, refine)
            except VanishedRegion as exc:
                trace.final = current
                trace.termination = "degenerate"
                trace.elapsed = t
                raise DegenerateEvolution(str(exc), step=k,
                                          trace=trace) from exc
            current = out.partition
            trace.events.append(CommEvent(
                time=t, pair=(i, j), changed=out.changed,
                traded_area=out.traded_area, h=out.h_after))
    while snap_idx < len(snap_times):
        trace.snapshots.append((snap_times[snap_idx], current))
        snap_idx += 1
    trace.final = current
    trace.elapsed = total_steps * dt
    return trace


# ---------------------------------------------------------------------------
# log analysis

def analyze_log(events, duration: float, window: float, pairs) -> dict:
    """Per-pair contact statistics over a finished run.

    For each pair: event count, largest gap between consecutive
    contacts (run boundaries included), and the fraction of disjoint
    windows containing at least one contact, with a 95% score CI.
    """
    if window <= 0.0 or duration <= 0.0:
        raise ValueError("duration and window must be positive")
    times = {tuple(sorted(p)): [] for p in pairs}
    for e in events:
        key = tuple(sorted(e.pair))
        if key in times:
            times[key].append(e.time)
    n_windows = int(duration / window)
    stats = {}
    for key, ts in times.items():
        if ts:
            bounds = [0.0] + ts + [duration]
            max_gap = float(max(b - a for a, b in zip(bounds, bounds[1:])))
        else:
            max_gap = float(duration)
        hits = len({int(x / window) for x in ts if x < n_windows * window})
        p, lo, hi = _wilson(hits, n_windows)
        stats[key] = {"count": len(ts), "max_gap": max_gap, "p": p,
                      "ci_low": lo, "ci_high": hi, "windows": n_windows,
                      "hits": hits}
    return stats


def write_comm_log(trace: NetTrace, path_or_file):
    """Line format: time i j changed h (shared with the step traces)."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file,
                                                            "__fspath__")
    f = open(path_or_file, "w") if own else path_or_file
    try:
        f.write("# time i j changed h\n")
        for e in trace.events:
            f.write(f"{e.time!r} {e.pair[0]} {e.pair[1]} "
                    f"{int(e.changed)} {e.h!r}\n")
        f.write(f"# termination {trace.termination} elapsed {trace.elapsed!r}\n")
        if trace.final is not None:
            pt.write_snapshot(trace.final, f)
    finally:
        if own:
            f.close()
