"""Experiment runner: config parsing, orchestration, artifact emission.

Configs are single YAML files (see the shipped presets). The `run`
command executes one experiment and writes a step trace, a coverage
cost CSV, SVG snapshots, and a plain-text summary into the output
directory. `compare` runs several exchange algorithms from the same
start and emits their cost series side by side.

Exit codes: 0 success, 2 bad config, 3 degenerate evolution, 4 budget
or horizon exhausted without convergence.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from importlib import resources

import numpy as np
import yaml

from . import dyadic as dy
from . import geometry as geo
from . import gossip as gp
from . import netsim as ns
from . import partition as pt
from . import svg
from . import switching as sw
from .partition import DegenerateEvolution, Environment, Partition

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3
EXIT_BUDGET = 4

MIXED_CHECK_TOL = 1e-4  # of the environment area, for netsim end states


class ConfigError(Exception):
    """Config problem, message prefixed with the offending field path."""


# ---------------------------------------------------------------------------
# config loading

def _get(cfg: dict, path: str, default=None, required: bool = False):
    node = cfg
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            if required:
                raise ConfigError(f"{path}: missing required field")
            return default
        node = node[part]
    return node


def _number(cfg, path, default=None, required=False, positive=False):
    val = _get(cfg, path, default, required)
    if val is None:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {val!r}")
    if positive and val <= 0:
        raise ConfigError(f"{path}: must be positive")
    return float(val)


def preset_names() -> list:
    root = resources.files("gossipcover") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def load_config(path_or_name: str) -> dict:
    """Read a YAML config from a file path or a shipped preset name."""
    if os.path.exists(path_or_name):
        with open(path_or_name) as f:
            text = f.read()
    else:
        res = resources.files("gossipcover") / "presets" / f"{path_or_name}.yaml"
        if not res.is_file():
            raise ConfigError(
                f"config: no file {path_or_name!r} and no preset of that name "
                f"(presets: {', '.join(preset_names())})")
        text = res.read_text()
    try:
        cfg = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config: invalid YAML ({exc})") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config: top level must be a mapping")
    return cfg


# ---------------------------------------------------------------------------
# building blocks from config sections

def build_environment(cfg: dict) -> Environment:
    rect = _get(cfg, "environment.rectangle")
    verts = _get(cfg, "environment.vertices")
    if rect is not None:
        if (not isinstance(rect, (list, tuple)) or len(rect) != 2):
            raise ConfigError("environment.rectangle: expected [width, height]")
        return pt.rectangle(float(rect[0]), float(rect[1]))
    if verts is not None:
        try:
            return pt.environment(verts)
        except (ValueError, geo.GeometryError) as exc:
            raise ConfigError(f"environment.vertices: {exc}") from exc
    raise ConfigError("environment: needs rectangle or vertices")


def build_density(cfg: dict):
    kind = _get(cfg, "density.kind", "uniform")
    if kind == "uniform":
        return geo.UniformDensity(_number(cfg, "density.value", 1.0,
                                          positive=True))
    if kind == "grid":
        extent = _get(cfg, "density.extent", required=True)
        values = _get(cfg, "density.values", required=True)
        try:
            return geo.GridDensity(*extent, values)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"density: {exc}") from exc
    raise ConfigError(f"density.kind: unknown kind {kind!r}")


def build_performance(cfg: dict):
    kind = _get(cfg, "performance.kind", "quadratic")
    if kind == "quadratic":
        return geo.quadratic_performance()
    if kind == "linear":
        return geo.linear_performance()
    raise ConfigError(f"performance.kind: unknown kind {kind!r}")


def strip_partition(env: Environment, cuts) -> Partition:
    """Vertical strip split of a convex environment at the given x cuts."""
    xs = sorted(float(c) for c in cuts)
    lo = float(env.polygon.vertices[:, 0].min())
    hi = float(env.polygon.vertices[:, 0].max())
    bounds = [lo] + xs + [hi]
    regions = []
    for a, b in zip(bounds, bounds[1:]):
        piece = geo.clip_convex(env.polygon, geo.HalfPlane((1.0, 0.0), b),
                                min_area=env.sliver_area)
        piece = geo.clip_convex(piece, geo.HalfPlane((-1.0, 0.0), -a),
                                min_area=env.sliver_area)
        if piece is None:
            raise ConfigError(f"initial.cuts: empty strip [{a}, {b}]")
        regions.append(geo.Region((piece,)))
    return Partition(env, tuple(regions))


def random_generators(env: Environment, n: int, seed: int) -> np.ndarray:
    """n points uniform over the environment, kept off the boundary."""
    rng = np.random.default_rng(seed)
    v = env.polygon.vertices
    lo, hi = v.min(axis=0), v.max(axis=0)
    margin = -1e-3 * env.diameter
    out = []
    while len(out) < n:
        cand = rng.uniform(lo, hi, size=2)
        if bool(env.polygon.contains(cand, tol=margin)[0]):
            out.append(cand)
    return np.array(out)


def build_initial(cfg: dict, env: Environment, seed: int) -> Partition:
    kind = _get(cfg, "initial.kind", required=True)
    n = _get(cfg, "n")
    if kind == "random_voronoi":
        if not isinstance(n, int) or n < 1:
            raise ConfigError("n: needs a positive region count")
        init_seed = _get(cfg, "initial.seed", seed)
        return pt.voronoi(env, random_generators(env, n, int(init_seed)))
    if kind == "strips":
        cuts = _get(cfg, "initial.cuts", required=True)
        part = strip_partition(env, cuts)
        if n is not None and part.n != n:
            raise ConfigError(f"initial.cuts: {part.n} strips but n={n}")
        return part
    if kind == "pieces":
        entries = _get(cfg, "initial.regions", required=True)
        try:
            regions = tuple(geo.region_of(*rings) for rings in entries)
            return Partition(env, regions)
        except (ValueError, geo.GeometryError) as exc:
            raise ConfigError(f"initial.regions: {exc}") from exc
    raise ConfigError(f"initial.kind: unknown kind {kind!r}")


def build_scheduler(cfg: dict, n: int, seed: int):
    kind = _get(cfg, "scheduler.kind", "adjacent_random")
    if kind == "round_robin":
        return sw.RoundRobin(n)
    if kind == "uniform_random":
        return sw.UniformRandom(n, seed)
    if kind == "adjacent_random":
        delta = _number(cfg, "scheduler.delta", 1e-9, positive=True)
        return sw.AdjacentRandom(seed=seed, delta=delta)
    if kind == "periodic":
        seq = _get(cfg, "scheduler.sequence", required=True)
        try:
            return sw.Periodic(seq)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"scheduler.sequence: {exc}") from exc
    raise ConfigError(f"scheduler.kind: unknown kind {kind!r}")


def parse_snapshot_list(text: str) -> list:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"snapshots: {exc}") from exc


# ---------------------------------------------------------------------------
# artifact writers

def _ensure_out(out_dir: str) -> str:
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"out: cannot create {out_dir!r} ({exc})") from exc
    return out_dir


def write_h_csv(trace: sw.EvolutionTrace, path: str):
    with open(path, "w") as f:
        f.write("t,h,residual\n")
        for s in trace.steps:
            res = "" if math.isnan(s.residual) else repr(s.residual)
            f.write(f"{s.t},{s.h!r},{res}\n")


def write_snapshots(snapshots, out_dir: str, density, perf, log):
    for tag, part in snapshots:
        name = f"snapshot-{tag:g}.svg"
        cs = pt.centroids(part, density, perf)
        residue = svg.write_svg(part, os.path.join(out_dir, name), points=cs,
                                label=f"t={tag:g}")
        log(f"{name}: area residue {residue:.3e} "
            f"(budget {part.n * part.env.tol_area:.3e})")


def _trace_minima(trace: sw.EvolutionTrace) -> dict:
    if not trace.steps:
        return {"min_region_area": math.nan, "min_centroid_gap": math.nan,
                "max_piece_count": 0}
    return {
        "min_region_area": min(s.min_region_area for s in trace.steps),
        "min_centroid_gap": min(s.min_centroid_gap for s in trace.steps),
        "max_piece_count": max(s.max_piece_count for s in trace.steps),
    }


def write_summary(path: str, entries: dict):
    with open(path, "w") as f:
        for k, v in entries.items():
            f.write(f"{k} {v}\n")


# ---------------------------------------------------------------------------
# run modes

def _run_pairwise(cfg, args, out_dir, seed, log) -> int:
    env = build_environment(cfg)
    density = build_density(cfg)
    perf = build_performance(cfg)
    initial = build_initial(cfg, env, seed)
    algo = _get(cfg, "algorithm.kind", "gossip")
    budget = int(_number(cfg, "budget", 5000, positive=True))
    stop_tol = _number(cfg, "stop_tol")
    check_every = int(_number(cfg, "check_every", 5, positive=True))
    snaps = args.snapshot_list if args.snapshot_list is not None \
        else [float(s) for s in _get(cfg, "snapshots", [])]

    started = time.perf_counter()
    code = EXIT_OK
    try:
        if algo == "lloyd":
            trace = sw.run_lloyd(initial, density, perf, budget=budget,
                                 stop_tol=stop_tol,
                                 snapshot_steps=[int(s) for s in snaps])
        else:
            delta = _number(cfg, "algorithm.delta",
                            required=(algo == "partial"), positive=True)
            scheduler = build_scheduler(cfg, initial.n, seed)
            trace = sw.run_evolution(
                initial, density, perf, scheduler, map_kind=algo,
                delta=delta, budget=budget, stop_tol=stop_tol,
                check_every=check_every,
                snapshot_steps=[int(s) for s in snaps])
    except DegenerateEvolution as exc:
        trace = exc.trace
        code = EXIT_DEGENERATE
        log(f"degenerate evolution at step {exc.step}: {exc}")
    except ValueError as exc:
        raise ConfigError(f"algorithm: {exc}") from exc
    wall = time.perf_counter() - started

    sw.write_trace(trace, os.path.join(out_dir, "trace.txt"))
    write_h_csv(trace, os.path.join(out_dir, "h_series.csv"))
    write_snapshots(trace.snapshots, out_dir, density, perf, log)
    if code == EXIT_OK and trace.termination == "step_budget":
        code = EXIT_BUDGET
    entries = {
        "algorithm": algo, "seed": seed, "steps": len(trace.steps),
        "termination": trace.termination,
        "converged": trace.termination == "converged",
        "final_residual": repr(trace.final_residual),
        "stop_tol": repr(trace.stop_tol), "wall_time": f"{wall:.3f}",
    }
    entries.update(_trace_minima(trace))
    write_summary(os.path.join(out_dir, "summary.txt"), entries)
    log(f"{algo}: {trace.termination} after {len(trace.steps)} steps, "
        f"residual {trace.final_residual:.3e}, {wall:.1f}s")
    return code


def _run_netsim(cfg, args, out_dir, seed, log) -> int:
    env = build_environment(cfg)
    density = build_density(cfg)
    perf = build_performance(cfg)
    initial = build_initial(cfg, env, seed)
    try:
        config = ns.NetConfig(
            speeds=tuple(_get(cfg, "algorithm.speeds", [1.0] * initial.n)),
            comm_radius=_number(cfg, "algorithm.comm_radius", 1.0,
                                positive=True),
            comm_rate=_number(cfg, "algorithm.comm_rate", 2.0, positive=True),
            waypoint_margin=_number(cfg, "algorithm.waypoint_margin", 0.2,
                                    positive=True),
            delta=_number(cfg, "algorithm.delta", 0.2, positive=True),
            time_step=_number(cfg, "algorithm.time_step"),
            seed=seed)
    except ValueError as exc:
        raise ConfigError(f"algorithm: {exc}") from exc
    horizon_legs = _number(cfg, "algorithm.horizon_legs", 500.0, positive=True)
    leg = ns.leg_time(env, config)
    snaps = args.snapshot_list if args.snapshot_list is not None \
        else [float(s) for s in _get(cfg, "snapshots", [])]

    started = time.perf_counter()
    code = EXIT_OK
    try:
        trace = ns.simulate(config, initial, density, perf,
                            horizon_legs * leg,
                            snapshot_times=[s * leg for s in snaps])
    except DegenerateEvolution as exc:
        trace = exc.trace
        code = EXIT_DEGENERATE
        log(f"degenerate evolution: {exc}")
    wall = time.perf_counter() - started

    ns.write_comm_log(trace, os.path.join(out_dir, "comm_log.txt"))
    with open(os.path.join(out_dir, "h_series.csv"), "w") as f:
        f.write("time,h\n")
        for e in trace.events:
            f.write(f"{e.time!r},{e.h!r}\n")
    write_snapshots([(t / leg, p) for t, p in trace.snapshots], out_dir,
                    density, perf, log)
    mixed = False
    if trace.final is not None:
        mixed = pt.is_mixed_centroidal(trace.final, density, perf,
                                       tol=MIXED_CHECK_TOL * env.area)
    if code == EXIT_OK and not mixed:
        code = EXIT_BUDGET
    changed = sum(1 for e in trace.events if e.changed)
    stats = ns.analyze_log(trace.events, trace.elapsed or horizon_legs * leg,
                           5.0 * leg, pt.adjacency_pairs(initial, config.delta))
    entries = {
        "algorithm": "netsim", "seed": seed, "leg_time": repr(leg),
        "events": len(trace.events), "effective_trades": changed,
        "termination": trace.termination, "mixed_centroidal": mixed,
        "wall_time": f"{wall:.3f}",
    }
    for pair, s in sorted(stats.items()):
        entries[f"pair_{pair[0]}_{pair[1]}"] = (
            f"count {s['count']} max_gap {s['max_gap']:.3f} "
            f"hit_p {s['p']:.3f} ci [{s['ci_low']:.3f}, {s['ci_high']:.3f}]")
    write_summary(os.path.join(out_dir, "summary.txt"), entries)
    log(f"netsim: {len(trace.events)} contacts ({changed} effective), "
        f"mixed centroidal: {mixed}, {wall:.1f}s")
    return code


NEAR_CIRCLE_BAND = 0.05


def _run_polar(cfg, args, out_dir, seed, log) -> int:
    mode = _get(cfg, "algorithm.mode", required=True)
    steps = int(_number(cfg, "algorithm.steps", required=True, positive=True))
    rho0 = _number(cfg, "algorithm.rho0", required=True, positive=True)
    theta0 = _number(cfg, "algorithm.theta0", 0.0)
    try:
        trace = sw.run_polar(mode, steps, rho0, theta0)
    except ValueError as exc:
        raise ConfigError(f"algorithm.mode: {exc}") from exc
    with open(os.path.join(out_dir, "polar_trace.csv"), "w") as f:
        f.write("t,rho,theta,map\n")
        labels = [""] + trace.labels
        for t, (rho, theta) in enumerate(trace.states):
            f.write(f"{t},{rho!r},{theta!r},{labels[t]}\n")
    rho_f, theta_f = trace.states[-1]
    near = trace.states[np.abs(trace.states[:, 0] - 1.0) <= NEAR_CIRCLE_BAND]
    spread = sw.circular_spread(near[:, 1]) if len(near) else 0.0
    entries = {
        "algorithm": "polar", "mode": mode, "steps": steps,
        "final_rho": repr(float(rho_f)), "final_theta": repr(float(theta_f)),
        "limit_set_distance": repr(
            sw.distance_to_polar_limit_set(float(rho_f), float(theta_f))),
        "near_circle_angle_spread": repr(float(spread)),
    }
    write_summary(os.path.join(out_dir, "summary.txt"), entries)
    log(f"polar {mode}: final radius {rho_f:.4f}, "
        f"near-circle angle spread {spread:.4f}")
    return EXIT_OK


def _run_comb(cfg, args, out_dir, seed, log) -> int:
    levels = int(_number(cfg, "algorithm.levels", 12.0, positive=True))
    if levels > dy.MAX_LEVEL:
        raise ConfigError(f"algorithm.levels: above limit {dy.MAX_LEVEL}")
    with open(os.path.join(out_dir, "comb_table.csv"), "w") as f:
        f.write("t,left_measure,left_cost_at_zero,pair_cost,"
                "hausdorff_to_full,symdiff_to_full\n")
        for t in range(levels + 1):
            rec = dy.comb_family(t)
            f.write(f"{t},{rec.left_measure},{rec.left_cost_at_zero},"
                    f"{rec.pair_cost},{rec.hausdorff_to_full},"
                    f"{rec.symdiff_to_full}\n")
    log(f"comb family table for t=0..{levels} written")
    write_summary(os.path.join(out_dir, "summary.txt"),
                  {"algorithm": "comb", "levels": levels})
    return EXIT_OK


_RUNNERS = {"gossip": _run_pairwise, "partial": _run_pairwise,
            "lloyd": _run_pairwise, "netsim": _run_netsim,
            "polar": _run_polar, "comb": _run_comb}


def run_once(cfg: dict, args, out_dir: str, seed: int, log) -> int:
    algo = _get(cfg, "algorithm.kind", "gossip")
    if algo not in _RUNNERS:
        raise ConfigError(f"algorithm.kind: unknown kind {algo!r} "
                          f"(choices: {', '.join(sorted(_RUNNERS))})")
    _ensure_out(out_dir)
    return _RUNNERS[algo](cfg, args, out_dir, seed, log)


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else int(_get(cfg, "seed", 0))
    out_dir = args.out or _get(cfg, "out", "runs/out")
    if args.batch is not None:
        if args.batch < 1:
            raise ConfigError("batch: needs at least one run")
        seeds = list(range(seed, seed + args.batch))
        codes = {}

        def one(s: int) -> int:
            sub = os.path.join(out_dir, f"seed-{s}")
            return run_once(cfg, args, sub, s,
                            lambda msg: print(f"[seed {s}] {msg}"))

        with ThreadPoolExecutor(max_workers=min(args.batch, 4)) as pool:
            for s, code in zip(seeds, pool.map(one, seeds)):
                codes[s] = code
        for s in seeds:
            print(f"seed {s}: exit {codes[s]}")
        for bad in (EXIT_DEGENERATE, EXIT_BUDGET):
            if bad in codes.values():
                return bad
        return EXIT_OK
    return run_once(cfg, args, out_dir, seed, print)


def _algo_list(text: str):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ":" in tok:
            name, val = tok.split(":", 1)
            try:
                out.append((name, float(val)))
            except ValueError as exc:
                raise ConfigError(f"algos: bad parameter in {tok!r}") from exc
        else:
            out.append((tok, None))
    if not out:
        raise ConfigError("algos: empty algorithm list")
    return out


def cmd_compare(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else int(_get(cfg, "seed", 0))
    out_dir = _ensure_out(args.out or _get(cfg, "out", "runs/compare"))
    algos = _algo_list(args.algos)

    env = build_environment(cfg)
    density = build_density(cfg)
    perf = build_performance(cfg)
    initial = build_initial(cfg, env, seed)
    budget = int(_number(cfg, "budget", 5000, positive=True))
    stop_tol = _number(cfg, "stop_tol")

    series = {}
    codes = []
    for name, param in algos:
        if name not in ("gossip", "partial", "lloyd"):
            raise ConfigError(f"algos: {name!r} not comparable by step")
        code = EXIT_OK
        try:
            if name == "lloyd":
                trace = sw.run_lloyd(initial, density, perf, budget=budget,
                                     stop_tol=stop_tol)
            else:
                delta = param if param is not None \
                    else _number(cfg, "algorithm.delta",
                                 required=(name == "partial"), positive=True)
                scheduler = build_scheduler(cfg, initial.n, seed)
                trace = sw.run_evolution(initial, density, perf, scheduler,
                                         map_kind=name, delta=delta,
                                         budget=budget, stop_tol=stop_tol)
        except DegenerateEvolution as exc:
            trace = exc.trace
            code = EXIT_DEGENERATE
        except ValueError as exc:
            raise ConfigError(f"algos: {exc}") from exc
        if code == EXIT_OK and trace.termination == "step_budget":
            code = EXIT_BUDGET
        label = name if param is None else f"{name}_{param:g}"
        series[label] = trace
        codes.append(code)
        print(f"{label}: {trace.termination} after {len(trace.steps)} steps, "
              f"residual {trace.final_residual:.3e}")

    labels = list(series)
    longest = max((len(t.steps) for t in series.values()), default=0)
    with open(os.path.join(out_dir, "compare.csv"), "w") as f:
        f.write("t," + ",".join(f"h_{m}" for m in labels) + "\n")
        for t in range(longest):
            row = [str(t)]
            for m in labels:
                steps = series[m].steps
                row.append(repr(steps[t].h) if t < len(steps) else "")
            f.write(",".join(row) + "\n")
    entries = {"seed": seed, "budget": budget}
    for m in labels:
        tr = series[m]
        entries[m] = (f"termination {tr.termination} steps {len(tr.steps)} "
                      f"residual {tr.final_residual!r}")
    write_summary(os.path.join(out_dir, "summary.txt"), entries)
    for bad in (EXIT_DEGENERATE, EXIT_BUDGET):
        if bad in codes:
            return bad
    return EXIT_OK


def cmd_presets(args) -> int:
    for name in preset_names():
        cfg = load_config(name)
        kind = _get(cfg, "algorithm.kind", "gossip")
        print(f"{name}: {kind} — {_get(cfg, 'description', '')}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gossipcover",
        description="Pairwise territory-exchange coverage experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one experiment config")
    p_run.add_argument("config", help="config file path or preset name")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    p_run.add_argument("--out", default=None,
                       help="override the output directory")
    p_run.add_argument("--snapshots", default=None,
                       help="comma-separated snapshot steps (legs for netsim)")
    p_run.add_argument("--batch", type=int, default=None,
                       help="fan out this many consecutive seeds")
    p_run.set_defaults(fn=cmd_run)

    p_cmp = sub.add_parser("compare",
                           help="run several algorithms from one start")
    p_cmp.add_argument("config")
    p_cmp.add_argument("--algos", required=True,
                       help="comma list: gossip, partial[:delta], lloyd")
    p_cmp.add_argument("--seed", type=int, default=None)
    p_cmp.add_argument("--out", default=None)
    p_cmp.set_defaults(fn=cmd_compare)

    p_pre = sub.add_parser("presets", help="list shipped preset configs")
    p_pre.set_defaults(fn=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "snapshots", None) is not None:
        try:
            args.snapshot_list = parse_snapshot_list(args.snapshots)
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    else:
        args.snapshot_list = None
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
