"""Pairwise territory-exchange maps between regions of a partition.

The full exchange hands the pair's union over to the bisector of the two
region centroids. The distance-limited variant scales the exchange down
when the regions are farther apart or the centroids closer together than
a communication radius delta, trading only a boundary slab.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from . import partition as pt
from .geometry import Density, HalfPlane, PerformanceFunction, Region, VanishedRegion
from .partition import Partition


@dataclass(frozen=True)
class StepOutcome:
    partition: Partition
    changed: bool
    pair: tuple[int, int]
    h_before: float
    h_after: float
    traded_area: float


def check_delta(env: pt.Environment, delta: float) -> float:
    if not (0.0 < delta <= env.diameter / 10.0):
        raise ValueError(
            f"delta must lie in (0, diameter/10 = {env.diameter / 10.0:.6g}]")
    return float(delta)


def _unchanged(partition, i, j, h, cs) -> StepOutcome:
    return StepOutcome(partition, False, (i, j), h, h, 0.0)


def _apply_pair(partition: Partition, i: int, j: int, ri: Region, rj: Region,
                density, perf, h_before, order, refine) -> StepOutcome:
    env = partition.env
    for k, r in ((i, ri), (j, rj)):
        if r.is_empty or r.area <= env.tol_area:
            raise VanishedRegion(
                f"region {k} vanished in exchange ({i}, {j}): area {r.area:.3e}")
    traded = 0.5 * (geo.symdiff_area(partition.regions[i], ri)
                    + geo.symdiff_area(partition.regions[j], rj))
    if traded <= env.tol_area:
        return _unchanged(partition, i, j, h_before, None)
    new = partition.replace(i, j, ri, rj)
    h_after = pt.centroid_cost(new, density, perf, order, refine)
    return StepOutcome(new, True, (i, j), h_before, h_after, traded)


def _already_split(partition: Partition, i: int, j: int, ci, cj) -> bool:
    """True when the pair's regions already sit on their bisector's sides.

    The split would then return the regions unchanged up to snap-level
    slivers, so the step can skip the geometry entirely.
    """
    hp = geo.bisector_halfplane(ci, cj)
    eps = 1e-12 * partition.env.diameter
    di = partition.regions[i].all_vertices() @ hp.normal - hp.offset
    if float(di.max()) > eps:
        return False
    dj = partition.regions[j].all_vertices() @ hp.normal - hp.offset
    return float(dj.min()) >= -eps


def gossip_step(partition: Partition, i: int, j: int, density: Density,
                perf: PerformanceFunction, order: int = 6,
                refine: int = 1) -> StepOutcome:
    """Full pairwise exchange: split the union by the centroid bisector."""
    if i == j:
        raise ValueError("pair indices must differ")
    env = partition.env
    cs = pt.centroids(partition, density, perf, order, refine)
    h_before = pt.multicenter_cost(partition, cs, density, perf, order, refine)
    gap = float(np.hypot(*(cs[i] - cs[j])))
    if gap <= env.tol_point:
        return _unchanged(partition, i, j, h_before, cs)
    if _already_split(partition, i, j, cs[i], cs[j]):
        return _unchanged(partition, i, j, h_before, cs)
    ri, rj = pt.pair_rebalanced(partition, i, j, cs[i], cs[j])
    return _apply_pair(partition, i, j, ri, rj, density, perf, h_before,
                       order, refine)


def _sat(x: float) -> float:
    return min(x, 1.0)


def trade_fraction_from(gap: float, pair_distance: float, delta: float) -> float:
    """Exchange scaling in [0, 1] from centroid gap and region separation."""
    return _sat(gap / delta) * (1.0 - _sat(pair_distance / delta))


def trade_fraction(partition: Partition, i: int, j: int, delta: float,
                   density: Density, perf: PerformanceFunction,
                   order: int = 6, refine: int = 1) -> float:
    delta = check_delta(partition.env, delta)
    cs = pt.centroids(partition, density, perf, order, refine)
    gap = float(np.hypot(*(cs[i] - cs[j])))
    if gap <= partition.env.tol_point:
        return 0.0
    pd = geo.interior_distance(partition.regions[i], partition.regions[j])
    return trade_fraction_from(gap, pd, delta)


def _slab_regions(partition: Partition, i: int, j: int, ci, cj,
                  beta: float) -> tuple[Region, Region]:
    """Exchange only the outer beta-fraction of each region's far slab.

    The far slab of region i is its part beyond the centroid bisector;
    the traded sub-slab keeps the points farthest from the bisector.
    """
    env = partition.env
    u = (cj - ci)
    u = u / float(np.hypot(u[0], u[1]))
    m = float(u @ (ci + cj)) / 2.0
    vi, vj = partition.regions[i], partition.regions[j]

    def far_reach(region: Region, sign: float) -> float:
        # max signed distance past the bisector on the far side; 0 if none
        verts = region.all_vertices()
        s = sign * (verts @ u - m)
        reach = float(s.max()) if len(s) else 0.0
        return max(reach, 0.0)

    wi = far_reach(vi, +1.0)
    wj = far_reach(vj, -1.0)
    keep_i = HalfPlane(u, m + (1.0 - beta) * wi)
    keep_j = HalfPlane(-u, -(m - (1.0 - beta) * wj))
    snap = 1e-12 * env.diameter
    kept_i, give_i = geo.region_split(vi, keep_i, snap, env.sliver_area)
    kept_j, give_j = geo.region_split(vj, keep_j, snap, env.sliver_area)
    make = lambda pieces: Region.from_pieces(pieces, min_area=env.sliver_area,
                                             merge_tol=env.tol_area)
    return make(kept_i + give_j), make(kept_j + give_i)


def partial_gossip_step(partition: Partition, i: int, j: int, delta: float,
                        density: Density, perf: PerformanceFunction,
                        order: int = 6, refine: int = 1) -> StepOutcome:
    """Distance-limited exchange; reduces to the full exchange when the
    regions touch and the centroid gap reaches delta."""
    if i == j:
        raise ValueError("pair indices must differ")
    env = partition.env
    delta = check_delta(env, delta)
    cs = pt.centroids(partition, density, perf, order, refine)
    h_before = pt.multicenter_cost(partition, cs, density, perf, order, refine)
    gap = float(np.hypot(*(cs[i] - cs[j])))
    if gap <= env.tol_point:
        return _unchanged(partition, i, j, h_before, cs)
    pd = geo.interior_distance(partition.regions[i], partition.regions[j])
    if pd >= delta:
        return _unchanged(partition, i, j, h_before, cs)
    beta = trade_fraction_from(gap, pd, delta)
    if beta <= 0.0:
        return _unchanged(partition, i, j, h_before, cs)
    if beta >= 1.0:
        if _already_split(partition, i, j, cs[i], cs[j]):
            return _unchanged(partition, i, j, h_before, cs)
        ri, rj = pt.pair_rebalanced(partition, i, j, cs[i], cs[j])
    else:
        ri, rj = _slab_regions(partition, i, j, cs[i], cs[j], beta)
    return _apply_pair(partition, i, j, ri, rj, density, perf, h_before,
                       order, refine)


def lloyd_step(partition: Partition, density: Density,
               perf: PerformanceFunction, order: int = 6,
               refine: int = 1) -> Partition:
    """Synchronous update: nearest-point partition of the current centroids."""
    cs = pt.centroids(partition, density, perf, order, refine)
    return pt.voronoi(partition.env, cs)


def fixed_point_residual(partition: Partition, density: Density,
                         perf: PerformanceFunction, mode: str = "full",
                         delta: float | None = None, order: int = 6,
                         refine: int = 1,
                         precomputed_centroids=None) -> float:
    """Largest partition movement a single full exchange could cause.

    mode "full" checks every pair; "adjacent" only pairs whose interiors
    come within delta.
    """
    env = partition.env
    if mode == "adjacent":
        if delta is None:
            raise ValueError("adjacent mode needs delta")
        pairs = pt.adjacency_pairs(partition, delta)
    elif mode == "full":
        pairs = [(i, j) for i in range(partition.n)
                 for j in range(i + 1, partition.n)]
    else:
        raise ValueError(f"unknown residual mode {mode!r}")
    cs = precomputed_centroids
    if cs is None:
        cs = pt.centroids(partition, density, perf, order, refine)
    worst = 0.0
    for i, j in pairs:
        gap = float(np.hypot(*(cs[i] - cs[j])))
        if gap <= env.tol_point:
            continue
        if _already_split(partition, i, j, cs[i], cs[j]):
            continue
        ri, rj = pt.pair_rebalanced(partition, i, j, cs[i], cs[j])
        moved = geo.symdiff_area(partition.regions[i], ri) + \
            geo.symdiff_area(partition.regions[j], rj)
        if moved > worst:
            worst = moved
    return worst
