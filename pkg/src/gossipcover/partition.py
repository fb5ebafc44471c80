"""Partitions of a convex environment and their coverage costs.

An Environment wraps the convex polygon to be covered together with
tolerances derived from its size. A Partition assigns each of N agents
a Region; the regions tile the environment up to tolerance.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .geometry import (ConvexPolygon, Density, EmptyRegion, GeometryError,
                       PerformanceFunction, Region, VanishedRegion,
                       bisector_halfplane, symdiff_area)


class CoincidentGenerators(GeometryError):
    """Two generator points coincide within tolerance."""


class DimensionMismatch(GeometryError):
    """Point count does not match region count."""


class DegenerateEvolution(GeometryError):
    """An evolution step drove a region below the minimum tolerated area."""

    def __init__(self, message, step: int | None = None, trace=None):
        super().__init__(message)
        self.step = step
        self.trace = trace


@dataclass(frozen=True)
class Environment:
    """Convex polygon to cover, with size-scaled tolerances."""

    polygon: ConvexPolygon

    @property
    def area(self) -> float:
        return self.polygon.area

    @property
    def diameter(self) -> float:
        return geo.diameter(self.polygon)

    @property
    def tol_point(self) -> float:
        return 1e-9 * self.diameter

    @property
    def tol_area(self) -> float:
        return 1e-9 * self.area

    # numeric slivers below this are dropped silently by clipping pipelines
    @property
    def sliver_area(self) -> float:
        return 1e-13 * self.area

    def as_region(self) -> Region:
        return Region((self.polygon,))


def environment(vertices) -> Environment:
    return Environment(ConvexPolygon(vertices))


def rectangle(width: float, height: float) -> Environment:
    return environment([[0.0, 0.0], [width, 0.0], [width, height], [0.0, height]])


@dataclass(frozen=True)
class Partition:
    """Regions tiling the environment, one per agent."""

    env: Environment
    regions: tuple

    def __post_init__(self):
        if len(self.regions) == 0:
            raise EmptyRegion("partition needs at least one region")
        tol = self.env.tol_area
        n = len(self.regions)
        for k, r in enumerate(self.regions):
            if r.area <= tol:
                raise VanishedRegion(
                    f"region {k} area {r.area:.3e} at or below tolerance {tol:.3e}")
        total = sum(r.area for r in self.regions)
        # cover may fall short by dropped slivers or exceed by merge slack;
        # both stay within the per-region tolerance scale
        if total < self.env.area - n * tol or total > self.env.area + n * n * tol:
            raise GeometryError(
                f"regions cover {total!r}, environment area {self.env.area!r}")

    @property
    def n(self) -> int:
        return len(self.regions)

    def replace(self, i: int, j: int, ri: Region, rj: Region) -> "Partition":
        regs = list(self.regions)
        regs[i], regs[j] = ri, rj
        return Partition(self.env, tuple(regs))

    def validate(self, overlap_tol: float | None = None) -> "Partition":
        """Full check: pieces inside the environment, pairwise overlaps tiny."""
        tol = self.env.tol_area if overlap_tol is None else overlap_tol
        eps = self.env.tol_point
        for k, r in enumerate(self.regions):
            r.validate(overlap_tol=tol)
            verts = r.all_vertices()
            if len(verts) and not np.all(self.env.polygon.contains(verts, tol=10 * eps)):
                raise GeometryError(f"region {k} leaves the environment")
        for i in range(self.n):
            for j in range(i + 1, self.n):
                ov = geo.intersection_area(self.regions[i], self.regions[j])
                if ov > tol:
                    raise GeometryError(
                        f"regions {i} and {j} overlap with area {ov:.3e}")
        return self


def check_points(env: Environment, points, distinct: bool = True) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != 2:
        raise DimensionMismatch("points must have shape (n, 2)")
    inside = env.polygon.contains(pts, tol=env.tol_point)
    if not np.all(inside):
        bad = int(np.argmin(inside))
        raise GeometryError(f"point {bad} at {pts[bad]} lies outside the environment")
    if distinct and len(pts) > 1:
        d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
        np.fill_diagonal(d2, np.inf)
        if np.sqrt(d2.min()) <= env.tol_point:
            i, j = np.unravel_index(np.argmin(d2), d2.shape)
            raise CoincidentGenerators(f"points {i} and {j} coincide")
    return pts


def voronoi(env: Environment, points) -> Partition:
    """Nearest-point partition of the environment for the given generators."""
    pts = check_points(env, points, distinct=True)
    n = len(pts)
    regions = []
    for i in range(n):
        piece = env.polygon
        for j in range(n):
            if j == i or piece is None:
                continue
            piece = geo.clip_convex(piece, bisector_halfplane(pts[i], pts[j]),
                                    min_area=env.sliver_area)
        if piece is None:
            raise VanishedRegion(f"generator {i} has an empty cell")
        regions.append(Region((piece,)))
    return Partition(env, tuple(regions))


# ---------------------------------------------------------------------------
# coverage costs

def _region_memo(region: Region) -> dict:
    # regions are immutable, so centroid/cost results can live on the instance;
    # values keep the density/performance objects alive so ids stay unambiguous
    memo = region.__dict__.get("_memo")
    if memo is None:
        memo = region.__dict__["_memo"] = {}
    return memo


def _one_center_cost_memo(point: np.ndarray, region: Region, density: Density,
                          perf: PerformanceFunction, order: int,
                          refine: int) -> float:
    memo = _region_memo(region)
    key = ("cost", id(density), id(perf), order, refine, point.tobytes())
    hit = memo.get(key)
    if hit is not None and hit[0] is density and hit[1] is perf:
        return hit[2]
    val = geo.one_center_cost(point, region, density, perf, order, refine)
    memo[key] = (density, perf, val)
    return val


def multicenter_cost(partition: Partition, points, density: Density,
                     perf: PerformanceFunction, order: int = 6,
                     refine: int = 1) -> float:
    """Total cost of serving each region from its assigned point."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if len(pts) != partition.n:
        raise DimensionMismatch(
            f"{len(pts)} points for {partition.n} regions")
    return sum(_one_center_cost_memo(pts[i], partition.regions[i], density,
                                     perf, order, refine)
               for i in range(partition.n))


def centroids(partition: Partition, density: Density,
              perf: PerformanceFunction, order: int = 6,
              refine: int = 1) -> np.ndarray:
    env = partition.env
    out = []
    for r in partition.regions:
        memo = _region_memo(r)
        key = ("centroid", id(density), id(perf), id(env.polygon), order, refine)
        hit = memo.get(key)
        if hit is not None and hit[0] is density and hit[1] is perf:
            out.append(hit[2])
            continue
        c = geo.centroid(r, density, perf, within=env.polygon,
                         order=order, refine=refine, min_area=env.tol_area)
        memo[key] = (density, perf, c)
        out.append(c)
    return np.array(out)


def centroid_cost(partition: Partition, density: Density,
                  perf: PerformanceFunction, order: int = 6,
                  refine: int = 1) -> float:
    """Multicenter cost with every region served from its own centroid."""
    cs = centroids(partition, density, perf, order, refine)
    return multicenter_cost(partition, cs, density, perf, order, refine)


def voronoi_cost(env: Environment, points, density: Density,
                 perf: PerformanceFunction, order: int = 6,
                 refine: int = 1) -> float:
    """Multicenter cost of the nearest-point partition of the given points."""
    v = voronoi(env, points)
    return multicenter_cost(v, points, density, perf, order, refine)


# ---------------------------------------------------------------------------
# distances, predicates, diagnostics

def partition_distance(u: Partition, v: Partition) -> float:
    """Sum over regions of symmetric-difference areas."""
    if u.n != v.n:
        raise DimensionMismatch(f"{u.n} regions vs {v.n}")
    return sum(symdiff_area(u.regions[k], v.regions[k]) for k in range(u.n))


def bisector_split(region_a: Region, region_b: Region, point_a, point_b,
                   min_area: float = 0.0,
                   budget: int = geo.DEFAULT_PIECE_BUDGET,
                   merge_tol: float = 1e-12,
                   snap: float = 0.0) -> tuple[Region, Region]:
    """Reassign the union of two regions by the bisector of two points.

    The first output collects everything at least as close to point_a,
    the second the rest; inputs with disjoint interiors keep that property.
    Each piece is split two-sided so both halves share their seam vertices,
    which conserves area; snap absorbs cuts that nearly coincide with an
    existing edge instead of shaving hairline slivers off it.
    """
    hp = bisector_halfplane(point_a, point_b)
    a_from_a, b_from_a = geo.region_split(region_a, hp, snap, min_area)
    a_from_b, b_from_b = geo.region_split(region_b, hp, snap, min_area)
    return (Region.from_pieces(a_from_a + a_from_b, budget=budget,
                               min_area=min_area, merge_tol=merge_tol),
            Region.from_pieces(b_from_a + b_from_b, budget=budget,
                               min_area=min_area, merge_tol=merge_tol))


def pair_rebalanced(partition: Partition, i: int, j: int, ci, cj) -> tuple[Region, Region]:
    env = partition.env
    return bisector_split(partition.regions[i], partition.regions[j], ci, cj,
                          min_area=env.sliver_area, merge_tol=env.tol_area,
                          snap=1e-12 * env.diameter)


def is_centroidal_voronoi(partition: Partition, density: Density,
                          perf: PerformanceFunction, tol: float | None = None,
                          order: int = 6, refine: int = 1) -> bool:
    """True when the partition equals the nearest-point partition of its centroids."""
    env = partition.env
    if tol is None:
        tol = 1e-5 * env.area
    cs = centroids(partition, density, perf, order, refine)
    if partition.n > 1:
        d2 = np.sum((cs[:, None, :] - cs[None, :, :]) ** 2, axis=-1)
        np.fill_diagonal(d2, np.inf)
        if np.sqrt(d2.min()) <= env.tol_point:
            return False
    try:
        ref = voronoi(env, cs)
    except (CoincidentGenerators, VanishedRegion):
        return False
    return partition_distance(partition, ref) <= tol


def is_mixed_centroidal(partition: Partition, density: Density,
                        perf: PerformanceFunction, tol: float | None = None,
                        order: int = 6, refine: int = 1) -> bool:
    """True when every region pair is pairwise balanced.

    A pair passes when its centroids coincide, or when splitting the
    pair's union by the centroid bisector reproduces the pair.
    """
    env = partition.env
    if tol is None:
        tol = 1e-5 * env.area
    cs = centroids(partition, density, perf, order, refine)
    for i in range(partition.n):
        for j in range(i + 1, partition.n):
            gap = float(np.hypot(*(cs[i] - cs[j])))
            if gap <= env.tol_point:
                continue
            ri, rj = pair_rebalanced(partition, i, j, cs[i], cs[j])
            moved = symdiff_area(partition.regions[i], ri) + \
                symdiff_area(partition.regions[j], rj)
            if moved > tol:
                return False
    return True


def adjacency_pairs(partition: Partition, delta: float) -> list[tuple[int, int]]:
    """Region pairs whose interiors come within delta of each other."""
    out = []
    for i in range(partition.n):
        for j in range(i + 1, partition.n):
            if geo.interior_distance(partition.regions[i],
                                     partition.regions[j]) < delta:
                out.append((i, j))
    return out


@dataclass(frozen=True)
class DegeneracyReport:
    min_centroid_gap: float
    min_region_area: float
    max_piece_count: int


def degeneracy_report(partition: Partition, density: Density,
                      perf: PerformanceFunction, order: int = 6,
                      refine: int = 1,
                      precomputed_centroids=None) -> DegeneracyReport:
    cs = precomputed_centroids
    if cs is None:
        cs = centroids(partition, density, perf, order, refine)
    cs = np.asarray(cs, dtype=float)
    if len(cs) > 1:
        d2 = np.sum((cs[:, None, :] - cs[None, :, :]) ** 2, axis=-1)
        np.fill_diagonal(d2, np.inf)
        gap = float(np.sqrt(d2.min()))
    else:
        gap = np.inf
    return DegeneracyReport(
        min_centroid_gap=gap,
        min_region_area=min(r.area for r in partition.regions),
        max_piece_count=max(len(r.pieces) for r in partition.regions))


# ---------------------------------------------------------------------------
# snapshot serialization

_MAGIC = "gossipcover-partition 1"


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_ring(v: np.ndarray) -> str:
    return " ".join(f"{_fmt(p[0])} {_fmt(p[1])}" for p in v)


def write_snapshot(partition: Partition, path_or_file, step: int = 0):
    """Plain-text snapshot: header, environment ring, then piece rings."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    f = open(path_or_file, "w") if own else path_or_file
    try:
        f.write(_MAGIC + "\n")
        f.write(f"step {step}\n")
        f.write(f"regions {partition.n}\n")
        f.write("environment " + _fmt_ring(partition.env.polygon.vertices) + "\n")
        for k, r in enumerate(partition.regions):
            f.write(f"region {k} pieces {len(r.pieces)}\n")
            for p in r.pieces:
                f.write("piece " + _fmt_ring(p.vertices) + "\n")
    finally:
        if own:
            f.close()


def snapshot_string(partition: Partition, step: int = 0) -> str:
    buf = io.StringIO()
    write_snapshot(partition, buf, step)
    return buf.getvalue()


def _parse_ring(tokens) -> np.ndarray:
    vals = [float(t) for t in tokens]
    if len(vals) % 2 or len(vals) < 6:
        raise ValueError("vertex ring needs an even number of >= 6 coordinates")
    return np.array(vals, dtype=float).reshape(-1, 2)


def read_snapshot(path_or_file) -> tuple[Partition, int]:
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    f = open(path_or_file) if own else path_or_file
    try:
        lines = [ln.strip() for ln in f if ln.strip()]
    finally:
        if own:
            f.close()
    if not lines or lines[0] != _MAGIC:
        raise ValueError("not a partition snapshot")
    step = int(lines[1].split()[1])
    n = int(lines[2].split()[1])
    env = Environment(ConvexPolygon(_parse_ring(lines[3].split()[1:])))
    regions = []
    k = 4
    for _ in range(n):
        head = lines[k].split()
        count = int(head[3])
        k += 1
        pieces = []
        for _ in range(count):
            pieces.append(ConvexPolygon(_parse_ring(lines[k].split()[1:])))
            k += 1
        regions.append(Region(tuple(pieces)))
    return Partition(env, tuple(regions)), step
