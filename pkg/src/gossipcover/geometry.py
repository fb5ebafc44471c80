"""Planar convex geometry for territory partitioning.

Points are float arrays of shape (2,). A half-plane is the closed set
{q : <normal, q> <= offset}. Polygons store vertices counterclockwise.
A Region is a finite union of convex polygons with pairwise disjoint
interiors; most set operations (clipping, intersection, symmetric
difference) stay inside that class.

Areas and distances are Euclidean. Tolerances are absolute and default
to values suitable for unit-scale coordinates; callers working on a
fixed environment should pass tolerances scaled to it.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from .quadrature import subdivide_triangle, triangle_rule

# transient fragmentation near a slow fixed-point approach can stack
# O(100) unmergeable shells before convergence cleans them up
DEFAULT_PIECE_BUDGET = 256
_DEDUPE_REL = 1e-12


class GeometryError(Exception):
    pass


class CoincidentPoints(GeometryError):
    """Two points expected to be distinct coincide within tolerance."""


class PieceBudgetExceeded(GeometryError):
    """A region operation produced more convex pieces than the budget allows."""


class EmptyRegion(GeometryError):
    """An operation requiring a nonempty region received an empty one."""


class VanishedRegion(GeometryError):
    """A region's area fell to or below the minimum tolerated area."""


# ---------------------------------------------------------------------------
# primitives

@dataclass(frozen=True)
class HalfPlane:
    """Closed half-plane {q : <normal, q> <= offset}; normal has unit length."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        norm = float(np.hypot(n[0], n[1]))
        if norm == 0.0:
            raise ValueError("half-plane normal must be nonzero")
        n = n / norm
        n.setflags(write=False)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset) / norm)

    def signed(self, points) -> np.ndarray:
        """Signed distance to the boundary line; <= 0 means inside."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return pts @ self.normal - self.offset

    def contains(self, point, tol: float = 0.0) -> bool:
        return float(self.signed(point)[0]) <= tol

    def flipped(self) -> "HalfPlane":
        return HalfPlane(-self.normal, -self.offset)


class ConvexPolygon:
    """Convex polygon with counterclockwise vertices and positive area."""

    __slots__ = ("vertices", "_area", "_bbox")

    def __init__(self, vertices, check: bool = True):
        v = np.array(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError("vertices must have shape (n, 2)")
        v = _dedupe_ring(v)
        if len(v) < 3:
            raise ValueError("polygon needs at least 3 distinct vertices")
        if check:
            a = _ring_area(v)
            if a < 0.0:
                v = v[::-1].copy()
                a = -a
            if a <= 0.0:
                raise ValueError("polygon has no area")
            scale = float(np.max(np.abs(v))) + 1.0
            e = np.roll(v, -1, axis=0) - v
            cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
            if np.any(cross < -1e-9 * scale * scale):
                raise ValueError("polygon is not convex")
        v.setflags(write=False)
        self.vertices = v
        self._area = None
        self._bbox = None

    def __repr__(self):
        return f"ConvexPolygon({self.vertices.tolist()!r})"

    @property
    def area(self) -> float:
        if self._area is None:
            self._area = _ring_area(self.vertices)
        return self._area

    def contains(self, points, tol: float = 0.0):
        """Boolean mask of points inside (boundary counts, up to tol)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        # cross(edge, point - vertex) >= -tol*|edge| for all edges
        rel = pts[:, None, :] - v[None, :, :]
        cr = e[None, :, 0] * rel[:, :, 1] - e[None, :, 1] * rel[:, :, 0]
        lim = -tol * np.hypot(e[:, 0], e[:, 1])[None, :]
        return np.all(cr >= lim, axis=1)


def _dedupe_ring(v: np.ndarray) -> np.ndarray:
    scale = float(np.max(np.abs(v))) + 1.0
    eps = _DEDUPE_REL * scale
    keep = []
    for p in v:
        if not keep or np.hypot(*(p - keep[-1])) > eps:
            keep.append(p)
    while len(keep) > 1 and np.hypot(*(keep[-1] - keep[0])) <= eps:
        keep.pop()
    return np.array(keep) if keep else v[:0]


def _ring_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    s = float(np.dot(x[:-1], y[1:]) - np.dot(x[1:], y[:-1]))
    return 0.5 * (s + float(x[-1] * y[0] - x[0] * y[-1]))


def _ring_moment(v: np.ndarray) -> np.ndarray:
    """Integral of (x, y) over the polygon (unnormalized first moment)."""
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cr = x * yn - xn * y
    mx = float(np.sum((x + xn) * cr)) / 6.0
    my = float(np.sum((y + yn) * cr)) / 6.0
    return np.array([mx, my])


@dataclass(frozen=True)
class Region:
    """Union of convex polygons with pairwise disjoint interiors."""

    pieces: tuple

    @staticmethod
    def from_pieces(pieces: Iterable, budget: int = DEFAULT_PIECE_BUDGET,
                    min_area: float = 0.0, merge: bool = True,
                    merge_tol: float = 1e-12) -> "Region":
        kept = [p for p in pieces if p is not None and p.area > min_area]
        if merge and len(kept) > 1:
            kept = merge_pieces(kept, merge_tol)
        if len(kept) > budget:
            raise PieceBudgetExceeded(f"{len(kept)} pieces exceed budget {budget}")
        return Region(tuple(kept))

    @cached_property
    def area(self) -> float:
        return sum(p.area for p in self.pieces)

    @property
    def is_empty(self) -> bool:
        return len(self.pieces) == 0

    def all_vertices(self) -> np.ndarray:
        if self.is_empty:
            return np.zeros((0, 2))
        return np.vstack([p.vertices for p in self.pieces])

    def contains(self, points, tol: float = 0.0):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        mask = np.zeros(len(pts), dtype=bool)
        for p in self.pieces:
            mask |= p.contains(pts, tol)
        return mask

    def validate(self, overlap_tol: float = 1e-9):
        """Check pairwise interior-disjointness; raises on violation."""
        for k, p in enumerate(self.pieces):
            if p.area <= 0.0:
                raise VanishedRegion(f"piece {k} has no area")
            for q in self.pieces[k + 1:]:
                inter = convex_intersect(p, q)
                if inter is not None and inter.area > overlap_tol:
                    raise GeometryError(
                        f"pieces overlap with area {inter.area:.3e}")
        return self


def region_of(*vertex_lists) -> Region:
    """Convenience constructor from raw vertex lists."""
    return Region(tuple(ConvexPolygon(v) for v in vertex_lists))


# ---------------------------------------------------------------------------
# construction and clipping

def bisector_halfplane(p, q, tol: float = 0.0) -> HalfPlane:
    """Half-plane of points at least as close to p as to q."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = q - p
    gap = float(np.hypot(d[0], d[1]))
    if gap <= tol or gap == 0.0:
        raise CoincidentPoints(f"bisector undefined for gap {gap:.3e}")
    n = d / gap
    return HalfPlane(n, float(n @ (p + q)) / 2.0)


def clip_convex(poly: ConvexPolygon | None, hp: HalfPlane,
                min_area: float = 0.0, snap: float = 0.0) -> ConvexPolygon | None:
    """Intersect a convex polygon with a half-plane; None when (near) empty.

    Distances within snap of the boundary are treated as zero: without this
    a vertex pair straddling the line by rounding noise alone fabricates a
    crossing at a noise-ratio position along a real edge.
    """
    if poly is None:
        return None
    v = poly.vertices
    d = v @ hp.normal - hp.offset
    if snap > 0.0:
        d = np.where(np.abs(d) <= snap, 0.0, d)
    if np.all(d <= 0.0):
        return poly
    if np.all(d >= 0.0):
        return None
    out = []
    n = len(v)
    for k in range(n):
        a, da = v[k], d[k]
        b, db = v[(k + 1) % n], d[(k + 1) % n]
        if da <= 0.0:
            out.append(a)
        if (da < 0.0 and db > 0.0) or (da > 0.0 and db < 0.0):
            t = da / (da - db)
            if 0.0 < t < 1.0:
                out.append(a + t * (b - a))
    if len(out) < 3:
        return None
    arr = _dedupe_ring(np.array(out))
    if len(arr) < 3 or _ring_area(arr) <= min_area:
        return None
    return ConvexPolygon(arr, check=False)


def _ring_polygon(points: list, min_area: float) -> ConvexPolygon | None:
    if len(points) < 3:
        return None
    arr = _dedupe_ring(np.array(points))
    if len(arr) < 3 or _ring_area(arr) <= min_area:
        return None
    return ConvexPolygon(arr, check=False)


def split_convex(poly: ConvexPolygon, hp: HalfPlane, snap: float = 0.0,
                 min_area: float = 0.0):
    """Split a convex polygon by a half-plane boundary in one pass.

    Returns (inside, outside); either may be None. Vertices within snap
    of the boundary line are treated as lying on it, so a cut almost
    parallel to an existing edge reassigns the piece cleanly instead of
    shaving off a hairline sliver. Both outputs share the interpolated
    seam vertices, which keeps the split area-conserving.
    """
    v = poly.vertices
    d = v @ hp.normal - hp.offset
    if snap > 0.0:
        d = np.where(np.abs(d) <= snap, 0.0, d)
    if np.all(d <= 0.0):
        if np.all(d == 0.0):
            return None, None  # hairline lying on the boundary
        return poly, None
    if np.all(d >= 0.0):
        return None, poly
    ins: list = []
    outs: list = []
    n = len(v)
    for k in range(n):
        a, da = v[k], d[k]
        b, db = v[(k + 1) % n], d[(k + 1) % n]
        if da <= 0.0:
            ins.append(a)
        if da >= 0.0:
            outs.append(a)
        if (da < 0.0 and db > 0.0) or (da > 0.0 and db < 0.0):
            x = a + (da / (da - db)) * (b - a)
            ins.append(x)
            outs.append(x)
    return _ring_polygon(ins, min_area), _ring_polygon(outs, min_area)


def region_split(region: Region, hp: HalfPlane, snap: float = 0.0,
                 min_area: float = 0.0) -> tuple[list, list]:
    """Two-sided split of every piece; returns (inside, outside) piece lists."""
    ins: list = []
    outs: list = []
    for p in region.pieces:
        a, b = split_convex(p, hp, snap, min_area)
        if a is not None:
            ins.append(a)
        if b is not None:
            outs.append(b)
    return ins, outs


def convex_intersect(a: ConvexPolygon | None, b: ConvexPolygon | None,
                     min_area: float = 0.0) -> ConvexPolygon | None:
    """Intersection of two convex polygons via successive half-plane clips."""
    if a is None or b is None:
        return None
    v = b.vertices
    scale = max(float(np.abs(v).max()), float(np.abs(a.vertices).max()), 1e-300)
    out = a
    for k in range(len(v)):
        p0, p1 = v[k], v[(k + 1) % len(v)]
        e = p1 - p0
        # edges shorter than coordinate noise have unreliable normals; the
        # half-plane they would add is redundant up to that noise anyway
        if float(np.hypot(e[0], e[1])) < 1e-12 * scale:
            continue
        # inward normal of a CCW edge is (-ey, ex); inside means cross >= 0
        hp = HalfPlane(np.array([e[1], -e[0]]), float(e[1] * p0[0] - e[0] * p0[1]))
        out = clip_convex(out, hp, min_area=0.0, snap=1e-12 * scale)
        if out is None:
            return None
    if out.area <= min_area:
        return None
    return out


def region_clip(region: Region, hp: HalfPlane, min_area: float = 0.0) -> list:
    """Clip every piece; returns the surviving pieces as a list."""
    out = []
    for p in region.pieces:
        c = clip_convex(p, hp, min_area)
        if c is not None:
            out.append(c)
    return out


def region_intersect(a: Region, b: Region, budget: int = DEFAULT_PIECE_BUDGET,
                     min_area: float = 0.0) -> Region:
    pieces = []
    for p in a.pieces:
        for q in b.pieces:
            c = convex_intersect(p, q, min_area)
            if c is not None:
                pieces.append(c)
    return Region.from_pieces(pieces, budget=budget, min_area=min_area)


def intersection_area(a: Region, b: Region) -> float:
    # pieces shared by identity intersect in exactly themselves and touch
    # the rest of the other region only along boundaries
    total = 0.0
    unmatched = {id(q): q for q in b.pieces}
    rest_a = []
    for p in a.pieces:
        if id(p) in unmatched:
            total += p.area
            del unmatched[id(p)]
        else:
            rest_a.append(p)
    rest_b = list(unmatched.values())
    for p in rest_a:
        bb = _poly_bbox(p)
        for q in rest_b:
            if _bbox_disjoint(bb, _poly_bbox(q)):
                continue
            c = convex_intersect(p, q)
            if c is not None:
                total += c.area
    return total


def _bbox(v: np.ndarray):
    return v[:, 0].min(), v[:, 1].min(), v[:, 0].max(), v[:, 1].max()


def _poly_bbox(p: ConvexPolygon):
    if p._bbox is None:
        p._bbox = _bbox(p.vertices)
    return p._bbox


def _bbox_disjoint(a, b) -> bool:
    return a[2] < b[0] or b[2] < a[0] or a[3] < b[1] or b[3] < a[1]


def _convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain hull, counterclockwise."""
    pts = np.asarray(points, dtype=float)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    if len(pts) < 3:
        return pts

    def build(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross2(out[-1] - out[-2], p - out[-2]) <= 0.0:
                out.pop()
            out.append(p)
        return out

    lower = build(pts)
    upper = build(pts[::-1])
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        return np.array(hull).reshape(-1, 2)
    return np.array(hull)


def _vertex_keys(p: ConvexPolygon, inv_eps: float) -> set:
    v = np.rint(p.vertices * inv_eps).astype(np.int64)
    return set(map(tuple, v.tolist()))


def merge_pieces(pieces: Sequence[ConvexPolygon], tol: float = 1e-12) -> list:
    """Greedily fuse piece pairs whose union is convex (within area tol).

    A convex union needs a fully shared edge; splits hand both sides the
    same seam coordinates, so candidate pairs must share two vertices and
    the quick grid-key test below prunes everything else. A whole-set hull
    pre-pass catches the common end state where the union is convex but no
    single pair is (misaligned historical seams).
    """
    work = list(pieces)
    if len(work) < 2:
        return work
    if len(work) > 2:
        allv = np.vstack([p.vertices for p in work])
        hull = _convex_hull(allv)
        if len(hull) >= 3:
            s = sum(p.area for p in work)
            if _ring_area(hull) <= s + tol:
                return [ConvexPolygon(hull, check=False)]
    scale = max(float(np.abs(p.vertices).max()) for p in work) + 1.0
    inv_eps = 1.0 / (1e-12 * scale)
    keys = [_vertex_keys(p, inv_eps) for p in work]
    changed = True
    while changed and len(work) > 1:
        changed = False
        i = 0
        while i < len(work):
            j = i + 1
            while j < len(work):
                a, b = work[i], work[j]
                if len(keys[i] & keys[j]) < 2 or \
                        _bbox_disjoint(_pad_bbox(_poly_bbox(a), tol),
                                       _poly_bbox(b)):
                    j += 1
                    continue
                hull = _convex_hull(np.vstack([a.vertices, b.vertices]))
                if len(hull) < 3:
                    j += 1
                    continue
                s = a.area + b.area
                if _ring_area(hull) <= s + max(tol, 1e-12 * s):
                    # keep scanning the grown piece against the remainder
                    work[i] = ConvexPolygon(hull, check=False)
                    keys[i] = _vertex_keys(work[i], inv_eps)
                    del work[j]
                    del keys[j]
                    changed = True
                else:
                    j += 1
            i += 1
    return work


def _pad_bbox(bb, pad):
    return bb[0] - pad, bb[1] - pad, bb[2] + pad, bb[3] + pad


# ---------------------------------------------------------------------------
# measures and metrics

def area(obj) -> float:
    if isinstance(obj, ConvexPolygon):
        return obj.area
    return obj.area


def symdiff_area(a: Region, b: Region) -> float:
    """Area of the symmetric difference of two regions."""
    return max(a.area + b.area - 2.0 * intersection_area(a, b), 0.0)


def _cross2(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def _point_segment_distance(p, a, b) -> float:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.hypot(*(p - a)))
    t = float((p - a) @ ab) / denom
    t = min(1.0, max(0.0, t))
    return float(np.hypot(*(p - (a + t * ab))))


def _segments_intersect(p1, p2, q1, q2) -> bool:
    d1 = _cross2(p2 - p1, q1 - p1)
    d2 = _cross2(p2 - p1, q2 - p1)
    d3 = _cross2(q2 - q1, p1 - q1)
    d4 = _cross2(q2 - q1, p2 - q1)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def _segment_segment_distance(p1, p2, q1, q2) -> float:
    if _segments_intersect(p1, p2, q1, q2):
        return 0.0
    return min(_point_segment_distance(p1, q1, q2),
               _point_segment_distance(p2, q1, q2),
               _point_segment_distance(q1, p1, p2),
               _point_segment_distance(q2, p1, p2))


def _points_segments_distance(pts: np.ndarray, s1: np.ndarray,
                              s2: np.ndarray) -> float:
    """Min distance from any of the points to any segment (s1[k], s2[k])."""
    ab = s2 - s1
    den = np.einsum("ij,ij->i", ab, ab)
    den = np.where(den == 0.0, 1.0, den)
    ap = pts[:, None, :] - s1[None, :, :]
    t = np.clip(np.einsum("pki,ki->pk", ap, ab) / den[None, :], 0.0, 1.0)
    diff = ap - t[:, :, None] * ab[None, :, :]
    return float(np.sqrt(np.einsum("pki,pki->pk", diff, diff).min()))


def _any_segments_cross(a1, a2, b1, b2) -> bool:
    """True when any segment of the first set properly crosses any of the second."""
    ea = a2 - a1
    r1 = b1[None, :, :] - a1[:, None, :]
    r2 = b2[None, :, :] - a1[:, None, :]
    d1 = ea[:, None, 0] * r1[:, :, 1] - ea[:, None, 1] * r1[:, :, 0]
    d2 = ea[:, None, 0] * r2[:, :, 1] - ea[:, None, 1] * r2[:, :, 0]
    eb = b2 - b1
    r3 = a1[:, None, :] - b1[None, :, :]
    r4 = a2[:, None, :] - b1[None, :, :]
    d3 = eb[None, :, 0] * r3[:, :, 1] - eb[None, :, 1] * r3[:, :, 0]
    d4 = eb[None, :, 0] * r4[:, :, 1] - eb[None, :, 1] * r4[:, :, 0]
    return bool(np.any(((d1 > 0) != (d2 > 0)) & ((d3 > 0) != (d4 > 0))))


def _convex_distance(a: ConvexPolygon, b: ConvexPolygon) -> float:
    """Distance between two convex polygons (0 when they meet)."""
    if bool(b.contains(a.vertices[:1])[0]) or bool(a.contains(b.vertices[:1])[0]):
        return 0.0
    va, vb = a.vertices, b.vertices
    ea1, ea2 = va, np.roll(va, -1, axis=0)
    eb1, eb2 = vb, np.roll(vb, -1, axis=0)
    best = min(_points_segments_distance(va, eb1, eb2),
               _points_segments_distance(vb, ea1, ea2))
    if best > 0.0 and _any_segments_cross(ea1, ea2, eb1, eb2):
        return 0.0
    return best


def _bbox_gap(a, b) -> float:
    dx = max(0.0, a[0] - b[2], b[0] - a[2])
    dy = max(0.0, a[1] - b[3], b[1] - a[3])
    return float(np.hypot(dx, dy))


def interior_distance(a: Region, b: Region) -> float:
    """Infimum distance between region interiors; 0 when they touch."""
    if a.is_empty or b.is_empty:
        raise EmptyRegion("interior distance needs nonempty regions")
    memo = a.__dict__.setdefault("_memo", {})
    key = ("idist", id(b))
    hit = memo.get(key)
    if hit is not None and hit[0]() is b:
        return hit[1]
    d = _interior_distance(a, b)
    # weakref guards against a recycled id() after the partner is collected
    memo[key] = (weakref.ref(b), d)
    b.__dict__.setdefault("_memo", {})[("idist", id(a))] = (weakref.ref(a), d)
    return d


def _interior_distance(a: Region, b: Region) -> float:
    # regions meeting along a shared seam carry identical vertex floats
    scale = max(float(np.abs(p.vertices).max())
                for r in (a, b) for p in r.pieces) + 1.0
    inv_eps = 1.0 / (1e-12 * scale)
    keys_a = set()
    for p in a.pieces:
        keys_a |= _vertex_keys(p, inv_eps)
    for q in b.pieces:
        if keys_a & _vertex_keys(q, inv_eps):
            return 0.0
    best = np.inf
    for p in a.pieces:
        bb = _poly_bbox(p)
        for q in b.pieces:
            if _bbox_gap(bb, _poly_bbox(q)) >= best:
                continue
            d = _convex_distance(p, q)
            if d < best:
                best = d
                if best == 0.0:
                    return 0.0
    return float(best)


def point_region_distance(p, region: Region) -> float:
    p = np.asarray(p, dtype=float)
    if bool(region.contains(p[None, :])[0]):
        return 0.0
    best = np.inf
    for piece in region.pieces:
        v = piece.vertices
        for k in range(len(v)):
            d = _point_segment_distance(p, v[k], v[(k + 1) % len(v)])
            if d < best:
                best = d
    return float(best)


def _boundary_candidates(region: Region, samples_per_edge: int) -> np.ndarray:
    pts = [region.all_vertices()]
    if samples_per_edge > 0:
        ts = np.arange(1, samples_per_edge + 1) / (samples_per_edge + 1)
        for piece in region.pieces:
            v = piece.vertices
            nxt = np.roll(v, -1, axis=0)
            seg = v[:, None, :] + ts[None, :, None] * (nxt - v)[:, None, :]
            pts.append(seg.reshape(-1, 2))
    return np.vstack(pts)


def hausdorff_distance(a: Region, b: Region, samples_per_edge: int = 8) -> float:
    """Hausdorff distance evaluated over boundary candidate points.

    Exact when both regions are single convex pieces (the directed
    distance is then attained at a vertex); for unions it is a lower
    bound refined by edge sampling.
    """
    if a.is_empty or b.is_empty:
        raise EmptyRegion("hausdorff distance needs nonempty regions")

    def directed(src: Region, dst: Region) -> float:
        cand = _boundary_candidates(src, samples_per_edge)
        inside = dst.contains(cand)
        outside = cand[~inside]
        if len(outside) == 0:
            return 0.0
        return max(point_region_distance(p, dst) for p in outside)

    return max(directed(a, b), directed(b, a))


def diameter(obj) -> float:
    """Largest vertex-to-vertex distance (polygon or region)."""
    v = obj.all_vertices() if isinstance(obj, Region) else obj.vertices
    if len(v) == 0:
        raise EmptyRegion("diameter of an empty region")
    d2 = np.sum((v[:, None, :] - v[None, :, :]) ** 2, axis=-1)
    return float(np.sqrt(d2.max()))


def project_to_convex(p, poly: ConvexPolygon):
    p = np.asarray(p, dtype=float)
    if bool(poly.contains(p[None, :])[0]):
        return p
    v = poly.vertices
    best, best_d = p, np.inf
    for k in range(len(v)):
        a, b = v[k], v[(k + 1) % len(v)]
        ab = b - a
        t = float((p - a) @ ab) / float(ab @ ab)
        t = min(1.0, max(0.0, t))
        q = a + t * ab
        d = float(np.hypot(*(p - q)))
        if d < best_d:
            best, best_d = q, d
    return best


# ---------------------------------------------------------------------------
# densities and performance functions

class UniformDensity:
    """Constant positive density."""

    def __init__(self, value: float = 1.0):
        if value <= 0.0:
            raise ValueError("density must be positive")
        self.value = float(value)
        self.sup_norm = float(value)

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.full(len(pts), self.value)


class GridDensity:
    """Bilinear interpolation of positive samples on a regular grid."""

    def __init__(self, x0, y0, x1, y1, values):
        vals = np.asarray(values, dtype=float)
        if vals.ndim != 2 or vals.shape[0] < 2 or vals.shape[1] < 2:
            raise ValueError("grid needs at least 2x2 samples")
        if np.any(vals <= 0.0):
            raise ValueError("density samples must be positive")
        if not (x1 > x0 and y1 > y0):
            raise ValueError("empty grid extent")
        self.x0, self.y0, self.x1, self.y1 = map(float, (x0, y0, x1, y1))
        self.values = vals
        self.sup_norm = float(vals.max())

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        ny, nx = self.values.shape
        fx = (pts[:, 0] - self.x0) / (self.x1 - self.x0) * (nx - 1)
        fy = (pts[:, 1] - self.y0) / (self.y1 - self.y0) * (ny - 1)
        fx = np.clip(fx, 0.0, nx - 1 - 1e-12)
        fy = np.clip(fy, 0.0, ny - 1 - 1e-12)
        ix = fx.astype(int)
        iy = fy.astype(int)
        tx = fx - ix
        ty = fy - iy
        v = self.values
        return ((1 - tx) * (1 - ty) * v[iy, ix] + tx * (1 - ty) * v[iy, ix + 1]
                + (1 - tx) * ty * v[iy + 1, ix] + tx * ty * v[iy + 1, ix + 1])


Density = UniformDensity | GridDensity


@dataclass(frozen=True)
class PerformanceFunction:
    """Increasing convex cost of distance, with derivative and Lipschitz data."""

    kind: str
    fn: Callable[[np.ndarray], np.ndarray]
    dfn: Callable[[np.ndarray], np.ndarray]
    lipschitz_on: Callable[[float], float]

    def validate(self, upper: float, tol: float = 1e-9):
        """Spot-check monotonicity and convexity on [0, upper]."""
        xs = np.linspace(0.0, upper, 65)
        ys = np.asarray(self.fn(xs), dtype=float)
        scale = float(np.max(np.abs(ys))) + 1.0
        d1 = np.diff(ys)
        if np.any(d1 < -tol * scale):
            raise ValueError("performance function is not increasing")
        if np.any(np.diff(d1) < -tol * scale):
            raise ValueError("performance function is not convex")
        return self


def quadratic_performance() -> PerformanceFunction:
    return PerformanceFunction("quadratic", lambda x: np.square(x),
                               lambda x: 2.0 * x, lambda upper: 2.0 * upper)


def linear_performance() -> PerformanceFunction:
    return PerformanceFunction("linear", lambda x: np.asarray(x, dtype=float),
                               lambda x: np.ones_like(np.asarray(x, dtype=float)),
                               lambda upper: 1.0)


def custom_performance(fn, dfn=None, lipschitz=None) -> PerformanceFunction:
    if dfn is None:
        h = 1e-6

        def dfn(x, _f=fn):  # noqa: E731 - central difference fallback
            x = np.asarray(x, dtype=float)
            return (np.asarray(_f(x + h)) - np.asarray(_f(np.maximum(x - h, 0.0)))) \
                / (x + h - np.maximum(x - h, 0.0))

    if lipschitz is None:
        def lipschitz(upper, _d=dfn):
            return float(np.max(np.asarray(_d(np.linspace(0.0, upper, 129)))))

    return PerformanceFunction("custom", fn, dfn, lipschitz)


# ---------------------------------------------------------------------------
# integration and generalized centroids

def _piece_triangles(piece: ConvexPolygon, refine: int) -> np.ndarray:
    v = piece.vertices
    fans = []
    for k in range(1, len(v) - 1):
        fans.append(subdivide_triangle(v[0], v[k], v[k + 1], refine))
    return np.concatenate(fans, axis=0)


def _quad_points(region: Region, order: int, refine: int):
    """All quadrature points with physical weights for a region."""
    bary, wts = triangle_rule(order)
    pts_all, w_all = [], []
    for piece in region.pieces:
        tris = _piece_triangles(piece, refine)  # (k, 3, 2)
        e1 = tris[:, 1] - tris[:, 0]
        e2 = tris[:, 2] - tris[:, 0]
        areas = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        pts = np.einsum("rb,kbd->krd", bary, tris)  # (k, R, 2)
        w = areas[:, None] * wts[None, :]
        pts_all.append(pts.reshape(-1, 2))
        w_all.append(w.reshape(-1))
    if not pts_all:
        return np.zeros((0, 2)), np.zeros(0)
    return np.vstack(pts_all), np.concatenate(w_all)


def integrate(region: Region, density: Density, fn: Callable,
              order: int = 6, refine: int = 1) -> float:
    """Integral of fn(q) * density(q) over the region.

    fn maps an (n, 2) array of points to n scalar values.
    """
    pts, w = _quad_points(region, order, refine)
    if len(pts) == 0:
        return 0.0
    return float(np.sum(w * np.asarray(fn(pts), dtype=float) * density(pts)))


def _integrate_vec(region: Region, density: Density, fn: Callable,
                   order: int, refine: int) -> np.ndarray:
    pts, w = _quad_points(region, order, refine)
    if len(pts) == 0:
        return np.zeros(2)
    vals = np.asarray(fn(pts), dtype=float)  # (n, 2)
    return np.sum((w * density(pts))[:, None] * vals, axis=0)


def region_mass(region: Region, density: Density, order: int = 6,
                refine: int = 1) -> float:
    if isinstance(density, UniformDensity):
        return density.value * region.area
    return integrate(region, density, lambda q: np.ones(len(q)), order, refine)


def mass_centroid(region: Region, density: Density, order: int = 6,
                  refine: int = 1) -> np.ndarray:
    """Density-weighted mean point (exact for uniform density)."""
    if region.is_empty:
        raise EmptyRegion("centroid of an empty region")
    if isinstance(density, UniformDensity):
        m0 = region.area
        m1 = sum((_ring_moment(p.vertices) for p in region.pieces),
                 np.zeros(2))
        if m0 <= 0.0:
            raise VanishedRegion("region has no area")
        return m1 / m0
    m0 = integrate(region, density, lambda q: np.ones(len(q)), order, refine)
    if m0 <= 0.0:
        raise VanishedRegion("region has no mass")
    m1 = _integrate_vec(region, density, lambda q: q, order, refine)
    return m1 / m0


def one_center_cost(p, region: Region, density: Density,
                    perf: PerformanceFunction, order: int = 6,
                    refine: int = 1) -> float:
    """Expected cost of serving the region from point p."""
    p = np.asarray(p, dtype=float)
    return integrate(region, density,
                     lambda q: np.asarray(perf.fn(np.hypot(q[:, 0] - p[0],
                                                           q[:, 1] - p[1]))),
                     order, refine)


def _cost_gradient(p, region, density, perf, order, refine) -> np.ndarray:
    p = np.asarray(p, dtype=float)

    def g(q):
        d = p[None, :] - q
        r = np.hypot(d[:, 0], d[:, 1])
        safe = np.maximum(r, 1e-300)
        scale = np.asarray(perf.dfn(r), dtype=float) / safe
        scale[r < 1e-14] = 0.0
        return d * scale[:, None]

    return _integrate_vec(region, density, g, order, refine)


def centroid(region: Region, density: Density, perf: PerformanceFunction,
             within: ConvexPolygon | None = None, order: int = 6,
             refine: int = 1, tol: float | None = None,
             max_iter: int = 500, min_area: float = 0.0) -> np.ndarray:
    """Point minimizing the one-center cost of the region.

    Quadratic cost has the closed-form mass centroid; other costs run
    projected gradient descent with backtracking from that start.
    """
    if region.is_empty:
        raise EmptyRegion("centroid of an empty region")
    if region.area <= min_area:
        raise VanishedRegion(f"region area {region.area:.3e} below tolerance")
    start = mass_centroid(region, density, order, refine)
    if perf.kind == "quadratic":
        return start
    scale = diameter(region)
    if within is not None:
        scale = max(scale, diameter(within))
    if tol is None:
        tol = 1e-10 * max(scale, 1e-12)
    x = start
    fx = one_center_cost(x, region, density, perf, order, refine)
    step = max(scale, 1e-12)
    for _ in range(max_iter):
        g = _cost_gradient(x, region, density, perf, order, refine)
        gnorm = float(np.hypot(g[0], g[1]))
        if gnorm * step < tol * 1e-3:
            break
        moved = False
        alpha = step
        for _bt in range(60):
            cand = x - alpha * g
            if within is not None:
                cand = project_to_convex(cand, within)
            d = cand - x
            dn = float(np.hypot(d[0], d[1]))
            if dn < tol:
                break
            fc = one_center_cost(cand, region, density, perf, order, refine)
            if fc <= fx + 1e-4 * float(g @ d):
                x, fx = cand, fc
                moved = True
                step = alpha * 2.0
                break
            alpha *= 0.5
        if not moved:
            break
    return x
