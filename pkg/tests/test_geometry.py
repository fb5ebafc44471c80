import math

import numpy as np
import pytest

import oracles
from gossipcover import geometry as geo
from gossipcover.geometry import (ConvexPolygon, HalfPlane, Region,
                                  bisector_halfplane, clip_convex,
                                  convex_intersect, interior_distance,
                                  intersection_area, merge_pieces, region_of,
                                  split_convex, symdiff_area)

UNIT_SQUARE = ConvexPolygon([[0, 0], [1, 0], [1, 1], [0, 1]])


def square(x0, y0, side):
    return ConvexPolygon([[x0, y0], [x0 + side, y0],
                          [x0 + side, y0 + side], [x0, y0 + side]])


# ---------------------------------------------------------------------------
# primitives

def test_halfplane_normalizes_and_signs():
    hp = HalfPlane((3.0, 0.0), 6.0)
    assert np.allclose(hp.normal, [1.0, 0.0])
    assert hp.offset == 2.0
    assert hp.contains([1.5, 7.0])
    assert not hp.contains([2.5, 0.0])
    flipped = hp.flipped()
    assert flipped.contains([2.5, 0.0])
    assert float(hp.signed([[3.0, 0.0]])[0]) == pytest.approx(1.0)


def test_bisector_is_equidistant():
    rng = np.random.default_rng(7)
    for _ in range(50):
        p, q = rng.random(2), rng.random(2)
        if np.hypot(*(p - q)) < 1e-3:
            continue
        hp = bisector_halfplane(p, q)
        mid = 0.5 * (p + q)
        assert abs(float(hp.signed(mid)[0])) < 1e-12
        assert hp.contains(p)
        assert not hp.contains(q)


def test_bisector_rejects_coincident():
    with pytest.raises(geo.CoincidentPoints):
        bisector_halfplane([0.3, 0.3], [0.3, 0.3])


def test_polygon_orientation_and_area():
    cw = ConvexPolygon([[0, 0], [0, 1], [1, 1], [1, 0]])
    assert cw.area == pytest.approx(1.0)
    tri = ConvexPolygon([[0, 0], [2, 0], [0, 2]])
    assert tri.area == pytest.approx(2.0)
    with pytest.raises(ValueError):
        ConvexPolygon([[0, 0], [1, 0]])
    with pytest.raises(ValueError):
        ConvexPolygon([[0, 0], [1, 0], [1, 1], [0.2, -0.5]])


def test_polygon_contains_boundary_tol():
    assert bool(UNIT_SQUARE.contains([0.5, 0.5])[0])
    assert bool(UNIT_SQUARE.contains([0.0, 0.5])[0])
    assert not bool(UNIT_SQUARE.contains([-1e-6, 0.5])[0])
    assert bool(UNIT_SQUARE.contains([-1e-6, 0.5], tol=1e-5)[0])
    assert not bool(UNIT_SQUARE.contains([0.5, 0.5], tol=-0.6)[0])


# ---------------------------------------------------------------------------
# clipping and splitting

def test_clip_square_halves():
    hp = HalfPlane((1.0, 0.0), 0.5)
    left = clip_convex(UNIT_SQUARE, hp)
    assert left.area == pytest.approx(0.5)
    right = clip_convex(UNIT_SQUARE, hp.flipped())
    assert right.area == pytest.approx(0.5)


def test_clip_miss_and_cover():
    assert clip_convex(UNIT_SQUARE, HalfPlane((1.0, 0.0), -0.2)) is None
    full = clip_convex(UNIT_SQUARE, HalfPlane((1.0, 0.0), 4.0))
    assert full.area == pytest.approx(1.0)


def test_clip_own_edge_is_identity():
    # clipping along an existing edge must not shave slivers
    poly = ConvexPolygon([[0, 0], [2, 0], [2.7, 1.3], [1, 2]])
    v = poly.vertices
    for k in range(len(v)):
        a, b = v[k], v[(k + 1) % len(v)]
        e = b - a
        n = np.array([e[1], -e[0]])  # outward for ccw rings
        n = n / np.hypot(*n)
        hp = HalfPlane(n, float(n @ a))
        out = clip_convex(poly, hp, snap=1e-12 * 3.0)
        assert out is not None
        assert out.area == pytest.approx(poly.area, rel=0, abs=1e-12)


def test_split_conserves_area_random():
    rng = np.random.default_rng(11)
    for _ in range(200):
        poly = oracles.random_convex_polygon(rng, 10, scale=2.0)
        n = rng.normal(size=2)
        hp = HalfPlane(n, float(n @ (rng.random(2) - 0.5)))
        ins, outs = split_convex(poly, hp, snap=1e-12 * 2.0)
        total = (ins.area if ins else 0.0) + (outs.area if outs else 0.0)
        assert total == pytest.approx(poly.area, rel=1e-12, abs=1e-14)
        if ins is not None:
            assert np.all(hp.signed(ins.vertices) <= 1e-9)
        if outs is not None:
            assert np.all(hp.signed(outs.vertices) >= -1e-9)


def test_split_shares_seam_vertices():
    hp = HalfPlane((1.0, 0.0), 0.4)
    ins, outs = split_convex(UNIT_SQUARE, hp)
    seam_in = {tuple(v) for v in ins.vertices if abs(v[0] - 0.4) < 1e-12}
    seam_out = {tuple(v) for v in outs.vertices if abs(v[0] - 0.4) < 1e-12}
    assert seam_in == seam_out and len(seam_in) == 2


def test_region_split_multi_piece():
    region = region_of([[0, 0], [1, 0], [1, 1], [0, 1]],
                       [[2, 0], [3, 0], [3, 1], [2, 1]])
    ins, outs = geo.region_split(region, HalfPlane((1.0, 0.0), 2.5))
    assert sum(p.area for p in ins) == pytest.approx(1.5)
    assert sum(p.area for p in outs) == pytest.approx(0.5)


# ---------------------------------------------------------------------------
# boolean area queries against the sampling oracles

def test_convex_intersect_matches_grid():
    rng = np.random.default_rng(23)
    for _ in range(40):
        a = oracles.random_convex_polygon(rng, 8, scale=1.6)
        b = oracles.random_convex_polygon(rng, 8, center=(0.2, -0.1),
                                          scale=1.6)
        inter = convex_intersect(a, b)
        exact = inter.area if inter is not None else 0.0
        approx = oracles.intersection_by_grid(Region((a,)), Region((b,)),
                                              40_000, rng)
        assert exact == pytest.approx(approx, abs=4e-3)


def test_intersection_area_self_is_area():
    rng = np.random.default_rng(5)
    for _ in range(30):
        poly = oracles.random_convex_polygon(rng, 9, scale=2.0)
        hp = HalfPlane(rng.normal(size=2), 0.1)
        ins, outs = split_convex(poly, hp)
        pieces = tuple(p for p in (ins, outs) if p is not None)
        region = Region(pieces)
        assert intersection_area(region, region) == pytest.approx(
            region.area, rel=1e-11)


def test_symdiff_matches_grid():
    rng = np.random.default_rng(31)
    for _ in range(30):
        a = Region((oracles.random_convex_polygon(rng, 8, scale=1.5),))
        b = Region((oracles.random_convex_polygon(rng, 8, scale=1.5),))
        exact = symdiff_area(a, b)
        approx = oracles.symdiff_by_grid(a, b, 40_000, rng)
        assert exact == pytest.approx(approx, abs=5e-3)
    assert symdiff_area(a, a) == pytest.approx(0.0, abs=1e-12)


def test_symdiff_metric_axioms_spotcheck():
    a = Region((square(0, 0, 1),))
    b = Region((square(0.5, 0, 1),))
    c = Region((square(1.0, 0, 1),))
    assert symdiff_area(a, b) == pytest.approx(1.0)
    assert symdiff_area(a, b) == pytest.approx(symdiff_area(b, a))
    assert symdiff_area(a, c) <= symdiff_area(a, b) + symdiff_area(b, c) + 1e-12


# ---------------------------------------------------------------------------
# piece management

def test_merge_pieces_rejoins_split():
    rng = np.random.default_rng(43)
    for _ in range(60):
        poly = oracles.random_convex_polygon(rng, 9, scale=2.0)
        n = rng.normal(size=2)
        hp = HalfPlane(n, float(n @ (rng.random(2) - 0.5)))
        ins, outs = split_convex(poly, hp, snap=2e-12)
        if ins is None or outs is None:
            continue
        merged = merge_pieces([ins, outs], tol=1e-9)
        assert len(merged) == 1
        assert merged[0].area == pytest.approx(poly.area, rel=1e-9)


def test_merge_keeps_genuinely_separate():
    merged = merge_pieces([square(0, 0, 1), square(2, 0, 1)], tol=1e-9)
    assert len(merged) == 2
    # an L of two squares shares a full edge but the union is not convex
    merged = merge_pieces([square(0, 0, 1), square(1, 0, 1),
                           square(0, 1, 1)], tol=1e-9)
    assert sum(p.area for p in merged) == pytest.approx(3.0)
    assert all(_is_convex(p) for p in merged)


def _is_convex(poly):
    v = poly.vertices
    e = np.roll(v, -1, axis=0) - v
    cr = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
    return bool(np.all(cr >= -1e-9))


def test_piece_budget_enforced():
    pieces = [square(2.5 * i, 0, 1) for i in range(5)]
    with pytest.raises(geo.PieceBudgetExceeded):
        Region.from_pieces(pieces, budget=3)
    region = Region.from_pieces(pieces, budget=5)
    assert len(region.pieces) == 5


def test_from_pieces_drops_slivers():
    sliver = ConvexPolygon([[0, 2], [1, 2], [1, 2 + 1e-7]], check=False)
    region = Region.from_pieces([square(0, 0, 1), sliver], min_area=1e-6)
    assert len(region.pieces) == 1


# ---------------------------------------------------------------------------
# distances

def test_interior_distance_cases():
    a = Region((square(0, 0, 1),))
    b = Region((square(1, 0, 1),))      # shares an edge
    c = Region((square(2, 0, 1),))      # gap of 1
    d = Region((square(0.5, 0.5, 1),))  # overlaps a
    assert interior_distance(a, b) == pytest.approx(0.0, abs=1e-12)
    assert interior_distance(a, c) == pytest.approx(1.0)
    assert interior_distance(a, d) == 0.0
    assert interior_distance(a, a) == 0.0


def test_interior_distance_matches_sampling():
    rng = np.random.default_rng(67)
    for _ in range(40):
        a = Region((oracles.random_convex_polygon(rng, 7, scale=1.0),))
        off = 1.0 + 2.0 * rng.random(2)
        b = Region((oracles.random_convex_polygon(rng, 7, center=off,
                                                  scale=1.0),))
        exact = interior_distance(a, b)
        approx = oracles.interior_distance_by_sampling(a, b)
        # boundary sampling only overestimates the true gap
        assert exact <= approx + 1e-9
        assert approx - exact <= 0.08


def test_hausdorff_known_values():
    a = Region((square(0, 0, 1),))
    b = Region((square(0.25, 0, 1),))
    assert geo.hausdorff_distance(a, b) == pytest.approx(0.25, abs=1e-9)
    big = Region((square(0, 0, 2),))
    small = Region((square(0.5, 0.5, 1),))
    # farthest point of the big square from the small one is a corner
    assert geo.hausdorff_distance(big, small) == pytest.approx(
        math.sqrt(0.5), abs=1e-9)


def test_hausdorff_matches_sampling():
    rng = np.random.default_rng(71)
    for _ in range(25):
        a = Region((oracles.random_convex_polygon(rng, 8, scale=1.4),))
        b = Region((oracles.random_convex_polygon(rng, 8, scale=1.4),))
        mine = geo.hausdorff_distance(a, b)
        ref = oracles.hausdorff_by_sampling(a, b)
        assert mine == pytest.approx(ref, abs=2e-2)


def test_diameter():
    assert geo.diameter(UNIT_SQUARE) == pytest.approx(math.sqrt(2.0))
    region = region_of([[0, 0], [1, 0], [1, 1], [0, 1]],
                       [[4, 0], [5, 0], [5, 1], [4, 1]])
    assert geo.diameter(region) == pytest.approx(math.hypot(5.0, 1.0))


# ---------------------------------------------------------------------------
# densities, performance functions, integration

def test_uniform_density_integrates_to_area():
    region = Region((UNIT_SQUARE,))
    dens = geo.UniformDensity(2.5)
    assert geo.region_mass(region, dens) == pytest.approx(2.5)
    assert dens.sup_norm == 2.5


def test_grid_density_interpolates():
    dens = geo.GridDensity(0.0, 0.0, 1.0, 1.0, [[1.0, 3.0], [1.0, 3.0]])
    pts = np.array([[0.0, 0.5], [1.0, 0.5], [0.5, 0.5]])
    assert np.allclose(dens(pts), [1.0, 3.0, 2.0])
    with pytest.raises(ValueError):
        geo.GridDensity(0, 0, 1, 1, [[1.0, -2.0], [1.0, 1.0]])


def test_quadrature_matches_analytic_moments():
    region = Region((UNIT_SQUARE,))
    dens = geo.UniformDensity()
    val = geo.integrate(region, dens, lambda q: q[:, 0] ** 2 * q[:, 1])
    assert val == pytest.approx(1.0 / 6.0, abs=1e-12)
    c = geo.mass_centroid(region, dens)
    assert np.allclose(c, [0.5, 0.5], atol=1e-12)


def test_mass_centroid_grid_density_shifts():
    dens = geo.GridDensity(0.0, 0.0, 1.0, 1.0, [[1.0, 4.0], [1.0, 4.0]])
    c = geo.mass_centroid(Region((UNIT_SQUARE,)), dens)
    assert c[0] > 0.55 and abs(c[1] - 0.5) < 1e-9


def test_one_center_cost_matches_grid():
    rng = np.random.default_rng(83)
    region = Region((oracles.random_convex_polygon(rng, 8, scale=2.0),))
    dens = geo.UniformDensity()
    for perf in (geo.quadratic_performance(), geo.linear_performance()):
        for _ in range(5):
            p = rng.random(2) - 0.5
            exact = geo.one_center_cost(p, region, dens, perf)
            approx = oracles.cost_by_grid(p, region, dens, perf, 60_000, rng)
            assert exact == pytest.approx(approx, rel=2e-2)


def test_quadratic_centroid_is_mass_centroid():
    rng = np.random.default_rng(89)
    dens = geo.UniformDensity()
    perf = geo.quadratic_performance()
    for _ in range(10):
        region = Region((oracles.random_convex_polygon(rng, 8, scale=1.5),))
        c = geo.centroid(region, dens, perf, UNIT_SQUARE)
        assert np.allclose(c, geo.mass_centroid(region, dens), atol=1e-9)


def test_linear_centroid_minimizes():
    # median point beats nearby competitors for f(x) = x
    rng = np.random.default_rng(97)
    dens = geo.UniformDensity()
    perf = geo.linear_performance()
    domain = ConvexPolygon([[-2, -2], [3, -2], [3, 3], [-2, 3]])
    for _ in range(5):
        region = Region((oracles.random_convex_polygon(rng, 7, scale=1.8),))
        c = geo.centroid(region, dens, perf, domain)
        base = geo.one_center_cost(c, region, dens, perf)
        for _ in range(12):
            q = c + 0.05 * rng.normal(size=2)
            assert geo.one_center_cost(q, region, dens, perf) >= base - 1e-7


def test_performance_validate_rejects_bad():
    bad = geo.PerformanceFunction(
        kind="custom", fn=lambda x: -np.asarray(x),
        dfn=lambda x: -np.ones_like(x), lipschitz_on=lambda d: 1.0)
    with pytest.raises(ValueError):
        bad.validate(1.0)
