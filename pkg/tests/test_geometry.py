import numpy as np
import pytest
from hypothesis import given, strategies as st

from feasregion.errors import DegenerateInput, DimensionMismatch, Empty, Unbounded
from feasregion.geometry import (
    Polygon2,
    PolyhedralCone,
    Zonotope,
    contains,
    convex_hull_2d,
    halfspaces_from_vertices,
    hausdorff_distance,
    minkowski_sum_cones,
    minkowski_sum_points,
    point_in_polygon,
    polygon_area,
    prune_cone_rays,
    read_polygon_csv,
    scale_polygon,
    vertices_from_halfspaces,
    write_polygon_csv,
)

from conftest import random_convex

points = st.lists(
    st.tuples(st.floats(-10, 10, allow_nan=False), st.floats(-10, 10, allow_nan=False)),
    min_size=3,
    max_size=40,
)


def brute_force_hull_ok(pts, verts, tol=1e-9):
    """O(n^3)-style oracle: every input point left of every hull edge, vertices drawn from the input."""
    k = len(verts)
    for i in range(k):
        a, b = verts[i], verts[(i + 1) % k]
        e = b - a
        cross = e[0] * (pts[:, 1] - a[1]) - e[1] * (pts[:, 0] - a[0])
        if np.any(cross / np.hypot(*e) < -tol):
            return False
    for v in verts:
        if np.min(np.hypot(*(pts - v).T)) > 0.0:
            return False
    return True


def test_triangle_hull():
    h = convex_hull_2d([(0, 0), (1, 0), (0, 1)])
    assert len(h) == 3
    assert {tuple(v) for v in h.vertices} == {(0, 0), (1, 0), (0, 1)}


def test_square_interior_point_dropped():
    h = convex_hull_2d([(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5)])
    assert {tuple(v) for v in h.vertices} == {(0, 0), (1, 0), (1, 1), (0, 1)}


def test_degenerate_inputs():
    with pytest.raises(DegenerateInput):
        convex_hull_2d([(0, 0), (1, 1), (2, 2), (3, 3)])
    with pytest.raises(DegenerateInput):
        convex_hull_2d([(0, 0), (1, 0)])
    with pytest.raises(DegenerateInput):
        convex_hull_2d([(1, 1)] * 5)


def test_hull_disk_points_brute_force(rng):
    r = np.sqrt(rng.uniform(size=200))
    t = rng.uniform(0, 2 * np.pi, 200)
    pts = np.column_stack([r * np.cos(t), r * np.sin(t)])
    assert brute_force_hull_ok(pts, convex_hull_2d(pts).vertices)


def test_hull_brute_force_1000_sets():
    rng = np.random.default_rng(7)
    bad = 0
    for k in range(1000):
        n = int(rng.integers(3, 30))
        pts = rng.normal(size=(n, 2)) * rng.uniform(0.01, 10)
        if k % 5 == 0:  # duplicates and grid-aligned points
            pts = np.round(pts, 1)
            pts = np.vstack([pts, pts[: n // 2]])
        try:
            h = convex_hull_2d(pts)
        except DegenerateInput:
            continue
        bad += not brute_force_hull_ok(pts, h.vertices)
    assert bad == 0


def test_hull_keeps_near_vertical_extremes():
    # two nearly equal x-coordinates must not swallow a genuine corner
    pts = np.array([[0.3699999999999992, 0.21], [0.370000000000001, 0.0], [-0.37, 0.21], [-0.37, -0.21], [0.37, -0.21]])
    h = convex_hull_2d(pts)
    assert brute_force_hull_ok(pts, h.vertices)


@given(points)
def test_hull_properties(pts):
    pts = np.array(pts)
    try:
        h = convex_hull_2d(pts)
    except DegenerateInput:
        return
    v = h.vertices
    # CCW, no collinear triples
    k = len(v)
    for i in range(k):
        a, b, c = v[i - 1], v[i], v[(i + 1) % k]
        assert (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) > 0
    assert np.all(h.A @ pts.T <= h.b[:, None] + 1e-9 * (1 + np.abs(pts).max()))
    # idempotence
    h2 = convex_hull_2d(v)
    assert {tuple(p) for p in h2.vertices} == {tuple(p) for p in v}


def test_hull_distributes_over_minkowski(rng):
    for _ in range(50):
        A = rng.normal(size=(int(rng.integers(3, 9)), 2))
        B = rng.normal(size=(int(rng.integers(3, 9)), 2))
        lhs = convex_hull_2d(minkowski_sum_points(A, B))
        rhs = convex_hull_2d(minkowski_sum_points(convex_hull_2d(A).vertices, convex_hull_2d(B).vertices))
        assert hausdorff_distance(lhs, rhs) < 1e-12
    with pytest.raises(DimensionMismatch):
        minkowski_sum_points(np.zeros((2, 2)), np.zeros((2, 3)))


def test_area_trivial():
    assert polygon_area(convex_hull_2d([(0, 0), (1, 0), (1, 1), (0, 1)])) == pytest.approx(1.0)
    assert polygon_area(convex_hull_2d([(0, 0), (1, 0), (0, 1)])) == pytest.approx(0.5)


def test_area_monte_carlo(rng):
    p = random_convex(rng, 15)
    lo, hi = p.vertices.min(0), p.vertices.max(0)
    x = rng.uniform(lo, hi, size=(200000, 2))
    hit = np.all(p.A @ x.T <= p.b[:, None], axis=0).mean()
    assert p.area == pytest.approx(hit * np.prod(hi - lo), rel=0.01)


def test_scale_examples():
    sq = convex_hull_2d([(0, 0), (1, 0), (1, 1), (0, 1)])
    assert scale_polygon(sq, 1.0) is sq
    s = scale_polygon(sq, 0.8)
    assert {tuple(np.round(v, 12)) for v in s.vertices} == {(0.1, 0.1), (0.9, 0.1), (0.9, 0.9), (0.1, 0.9)}
    with pytest.raises(ValueError):
        scale_polygon(sq, 0.0)


@given(st.integers(0, 10_000), st.floats(0.05, 1.0), st.sampled_from(["centroid", "chebyshev"]))
def test_scale_area_ratio(seed, s, pivot):
    p = random_convex(np.random.default_rng(seed))
    q = scale_polygon(p, s, pivot)
    assert len(q) == len(p)
    assert q.area / p.area == pytest.approx(s * s, rel=1e-9)


def test_scale_065_ratio(rng):
    p = random_convex(rng)
    assert scale_polygon(p, 0.65).area / p.area == pytest.approx(0.4225, rel=1e-9)


def test_point_in_polygon():
    p = random_convex(np.random.default_rng(3))
    assert point_in_polygon(p, p.centroid).status == "inside"
    for v in p.vertices:
        assert point_in_polygon(p, v).status == "boundary"
    far = p.centroid + 100.0
    m = point_in_polygon(p, far)
    assert m.status == "outside" and m.distance < 0


@given(st.integers(0, 10_000))
def test_point_in_polygon_vs_halfspaces(seed):
    rng = np.random.default_rng(seed)
    p = random_convex(rng)
    for x in rng.normal(size=(50, 2)) * 2 + p.centroid:
        slack = min(b - a @ x for a, b in p.halfspaces)
        m = point_in_polygon(p, x)
        want = "inside" if slack > 1e-9 else ("boundary" if slack >= -1e-9 else "outside")
        assert m.status == want
        if want == "inside":
            assert m.distance == pytest.approx(slack, abs=1e-12)


def test_halfspace_conversion_examples():
    sq = vertices_from_halfspaces([[1, 0], [-1, 0], [0, 1], [0, -1]], [1, 0, 1, 0])
    assert len(sq) == 4
    assert sq.area == pytest.approx(1.0)
    with pytest.raises(Empty):
        vertices_from_halfspaces([[1, 0], [-1, 0], [0, 1]], [0, -1, 1])
    with pytest.raises(Unbounded):
        vertices_from_halfspaces([[1, 0], [0, 1]], [1, 1])


@given(st.integers(0, 10_000))
def test_conversion_round_trip(seed):
    p = random_convex(np.random.default_rng(seed))
    h = halfspaces_from_vertices(p)
    q = vertices_from_halfspaces(h.A, h.b)
    assert hausdorff_distance(p, q) <= 1e-7
    # sandwich: vertices satisfy all halfspaces, each halfspace tight at two vertices
    slack = h.b[:, None] - h.A @ p.vertices.T
    assert slack.min() >= -1e-7
    assert np.all((np.abs(slack) <= 1e-7).sum(axis=1) >= 2)
    assert np.allclose(np.linalg.norm(h.A, axis=1), 1.0)


def test_polygon_csv_round_trip(tmp_path, rng):
    p = random_convex(rng)
    write_polygon_csv(tmp_path / "p.csv", p, {"mode": "friction"})
    q, head = read_polygon_csv(tmp_path / "p.csv")
    assert head["mode"] == "friction"
    assert hausdorff_distance(p, q) < 1e-8


def test_zonotope_symmetry(rng):
    z = Zonotope(rng.normal(size=3), rng.normal(size=(5, 3)))
    for alpha in rng.uniform(-1, 1, size=(1000, 5)):
        x = z.point(alpha)
        assert np.allclose(z.reflect(z.reflect(x)), x)
        # the reflected point is generated by -alpha
        assert np.allclose(z.reflect(x), z.point(-alpha))
    for alpha in rng.uniform(-1, 1, size=(20, 5)):
        assert z.contains(z.reflect(z.point(alpha)))
    assert not z.contains(z.center + 10 * np.abs(z.generators).sum(0))


def test_zonotope_box():
    z = Zonotope.from_box([-1, -2], [1, 2])
    assert len(z.vertices()) == 4
    assert z.contains([0.9, -1.9]) and not z.contains([1.1, 0])


def _angle_cone(a0, a1):
    t = np.deg2rad([a0, a1])
    return PolyhedralCone(np.column_stack([np.cos(t), np.sin(t)]))


def test_cone_sum_identity_and_duplicates():
    c = _angle_cone(0, 30)
    s = minkowski_sum_cones(c, PolyhedralCone.zero(2))
    assert np.array_equal(s.rays, c.rays)
    one = PolyhedralCone([[1.0, 2.0]])
    d = minkowski_sum_cones(one, one)
    assert d.rays.shape == (2, 2)
    assert d.contains([2.0, 4.0]) and not d.contains([1.0, 0.0])
    assert len(prune_cone_rays(d).rays) == 1
    with pytest.raises(DimensionMismatch):
        minkowski_sum_cones(c, PolyhedralCone([[1.0, 0.0, 0.0]]))


def test_cone_sum_sampled_directions():
    # sum of [0, 30] and [60, 90] degree cones covers exactly [0, 90] degrees
    s = minkowski_sum_cones(_angle_cone(0, 30), _angle_cone(60, 90))
    rng = np.random.default_rng(11)
    ang = rng.uniform(-180, 180, 1000)
    ang = ang[np.abs(ang) > 1e-3]
    ang = ang[np.abs(ang - 90) > 1e-3]
    for a in ang:
        x = np.array([np.cos(np.deg2rad(a)), np.sin(np.deg2rad(a))])
        assert s.contains(x) == (0 < a < 90)


def test_cone_validation():
    with pytest.raises(ValueError):
        PolyhedralCone([[0.0, 0.0]])
    with pytest.raises(ValueError):
        PolyhedralCone([[1.0, 0.0]], halfspaces=[[1.0, 0.0]])
    PolyhedralCone([[1.0, 0.0]], halfspaces=[[-1.0, 0.0]])


def test_polygon_immutable():
    p = convex_hull_2d([(0, 0), (1, 0), (0, 1)])
    with pytest.raises(ValueError):
        p.vertices[0, 0] = 5.0
    assert contains(p, (0.2, 0.2))
