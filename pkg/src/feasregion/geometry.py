"""2D/3D convex geometry: polygons, cones, zonotopes, hulls and Minkowski sums.

Positions are in meters.  All values are immutable after construction.
"""
import itertools
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import DegenerateInput, DimensionMismatch, Empty, Unbounded

COLLINEAR_TOL = 1e-9  # [m]
BOUNDARY_TOL = 1e-9  # [m]
_BIG = 1e7  # [m], seed box for halfspace intersection


def _readonly(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def hull_vertices(points, tol=COLLINEAR_TOL):
    """Monotone-chain hull; returns CCW vertices (k, 2), possibly k < 3.

    A point closer than ``tol`` to the chord between its neighbours is dropped,
    which also removes duplicates.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= 0.0:
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(pts[::-1])
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 0:
        return pts[:1]
    # second pass: drop vertices within tol of the segment joining their neighbours
    pruned = True
    while pruned and len(hull) >= 3:
        pruned = False
        k = len(hull)
        for i in range(k):
            if _segment_distance(hull[i], hull[i - 1], hull[(i + 1) % k]) <= tol:
                del hull[i]
                pruned = True
                break
    if len(hull) == 2 and np.hypot(*(hull[0] - hull[1])) <= tol:
        hull = hull[:1]
    return np.array(hull)


def _halfspaces_of(verts):
    nxt = np.roll(verts, -1, axis=0)
    d = nxt - verts
    normals = np.column_stack([d[:, 1], -d[:, 0]])
    lengths = np.hypot(normals[:, 0], normals[:, 1])
    normals = normals / lengths[:, None]
    offsets = np.einsum("ij,ij->i", normals, verts)
    return normals, offsets


class Membership(NamedTuple):
    status: str  # "inside" | "boundary" | "outside"
    distance: float  # [m], positive inside


class Polygon2:
    """Convex polygon holding a vertex form and a halfspace form.

    Whichever form was not supplied is derived on first access and cached.
    Vertices are CCW; halfspaces are ``A x <= b`` with unit-norm rows of ``A``.
    """

    __slots__ = ("_vertices", "_A", "_b")

    def __init__(self, vertices=None, A=None, b=None):
        if vertices is None and A is None:
            raise ValueError("need vertices or halfspaces")
        self._vertices = None if vertices is None else _readonly(vertices)
        self._A = None if A is None else _readonly(A)
        self._b = None if b is None else _readonly(b)

    @classmethod
    def from_vertices(cls, points):
        """Polygon from arbitrary points (hull taken, collinear points dropped)."""
        return convex_hull_2d(points)

    @classmethod
    def from_halfspaces(cls, A, b):
        return vertices_from_halfspaces(A, b)

    @property
    def vertices(self):
        if self._vertices is None:
            self._vertices = vertices_from_halfspaces(self._A, self._b).vertices
        return self._vertices

    @property
    def A(self):
        if self._A is None:
            A, b = _halfspaces_of(self.vertices)
            self._A, self._b = _readonly(A), _readonly(b)
        return self._A

    @property
    def b(self):
        if self._b is None:
            self.A
        return self._b

    @property
    def halfspaces(self):
        return list(zip(self.A, self.b))

    @property
    def area(self):
        return polygon_area(self)

    @property
    def centroid(self):
        """Average of the vertices."""
        return self.vertices.mean(axis=0)

    def __len__(self):
        return len(self.vertices)

    def __repr__(self):
        return f"Polygon2({len(self.vertices)} vertices, area={self.area:.6g})"


def convex_hull_2d(points):
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] < 3:
        raise DegenerateInput(f"need at least 3 points, got {pts.shape[0]}")
    hull = hull_vertices(pts)
    if hull.shape[0] < 3:
        raise DegenerateInput("points are collinear or coincident")
    return Polygon2(vertices=hull)


def polygon_area(p):
    verts = p.vertices if isinstance(p, Polygon2) else np.asarray(p, dtype=float)
    return abs(kernels.shoelace(verts))


def scale_polygon(p, s, pivot="centroid"):
    """Scale about the vertex centroid or the Chebyshev center: v' = s (v - c) + c."""
    if not 0.0 < s <= 1.0:
        raise ValueError(f"scale factor must lie in (0, 1], got {s}")
    if pivot == "centroid":
        c = p.centroid
    elif pivot == "chebyshev":
        from .optim import chebyshev_center

        c, _ = chebyshev_center(p)
    else:
        c = np.asarray(pivot, dtype=float)
    if s == 1.0:
        return p
    return Polygon2(vertices=s * (p.vertices - c) + c)


def point_in_polygon(p, x):
    x = np.asarray(x, dtype=float)
    slack = p.b - p.A @ x
    d = float(slack.min())
    if d < -BOUNDARY_TOL:
        return Membership("outside", -distance_to_polygon(p, x))
    if d <= BOUNDARY_TOL:
        return Membership("boundary", d)
    return Membership("inside", d)


def contains(p, x, tol=BOUNDARY_TOL):
    return float((p.b - p.A @ np.asarray(x, dtype=float)).min()) >= -tol


def _segment_distance(x, a, b):
    d = b - a
    dd = float(d @ d)
    t = 0.0 if dd == 0.0 else min(1.0, max(0.0, float((x - a) @ d) / dd))
    return float(np.hypot(*(a + t * d - x)))


def distance_to_polygon(p, x):
    """Euclidean distance from x to the polygon (0 inside)."""
    x = np.asarray(x, dtype=float)
    if contains(p, x, 0.0):
        return 0.0
    return distance_to_boundary(p, x)


def distance_to_boundary(p, x):
    x = np.asarray(x, dtype=float)
    v = p.vertices
    return min(_segment_distance(x, v[i], v[(i + 1) % len(v)]) for i in range(len(v)))


def hausdorff_distance(p, q):
    """Hausdorff distance between two convex polygons (attained at vertices)."""
    d1 = max(distance_to_polygon(q, v) for v in p.vertices)
    d2 = max(distance_to_polygon(p, v) for v in q.vertices)
    return max(d1, d2)


def halfspaces_from_vertices(p):
    if isinstance(p, Polygon2):
        verts = p.vertices
    else:
        verts = convex_hull_2d(p).vertices
    A, b = _halfspaces_of(verts)
    return Polygon2(vertices=verts, A=A, b=b)


def vertices_from_halfspaces(A, b):
    """Intersect halfspaces A x <= b; raises Empty or Unbounded."""
    A = np.asarray(A, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.shape[0] != b.shape[0]:
        raise DimensionMismatch("A and b have different row counts")
    norms = np.hypot(A[:, 0], A[:, 1])
    if np.any(norms == 0.0):
        zero = norms == 0.0
        if np.any(b[zero] < 0.0):
            raise Empty("0 <= b violated by a zero-normal row")
        A, b, norms = A[~zero], b[~zero], norms[~zero]
    A = A / norms[:, None]
    b = b / norms

    def intersect(half):
        poly = np.array([[-half, -half], [half, -half], [half, half], [-half, half]])
        for a_i, b_i in zip(A, b):
            poly = kernels.clip_halfspace(poly, a_i, b_i)
            if poly.shape[0] == 0:
                raise Empty("halfspace intersection is empty")
        return poly

    rough = intersect(_BIG)
    if np.abs(rough).max() >= _BIG * (1.0 - 1e-9):
        raise Unbounded("halfspace intersection is unbounded")
    # redo inside a tight box for accuracy
    half = 2.0 * np.abs(rough).max() + 1.0
    poly = intersect(half)
    verts = hull_vertices(poly)
    if verts.shape[0] < 3:
        raise Empty("halfspace intersection has no interior")
    return Polygon2(vertices=verts)


def clip_polygon(p, a, b):
    verts = kernels.clip_halfspace(p.vertices, a, b)
    hull = hull_vertices(verts)
    if hull.shape[0] < 3:
        raise Empty("clipped polygon has no interior")
    return Polygon2(vertices=hull)


def minkowski_sum_points(A, B):
    """Pairwise sums of two finite point sets, O(a*b)."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatch("point sets of different dimension")
    return (A[:, None, :] + B[None, :, :]).reshape(-1, A.shape[1])


# ---------------------------------------------------------------------------
# polygon CSV
# ---------------------------------------------------------------------------

def format_float(x):
    return f"{float(x):.9g}"


def polygon_to_csv(p, header=None):
    lines = []
    for key, value in (header or {}).items():
        lines.append(f"# {key}: {value}")
    verts = p.vertices if isinstance(p, Polygon2) else np.asarray(p)
    lines.extend(f"{format_float(x)},{format_float(y)}" for x, y in verts)
    return "\n".join(lines) + "\n"


def write_polygon_csv(path, p, header=None):
    with open(path, "w") as fh:
        fh.write(polygon_to_csv(p, header))


def read_polygon_csv(path):
    """Returns (Polygon2, header dict)."""
    header = {}
    pts = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                header[key.strip()] = value.strip()
                continue
            x, y = line.split(",")
            pts.append((float(x), float(y)))
    return Polygon2(vertices=np.array(pts)), header


# ---------------------------------------------------------------------------
# zonotopes and cones
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Zonotope:
    center: np.ndarray
    generators: np.ndarray  # (p, n)

    def __post_init__(self):
        c = _readonly(self.center).reshape(-1)
        g = _readonly(self.generators).reshape(-1, c.shape[0])
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "generators", g)

    @classmethod
    def from_box(cls, lo, hi):
        """Axis-aligned box lo <= x <= hi, e.g. the joint-torque cube."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        return cls(0.5 * (lo + hi), np.diag(0.5 * (hi - lo)))

    @property
    def dim(self):
        return self.center.shape[0]

    def point(self, alpha):
        return self.center + np.asarray(alpha, dtype=float) @ self.generators

    def reflect(self, x):
        return 2.0 * self.center - np.asarray(x, dtype=float)

    def vertices(self):
        """Images of all sign vectors (includes non-extreme points for p > n)."""
        p = self.generators.shape[0]
        signs = np.array(list(itertools.product((-1.0, 1.0), repeat=p)))
        return np.unique(self.center + signs @ self.generators, axis=0)

    def contains(self, x, tol=1e-9):
        from .optim import LinearProgram, solve_lp

        p = self.generators.shape[0]
        lp = LinearProgram(
            objective=np.zeros(p),
            A=self.generators.T,
            b=np.asarray(x, dtype=float) - self.center,
            bounds=[(-1.0 - tol, 1.0 + tol)] * p,
        )
        return solve_lp(lp).status == "optimal"


@dataclass(frozen=True)
class PolyhedralCone:
    """Cone in R-representation, optionally with its H-representation C x <= 0."""

    rays: np.ndarray
    halfspaces: np.ndarray = None
    dim: int = field(default=None)

    def __post_init__(self):
        rays = np.asarray(self.rays, dtype=float)
        dim = self.dim
        if dim is None:
            if rays.size == 0:
                raise ValueError("an empty ray list needs an explicit dim")
            dim = rays.reshape(len(rays), -1).shape[1]
        rays = rays.reshape(-1, dim)
        if rays.shape[0] and np.any(np.linalg.norm(rays, axis=1) == 0.0):
            raise ValueError("rays must be nonzero")
        object.__setattr__(self, "rays", _readonly(rays))
        object.__setattr__(self, "dim", int(dim))
        if self.halfspaces is not None:
            C = _readonly(np.asarray(self.halfspaces, dtype=float).reshape(-1, dim))
            object.__setattr__(self, "halfspaces", C)
            if rays.shape[0] and np.max(C @ rays.T) > 1e-9:
                raise ValueError("a ray violates the H-representation")

    @classmethod
    def zero(cls, dim):
        return cls(np.zeros((0, dim)), dim=dim)

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        if self.rays.shape[0] == 0:
            return bool(np.linalg.norm(x) <= tol)
        from .optim import LinearProgram, solve_lp

        k = self.rays.shape[0]
        lp = LinearProgram(
            objective=np.zeros(k),
            A=self.rays.T,
            b=x,
            bounds=[(0.0, None)] * k,
        )
        return solve_lp(lp).status == "optimal"


def minkowski_sum_cones(c1, c2):
    """Sum of two cones by stacking their rays (redundant rays kept)."""
    if c1.dim != c2.dim:
        raise DimensionMismatch(f"cone dimensions differ: {c1.dim} vs {c2.dim}")
    return PolyhedralCone(np.vstack([c1.rays, c2.rays]), dim=c1.dim)


def prune_cone_rays(cone):
    """Drop rays that are conic combinations of the remaining ones (display only)."""
    keep = list(range(cone.rays.shape[0]))
    for i in list(keep):
        others = [j for j in keep if j != i]
        if not others:
            continue
        sub = PolyhedralCone(cone.rays[others], dim=cone.dim)
        if sub.contains(cone.rays[i]):
            keep = others
    return PolyhedralCone(cone.rays[keep], dim=cone.dim)
