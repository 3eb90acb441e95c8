"""Iterative projection of the static-equilibrium polytope onto the CoM plane.

The LP over x = [f, c_xy] is solved along a sequence of directions.  Each
optimum is a feasible CoM (added to the inner polygon) and defines a
supporting line (clipping the outer polygon).  The next direction is the
outward normal of the inner edge whose far side holds the most outer area.
"""
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import DegenerateRegion, EmptyRegion, NotConverged, NumericalBreakdown
from .geometry import Polygon2, format_float, hull_vertices, polygon_to_csv
from .optim import LinearProgram, SimplexSession, solve_lp
from .scenario import normalize_mode

SEED_ANGLES = (0.0, 120.0, 240.0)
FALLBACK_ANGLES = (60.0, 180.0, 300.0)
_MIN_SEED_AREA = 1e-12  # [m^2]


@dataclass
class RegionRequest:
    scenario: object
    mode: str = "feasible"
    eps: float = None  # [m^2], scenario default when None
    max_iterations: int = None
    bounding_box: float = None  # half-width [m]
    com_xy: np.ndarray = None  # configuration point for the Jacobians (default: scenario CoM)
    system: object = None  # pre-assembled ConstraintSystem, overrides com_xy

    def __post_init__(self):
        self.mode = normalize_mode(self.mode)
        d = self.scenario.region
        if self.eps is None:
            self.eps = d.eps
        if self.max_iterations is None:
            self.max_iterations = d.max_iterations
        if self.bounding_box is None:
            self.bounding_box = d.bounding_box
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not self.bounding_box > 0:
            raise ValueError("bounding box must be positive")


@dataclass
class RegionResult:
    inner: Polygon2
    outer: Polygon2
    iterations: int
    lp_calls: int
    converged: bool
    area_gap: float
    witnesses: np.ndarray  # one force vector per inner vertex, same order
    mode: str = "feasible"
    eps: float = 1e-6
    bounding_box: float = 10.0
    box_center: np.ndarray = None
    pivots: int = 0
    system: object = field(default=None, repr=False)

    @property
    def area(self):
        return self.inner.area

    def metadata(self):
        return {
            "mode": self.mode,
            "eps": self.eps,
            "iterations": self.iterations,
            "lp_calls": self.lp_calls,
            "converged": self.converged,
            "area_gap": float(self.area_gap),
            "inner_area": float(self.inner.area),
            "outer_area": float(self.outer.area),
            "bounding_box": self.bounding_box,
        }

    def csv(self, which="inner"):
        header = {k: (format_float(v) if isinstance(v, float) else v) for k, v in self.metadata().items()}
        header["polygon"] = which
        return polygon_to_csv(self.inner if which == "inner" else self.outer, header)


def _box(center, half):
    cx, cy = center
    return np.array(
        [[cx - half, cy - half], [cx + half, cy - half], [cx + half, cy + half], [cx - half, cy + half]]
    )


def _unit(deg):
    t = np.deg2rad(deg)
    return np.array([np.cos(t), np.sin(t)])


def _region_lp(system, mode, center, half):
    C, d = system.inequalities(mode)
    nf = system.n_forces
    A = np.hstack([system.A1, system.A2])
    Cx = np.hstack([C, np.zeros((C.shape[0], 2))])
    bounds = [(None, None)] * nf + [
        (center[0] - half, center[0] + half),
        (center[1] - half, center[1] + half),
    ]
    return LinearProgram(np.zeros(nf + 2), A, system.u, Cx, d, bounds)


class _Hull:
    """Inner polygon with the witness of every vertex."""

    def __init__(self):
        self.points = []
        self.forces = []
        self.verts = np.zeros((0, 2))
        self.idx = []

    def add(self, c, f):
        self.points.append(c)
        self.forces.append(f)
        v = hull_vertices(np.array(self.points))
        lookup = {}
        for i, p in enumerate(self.points):
            lookup.setdefault((p[0], p[1]), i)
        self.verts = v
        self.idx = [lookup[(p[0], p[1])] for p in v]

    def witnesses(self):
        return np.array([self.forces[i] for i in self.idx])


def compute_region(req):
    """Inner/outer polygon pair for the requested constraint mode.

    Raises EmptyRegion when the LP is infeasible (no CoM balances the load),
    DegenerateRegion when all probes collapse onto a segment or point, and
    NotConverged (carrying the partial result) at the iteration cap.
    """
    sc = req.scenario
    mode = req.mode
    system = req.system
    if system is None:
        system = sc.system(mode, com_xy=req.com_xy)
    center = sc.stance_centroid
    half = req.bounding_box
    lp = _region_lp(system, mode, center, half)
    sess = SimplexSession(lp)
    if not sess.feasible:
        raise EmptyRegion(f"{mode} region is empty: no CoM position balances the load")
    nf = system.n_forces

    outer = _box(center, half)
    hull = _Hull()
    pivots = 0

    def probe(a):
        nonlocal outer, pivots
        obj = np.zeros(nf + 2)
        obj[nf:] = a
        sol = sess.maximize(obj)
        pivots += sol.iterations
        if sol.status != "optimal":
            raise NumericalBreakdown(f"directional LP returned {sol.status}")
        c = sol.x[nf:]
        outer = kernels.clip_halfspace(outer, a, float(a @ c))
        hull.add(c, sol.x[:nf])

    for ang in SEED_ANGLES:
        probe(_unit(ang))
    if len(hull.verts) < 3 or kernels.shoelace(hull.verts) < _MIN_SEED_AREA:
        for ang in FALLBACK_ANGLES:
            probe(_unit(ang))
        if len(hull.verts) < 3 or kernels.shoelace(hull.verts) < _MIN_SEED_AREA:
            raise DegenerateRegion(f"{mode} region has no interior (collinear or single-point probes)")

    it = 0
    while True:
        gap = abs(kernels.shoelace(outer)) - kernels.shoelace(hull.verts)
        if gap <= req.eps or it >= req.max_iterations:
            break
        cuts = kernels.cut_areas(outer, hull.verts)
        e = int(np.argmax(cuts))
        p = hull.verts[e]
        q = hull.verts[(e + 1) % len(hull.verts)]
        a = np.array([q[1] - p[1], p[0] - q[0]])
        probe(a / np.hypot(a[0], a[1]))
        it += 1

    outer_v = hull_vertices(outer)
    res = RegionResult(
        inner=Polygon2(vertices=hull.verts),
        outer=Polygon2(vertices=outer_v),
        iterations=it,
        lp_calls=sess.calls,
        converged=gap <= req.eps,
        area_gap=float(gap),
        witnesses=hull.witnesses(),
        mode=mode,
        eps=req.eps,
        bounding_box=half,
        box_center=center,
        pivots=pivots,
        system=system,
    )
    if not res.converged:
        raise NotConverged(
            f"area gap {gap:.3g} m^2 > eps {req.eps:.3g} after {it} iterations", result=res
        )
    return res


def region(scenario, mode="feasible", **kw):
    return compute_region(RegionRequest(scenario, mode, **kw))


class MembershipResult(NamedTuple):
    feasible: bool
    witness: np.ndarray  # contact forces when feasible
    certificate: tuple  # Farkas multipliers (y_eq, z_ineq) when infeasible


def membership_oracle(scenario, c_xy, mode="feasible", system=None, com_xy=None):
    """Single LP with the CoM fixed: does some force vector balance it?"""
    mode = normalize_mode(mode)
    if system is None:
        system = scenario.system(mode, com_xy=com_xy)
    c = np.asarray(c_xy, dtype=float)
    C, d = system.inequalities(mode)
    lp = LinearProgram(
        np.zeros(system.n_forces), system.A1, system.u - system.A2 @ c, C, d
    )
    sol = solve_lp(lp)
    if sol.status == "optimal":
        return MembershipResult(True, sol.x, None)
    return MembershipResult(False, None, sol.certificate)


class TorqueReport(NamedTuple):
    tau: np.ndarray  # (n_c, 3) [N m]
    limits: np.ndarray  # (n_c, 3) symmetric bounds [N m]
    beta: int  # 1 when any joint exceeds its limit
    m_tau: float  # min distance to the nearer limit [N m]
    residual: float  # equilibrium residual of the supplied forces


LIMIT_TOL = 1e-7  # [N m]


def torque_margin(tau, limits):
    """min over joints of the distance between torque and its nearer limit."""
    tau = np.asarray(tau, dtype=float)
    lim = np.asarray(limits, dtype=float)
    return float(np.min(np.minimum(lim - tau, tau + lim)))


def torque_recovery(scenario, c_xy, f, system=None, com_xy=None):
    """Joint torques tau_i = g(q_i) - J_i^T f_i behind a force vector, and the beta flag."""
    if system is None or system.polytopes is None:
        system = scenario.system("feasible", com_xy=com_xy)
    f = np.asarray(f, dtype=float).reshape(-1, 3)
    tau = np.array([wp.torques(fi) for wp, fi in zip(system.polytopes, f)])
    lim = np.array([wp.tau_lim for wp in system.polytopes])
    c = np.asarray(c_xy, dtype=float)
    res = float(np.abs(system.A1 @ f.reshape(-1) + system.A2 @ c - system.u).max())
    beta = int(np.any(np.abs(tau) > lim + LIMIT_TOL))
    return TorqueReport(tau, lim, beta, torque_margin(tau, lim), res)
