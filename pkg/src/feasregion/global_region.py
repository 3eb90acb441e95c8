"""Configuration-independent feasible region by sequential iterative projection.

For a search direction a the CoM estimate c is moved toward the boundary of
its own local feasible region: IK at c, rebuild the wrench polytopes, run the
projection, intersect the line c + t a with the region to get e, then
c <- c + alpha (e - c).  The fixed point is a vertex of the global region.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    EmptyRegion,
    FeasRegionError,
    JointLimit,
    KinematicLimitHit,
    NotConverged,
    OutOfWorkspace,
    RegionVanished,
)
from .geometry import Polygon2, convex_hull_2d, write_polygon_csv
from .region import RegionRequest, compute_region, membership_oracle


@dataclass
class SipRequest:
    scenario: object
    directions: np.ndarray = None  # (k, 2) unit vectors; 16 evenly spaced when None
    alpha: float = 0.5
    eps_d: float = 1e-3  # [m]
    max_iterations: int = 50
    start: np.ndarray = None  # initial CoM, scenario CoM when None
    region_eps: float = None  # [m^2] tolerance of the local projections

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if not self.eps_d > 0:
            raise ValueError("eps_d must be positive")
        if self.directions is None:
            self.directions = evenly_spaced(16)
        d = np.asarray(self.directions, dtype=float).reshape(-1, 2)
        self.directions = d / np.linalg.norm(d, axis=1)[:, None]
        if self.start is None:
            self.start = self.scenario.com[:2].copy()
        self.start = np.asarray(self.start, dtype=float)


def evenly_spaced(n, phase=0.0):
    t = phase + 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([np.cos(t), np.sin(t)])


@dataclass
class SipTrace:
    direction: np.ndarray
    vertex: np.ndarray = None
    distances: list = field(default_factory=list)  # d_k per iteration [m]
    iterates: list = field(default_factory=list)
    error: str = ""

    @property
    def iterations(self):
        return len(self.distances)

    @property
    def converged(self):
        return self.vertex is not None


@dataclass
class GlobalRegionResult:
    vertices: np.ndarray  # converged SIP vertices, one per successful direction
    traces: list
    polygon: Polygon2 = None  # hull of the vertices (None when fewer than 3 usable)

    @property
    def failures(self):
        return [(t.direction, t.error) for t in self.traces if not t.converged]


def line_exit(poly, c, a, tol=1e-12):
    """Largest t with c + t a in poly (t may be negative); None when the line misses."""
    A, b = poly.A, poly.b
    s = b - A @ c
    v = A @ a
    pos = v > tol
    neg = v < -tol
    if np.any(~pos & ~neg & (s < -1e-9)):
        return None
    t_hi = np.min(s[pos] / v[pos]) if pos.any() else np.inf
    t_lo = np.max(s[neg] / v[neg]) if neg.any() else -np.inf
    if t_lo > t_hi + 1e-12:
        return None
    return float(t_hi)


def local_region(scenario, c, eps=None):
    """Feasible region with the Jacobians evaluated at CoM c (base height fixed)."""
    try:
        states = scenario.limb_states(c)
    except (OutOfWorkspace, JointLimit) as exc:
        raise KinematicLimitHit(f"IK failed at CoM {np.round(c, 4).tolist()}: {exc}") from exc
    system = scenario.system("feasible", limb_states=states)
    try:
        return compute_region(RegionRequest(scenario, "feasible", eps=eps, system=system))
    except EmptyRegion as exc:
        raise RegionVanished(f"local region empty at CoM {np.round(c, 4).tolist()}") from exc


def sip_vertex(req, a, trace=None):
    """Walk from req.start along a until the CoM sits on the boundary of its own region."""
    a = np.asarray(a, dtype=float)
    a = a / np.linalg.norm(a)
    trace = trace if trace is not None else SipTrace(a)
    c = req.start.copy()
    for _ in range(req.max_iterations):
        res = local_region(req.scenario, c, req.region_eps)
        t = line_exit(res.inner, c, a)
        if t is None:
            raise RegionVanished("search line misses the local region")
        e = c + t * a
        d = float(np.hypot(*(e - c)))
        trace.distances.append(d)
        trace.iterates.append(c.copy())
        if d <= req.eps_d:
            trace.vertex = c.copy()
            return c
        c = c + req.alpha * (e - c)
    raise NotConverged(f"SIP did not converge in {req.max_iterations} iterations (last d = {d:.3g} m)")


def global_region(req):
    """One SIP vertex per direction; failures are recorded, never raised."""
    if len(req.directions) < 3:
        raise ValueError("need at least 3 search directions")
    traces, verts = [], []
    for a in req.directions:
        tr = SipTrace(a)
        try:
            verts.append(sip_vertex(req, a, tr))
        except FeasRegionError as exc:
            tr.error = f"{type(exc).__name__}: {exc}"
        traces.append(tr)
    verts = np.array(verts).reshape(-1, 2)
    poly = None
    if len(verts) >= 3:
        try:
            poly = convex_hull_2d(verts)
        except FeasRegionError:
            poly = None
    return GlobalRegionResult(verts, traces, poly)


def sweep_boundary(scenario, start, a, step=0.005, max_dist=2.0, refine=1e-5, eps=None):
    """Dense-sweep oracle: walk from start along a, checking each CoM at its own configuration.

    Returns the last feasible point refined by bisection to ``refine`` metres.
    """
    a = np.asarray(a, dtype=float) / np.linalg.norm(a)
    start = np.asarray(start, dtype=float)

    def ok(c):
        try:
            system = scenario.system("feasible", limb_states=scenario.limb_states(c))
        except (OutOfWorkspace, JointLimit):
            return False
        return membership_oracle(scenario, c, "feasible", system=system).feasible

    if not ok(start):
        raise RegionVanished("sweep start is not feasible at its own configuration")
    lo = 0.0
    hi = None
    t = step
    while t <= max_dist:
        if ok(start + t * a):
            lo = t
        else:
            hi = t
            break
        t += step
    if hi is None:
        return start + lo * a
    while hi - lo > refine:
        mid = 0.5 * (lo + hi)
        if ok(start + mid * a):
            lo = mid
        else:
            hi = mid
    return start + lo * a


@dataclass
class Slice:
    z: float
    polygon: Polygon2 = None
    result: GlobalRegionResult = None
    cause: str = ""  # empty, "KinematicLimitHit" or "RegionVanished"


def feasible_volume(scenario, z_levels, directions=None, **kw):
    """Global regions at several base heights, feet fixed; empty slices keep their cause."""
    out = []
    for z in z_levels:
        com = scenario.com.copy()
        com[2] = float(z)
        sc = replace(scenario, com=com)
        req = SipRequest(sc, directions=directions, **kw)
        try:
            sc.limb_states(req.start)
        except (OutOfWorkspace, JointLimit) as exc:
            out.append(Slice(float(z), cause="KinematicLimitHit"))
            continue
        try:
            local_region(sc, req.start)
        except RegionVanished:
            out.append(Slice(float(z), cause="RegionVanished"))
            continue
        res = global_region(req)
        if res.polygon is None:
            causes = [e.split(":")[0] for _, e in res.failures]
            cause = "KinematicLimitHit" if "KinematicLimitHit" in causes else "RegionVanished"
            out.append(Slice(float(z), None, res, cause))
        else:
            out.append(Slice(float(z), res.polygon, res))
    return out


def write_volume(slices, out_dir, prefix="slice"):
    """Per-slice CSV files plus an index mapping z to file (or to the empty-slice cause)."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    lines = ["z,file,cause"]
    for k, s in enumerate(slices):
        if s.polygon is None:
            lines.append(f"{s.z:.9g},,{s.cause}")
            continue
        name = f"{prefix}_{k:03d}.csv"
        write_polygon_csv(os.path.join(out_dir, name), s.polygon, {"z": f"{s.z:.9g}"})
        lines.append(f"{s.z:.9g},{name},")
    with open(os.path.join(out_dir, "volume_index.csv"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
