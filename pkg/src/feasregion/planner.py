"""CoM targets, foothold selection and a kinematic crawl that logs torque margins."""
import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .constraints import Contact
from .errors import (
    EmptyRegion,
    FeasRegionError,
    Infeasible,
    JointLimit,
    NoFeasibleFoothold,
    OutOfBounds,
    OutOfWorkspace,
    PhaseAborted,
)
from .geometry import Polygon2, contains, format_float, scale_polygon
from .optim import LinearProgram, chebyshev_margin, closest_point_in_polygon, solve_lp
from .region import LIMIT_TOL, RegionRequest, compute_region, torque_margin

FUTURE_COM_OFFSET = 0.06  # [m] shift off the main diagonal, fixture constant
CANDIDATE_SPACING = 0.04  # [m]
MAX_SLOPE_DEG = 40.0
EDGE_HEIGHT = 0.05  # [m]
EDGE_MARGIN = 0.06  # [m]
AREA_TIE = 1e-9  # relative

DIAGONAL = {"LF": "RH", "RH": "LF", "RF": "LH", "LH": "RF"}


# ---------------------------------------------------------------------------
# force distribution and margins
# ---------------------------------------------------------------------------

class ForceDistribution(NamedTuple):
    f: np.ndarray  # (n_c, 3) [N]
    tau: np.ndarray  # (n_c, 3) [N m]
    t: float  # max |tau| / tau_lim
    m_tau: float  # [N m]
    beta: int


def force_distribution(scenario, com_xy, mode="friction", system=None, com_config=None):
    """Contact forces holding the CoM at com_xy with the smallest worst-case normalised torque.

    Stage 1 minimises t = max_j |tau_j| / tau_lim_j subject to equilibrium
    and friction (plus the wrench polytopes in "feasible" mode).  Stage 2
    keeps t within 1e-9 of its optimum and minimises the largest normal force,
    which spreads the load evenly when the torque objective leaves freedom.
    Raises Infeasible when no force vector satisfies the constraints.
    """
    if mode not in ("friction", "feasible"):
        raise ValueError("mode must be 'friction' or 'feasible'")
    if system is None or system.polytopes is None:
        system = scenario.system("feasible", com_xy=com_config if com_config is not None else com_xy)
    c = np.asarray(com_xy, dtype=float)
    n3 = system.n_forces
    nc = n3 // 3
    rows, rhs = [system.B], [np.zeros(system.B.shape[0])]
    if mode == "feasible":
        rows.append(system.G)
        rhs.append(system.d)
    # |g - J^T f| / tau_lim <= t
    T = np.zeros((6 * nc, n3))
    tr = np.zeros(6 * nc)
    for i, wp in enumerate(system.polytopes):
        s = 1.0 / wp.tau_lim
        T[6 * i:6 * i + 3, 3 * i:3 * i + 3] = -(wp.J.T * s[:, None])
        T[6 * i + 3:6 * i + 6, 3 * i:3 * i + 3] = wp.J.T * s[:, None]
        tr[6 * i:6 * i + 3] = -wp.g * s
        tr[6 * i + 3:6 * i + 6] = wp.g * s
    F = np.vstack(rows)
    Fd = np.concatenate(rhs)
    A = np.hstack([system.A1, np.zeros((6, 2))])
    b = system.u - system.A2 @ c
    C1 = np.vstack([
        np.hstack([F, np.zeros((F.shape[0], 2))]),
        np.hstack([T, -np.ones((6 * nc, 1)), np.zeros((6 * nc, 1))]),
    ])
    d1 = np.concatenate([Fd, tr])
    obj = np.zeros(n3 + 2)
    obj[n3] = -1.0
    bounds = [(None, None)] * n3 + [(0.0, None), (0.0, 0.0)]
    sol = solve_lp(LinearProgram(obj, A, b, C1, d1, bounds))
    if sol.status != "optimal":
        raise Infeasible(f"no {mode}-consistent force distribution at CoM {c.round(4).tolist()}")
    t_star = sol.x[n3]

    # stage 2: largest normal force
    N = np.zeros((nc, n3 + 2))
    for i, con in enumerate(system.contacts):
        N[i, 3 * i:3 * i + 3] = con.normal
        N[i, n3 + 1] = -1.0
    C2 = np.vstack([C1, N])
    d2 = np.concatenate([d1, np.zeros(nc)])
    obj2 = np.zeros(n3 + 2)
    obj2[n3 + 1] = -1.0
    bounds2 = [(None, None)] * n3 + [(0.0, t_star + 1e-9 * (1.0 + t_star)), (None, None)]
    sol2 = solve_lp(LinearProgram(obj2, A, b, C2, d2, bounds2))
    x = sol2.x if sol2.status == "optimal" else sol.x
    f = x[:n3].reshape(nc, 3)
    tau = np.array([wp.torques(fi) for wp, fi in zip(system.polytopes, f)])
    lim = np.array([wp.tau_lim for wp in system.polytopes])
    beta = int(np.any(np.abs(tau) > lim + LIMIT_TOL))
    return ForceDistribution(f, tau, float(np.max(np.abs(tau) / lim)), torque_margin(tau, lim), beta)


def m_tau(tau, limits):
    return torque_margin(tau, limits)


class MarginReport(NamedTuple):
    r: float  # [m]
    beta: int
    m_tau: float  # [N m], nan when no force distribution exists
    region: object


def margin(scenario, com_xy, region=None, system=None):
    """Feasibility margin of com_xy in the feasible region, with the torque flag.

    beta comes from the friction-only force distribution at com_xy: the best
    torque-aware forces the contacts could supply there.  It is 1 when those
    still exceed a limit or when no friction-consistent forces exist at all.
    """
    if system is None:
        system = scenario.system("feasible")
    if region is None:
        region = compute_region(RegionRequest(scenario, "feasible", system=system))
    r = chebyshev_margin(region.inner, com_xy)
    try:
        fd = force_distribution(scenario, com_xy, "friction", system=system)
        return MarginReport(r, fd.beta, fd.m_tau, region)
    except Infeasible:
        return MarginReport(r, 1, float("nan"), region)


# ---------------------------------------------------------------------------
# CoM target
# ---------------------------------------------------------------------------

def heuristic_future_com(feet_xy, swing_leg, offset=FUTURE_COM_OFFSET):
    """Stance-triangle centroid pushed off the main diagonal toward the remaining support leg."""
    stance = {k: np.asarray(v, dtype=float)[:2] for k, v in feet_xy.items() if k != swing_leg}
    centroid = np.mean(list(stance.values()), axis=0)
    off = DIAGONAL.get(swing_leg)
    if off not in stance or len(stance) != 3:
        return centroid
    a, b = [stance[k] for k in stance if k != off]
    d = b - a
    n = np.array([-d[1], d[0]]) / np.hypot(d[0], d[1])
    if n @ (stance[off] - a) < 0:
        n = -n
    return centroid + offset * n


class ComTarget(NamedTuple):
    target: np.ndarray
    region: object  # RegionResult of the stance
    scaled: Polygon2
    inside: bool


def com_target(scenario, current_com, s=0.8, mode="feasible", com_config=None, pivot="centroid", replan=0):
    """Target CoM for a stance: stay put if inside the scaled region, else project onto it.

    ``scenario`` carries the future stance (>= 3 contacts); Jacobians are taken
    at com_config (typically the heuristic future CoM).  With replan > 0 the
    region is recomputed that many times with the Jacobians at the previous
    target, mimicking a planner that refreshes as the configuration changes.
    """
    if len(scenario.contacts) < 3:
        raise ValueError("future stance needs at least 3 contacts")
    c = np.asarray(current_com, dtype=float)[:2]
    for _ in range(replan + 1):
        res = compute_region(RegionRequest(scenario, mode, com_xy=com_config))
        scaled = scale_polygon(res.inner, s, pivot)
        if contains(scaled, c, 0.0):
            out = ComTarget(c.copy(), res, scaled, True)
        else:
            out = ComTarget(closest_point_in_polygon(scaled, c), res, scaled, False)
        if mode == "friction":
            break
        com_config = out.target
    return out


# ---------------------------------------------------------------------------
# foothold selection
# ---------------------------------------------------------------------------

@dataclass
class Candidate:
    index: int
    position: np.ndarray  # (3,) [m]
    normal: np.ndarray = None
    discarded: str = ""  # reason, empty when evaluated
    area: float = float("nan")  # feasible-region area [m^2]
    friction_area: float = float("nan")


@dataclass
class FootholdPlan:
    chosen: int
    position: np.ndarray
    default_index: int
    candidates: list
    reason: str = ""

    @property
    def survivors(self):
        return [c for c in self.candidates if not c.discarded]


def sample_candidates(default_xy, direction, p, spacing=CANDIDATE_SPACING):
    """p points on a line through the default foothold along the motion direction."""
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    offs = (np.arange(p) - (p - 1) / 2.0) * spacing
    return np.asarray(default_xy, dtype=float)[:2] + offs[:, None] * u, int(np.argmin(np.abs(offs)))


def _evaluate(scenario, stance_legs, swing_leg, cand, heightmap, com_config):
    x, y = cand.position[:2]
    try:
        z, n = heightmap.sample(x, y)
    except OutOfBounds:
        cand.discarded = "off_map"
        return cand
    cand.position = np.array([x, y, z])
    cand.normal = n
    if heightmap.slope_deg(x, y) > MAX_SLOPE_DEG:
        cand.discarded = "slope"
        return cand
    if heightmap.nearest_jump(x, y, EDGE_HEIGHT, 3 * EDGE_MARGIN) < EDGE_MARGIN:
        cand.discarded = "edge"
        return cand
    mu = scenario.contacts[0].mu
    contacts = []
    for c in scenario.contacts:
        if c.leg == swing_leg:
            contacts.append(Contact(cand.position, n, c.mu, c.mode, c.leg))
        elif c.leg in stance_legs:
            contacts.append(c)
    if not any(c.leg == swing_leg for c in scenario.contacts):
        contacts.append(Contact(cand.position, n, mu, "unilateral", swing_leg))
    future = replace(scenario, contacts=contacts)
    try:
        fa = compute_region(RegionRequest(future, "feasible", com_xy=com_config))
        cand.area = fa.inner.area
        fr = compute_region(RegionRequest(future, "friction"))
        cand.friction_area = fr.inner.area
    except (OutOfWorkspace, JointLimit):
        cand.discarded = "workspace"
    except EmptyRegion:
        cand.discarded = "empty_region"
    return cand


def select_foothold(candidates, default_index):
    """Pick among evaluated candidates.

    When every survivor's feasible area equals its friction area the torque
    limits are inactive and the default foothold wins.  Otherwise the largest
    feasible area wins; near-ties go to the default, then to the lowest index.
    """
    alive = [c for c in candidates if not c.discarded]
    if not alive:
        raise NoFeasibleFoothold("every candidate foothold was discarded")
    by_index = {c.index: c for c in alive}
    inactive = all(abs(c.area - c.friction_area) <= AREA_TIE * max(1.0, c.friction_area) + 1e-9 for c in alive)
    if inactive and default_index in by_index:
        return default_index, "actuation_inactive"
    best = max(c.area for c in alive)
    tied = sorted(c.index for c in alive if c.area >= best - AREA_TIE * max(best, 1e-12) - 1e-12)
    if default_index in tied:
        return default_index, "max_area_default"
    return tied[0], "max_area"


def plan_foothold(scenario, swing_leg, heightmap, default_xy, p=9, direction=(1.0, 0.0),
                  stance_legs=None, com_config=None, candidates=None, workers=1):
    """Sample p footholds around the default, filter them, and keep the one with the largest feasible region.

    ``stance_legs`` lists the legs that support the robot together with the
    candidate in the stance being scored (default: every other leg).
    """
    if p < 1:
        raise ValueError("need at least one candidate")
    if candidates is None:
        pts, default_index = sample_candidates(default_xy, direction, p)
    else:
        pts = np.asarray(candidates, dtype=float)[:, :2]
        d = np.hypot(*(pts - np.asarray(default_xy)[:2]).T)
        default_index = int(np.argmin(d))
    if stance_legs is None:
        stance_legs = [c.leg for c in scenario.contacts if c.leg != swing_leg]
    if com_config is None:
        feet = {c.leg: c.position for c in scenario.contacts}
        feet[swing_leg] = np.array([*np.asarray(default_xy)[:2], 0.0])
        legs = set(stance_legs) | {swing_leg}
        com_config = np.mean([feet[k][:2] for k in legs if k in feet], axis=0)
    cands = [Candidate(i, np.array([x, y, 0.0])) for i, (x, y) in enumerate(pts)]
    job = lambda c: _evaluate(scenario, stance_legs, swing_leg, c, heightmap, com_config)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            cands = list(ex.map(job, cands))
    else:
        cands = [job(c) for c in cands]
    idx, why = select_foothold(cands, default_index)
    return FootholdPlan(idx, cands[idx].position, default_index, cands, why)


# ---------------------------------------------------------------------------
# crawl
# ---------------------------------------------------------------------------

@dataclass
class GaitSchedule:
    sequence: tuple = ("LH", "LF", "RH", "RF")
    steps: int = 8  # swing phases
    step_length: float = 0.12  # [m]
    direction: tuple = (1.0, 0.0)
    swing_duration: float = 0.5  # [s]
    move_duration: float = 1.0  # [s]
    scale: float = 0.8
    candidates: int = 9
    replan: int = 1  # extra CoM-target passes at the updated configuration

    def __post_init__(self):
        if len(set(self.sequence)) != len(self.sequence):
            raise ValueError("each leg must appear once in the gait sequence")


@dataclass
class PhaseRecord:
    time: float
    phase: str  # move_base | swing | aborted
    swing_leg: str
    com: np.ndarray
    r: float = float("nan")
    m_tau: float = float("nan")
    beta: int = 0
    area_f: float = float("nan")
    area_fa: float = float("nan")
    foothold: np.ndarray = None
    note: str = ""
    path: np.ndarray = None  # sampled CoM trajectory for move_base phases
    stance_xy: np.ndarray = None  # (3, 2) supporting feet during a swing
    poly_f: Polygon2 = None
    poly_fa: Polygon2 = None


@dataclass
class PlanLog:
    strategy: str
    records: list = field(default_factory=list)

    def triple(self):
        return [r for r in self.records if r.phase == "swing"]

    @property
    def min_m_tau(self):
        vals = [r.m_tau for r in self.triple() if np.isfinite(r.m_tau)]
        return min(vals) if vals else float("nan")

    def footholds(self):
        return [r.foothold for r in self.triple()]

    def m_tau_trace(self):
        return np.array([r.m_tau for r in self.triple()])

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "phase", "swing_leg", "com_x", "com_y", "r", "m_tau", "beta",
                    "area_f", "area_fa", "foot_x", "foot_y", "foot_z", "note"])
        for r in self.records:
            foot = r.foothold if r.foothold is not None else [np.nan] * 3
            w.writerow([format_float(r.time), r.phase, r.swing_leg, format_float(r.com[0]),
                        format_float(r.com[1]), format_float(r.r), format_float(r.m_tau), r.beta,
                        format_float(r.area_f), format_float(r.area_fa), *map(format_float, foot), r.note])
        return buf.getvalue()


def cubic_path(c0, c1, duration, n=11):
    """Rest-to-rest cubic in time between two CoM positions."""
    t = np.linspace(0.0, 1.0, n)
    s = 3 * t ** 2 - 2 * t ** 3
    c0, c1 = np.asarray(c0, float), np.asarray(c1, float)
    return np.column_stack([t * duration, c0 + s[:, None] * (c1 - c0)])


def _stance(scenario, feet, normals, legs, base_z):
    mu = {c.leg: c.mu for c in scenario.contacts}
    contacts = [Contact(feet[k], normals[k], mu.get(k, 0.8), "unilateral", k) for k in legs]
    com = scenario.com.copy()
    com[2] = base_z
    return replace(scenario, contacts=contacts, com=com)


def crawl_simulate(scenario, schedule, heightmap, strategy="feasible_based", height=None):
    """Quasi-static crawl over a height map.

    friction_based keeps the CoM in the scaled friction region and uses the
    default footholds; feasible_based uses the scaled feasible region and the
    sampling foothold planner.  Torque margins are logged at every triple
    stance from the torque-optimal force distribution.
    """
    strat = {"friction": "friction_based", "feasible": "feasible_based"}.get(strategy, strategy)
    if strat not in ("friction_based", "feasible_based"):
        raise ValueError(f"unknown strategy {strategy!r}")
    region_mode = "friction" if strat == "friction_based" else "feasible"
    legs = list(schedule.sequence)
    feet, normals = {}, {}
    for c in scenario.contacts:
        z, n = heightmap.sample(*c.position[:2])
        feet[c.leg] = np.array([c.position[0], c.position[1], z])
        normals[c.leg] = n
    missing = set(legs) - set(feet)
    if missing:
        raise ValueError(f"schedule uses legs without contacts: {sorted(missing)}")
    h0 = scenario.com[2] - np.mean([c.position[2] for c in scenario.contacts]) if height is None else height
    com = np.mean([feet[k][:2] for k in legs], axis=0)
    step = schedule.step_length * np.asarray(schedule.direction, float) / np.linalg.norm(schedule.direction)
    log = PlanLog(strat)
    t = 0.0

    for k in range(schedule.steps):
        leg = legs[k % len(legs)]
        base_z = h0 + np.mean([feet[l][2] for l in legs])
        stance_legs = [l for l in legs if l != leg]
        triple = _stance(scenario, feet, normals, stance_legs, base_z)
        guess = heuristic_future_com(feet, leg)

        # quad-stance base motion toward the target of the coming triple stance
        try:
            ct = com_target(triple, com, schedule.scale, region_mode, com_config=guess,
                            replan=schedule.replan)
            target = ct.target
            note = "inside" if ct.inside else "projected"
        except (FeasRegionError, ValueError) as exc:
            target = guess
            note = f"aborted: {type(exc).__name__}"
            log.records.append(PhaseRecord(t, "aborted", leg, com.copy(), note=str(PhaseAborted(str(exc)))))
        rec = PhaseRecord(t, "move_base", leg, target.copy(), note=note,
                          path=cubic_path(com, target, schedule.move_duration))
        t += schedule.move_duration
        com = target
        log.records.append(rec)

        # triple stance: evaluate at the reached CoM with the configuration it implies
        sw = PhaseRecord(t, "swing", leg, com.copy())
        sw.stance_xy = np.array([feet[l][:2] for l in stance_legs])
        try:
            system = triple.system("feasible", com_xy=com)
            fa = compute_region(RegionRequest(triple, "feasible", system=system))
            fr = compute_region(RegionRequest(triple, "friction"))
            sw.area_fa, sw.area_f = fa.inner.area, fr.inner.area
            sw.poly_fa, sw.poly_f = fa.inner, fr.inner
            sw.r = chebyshev_margin(fa.inner, com)
            fd = force_distribution(triple, com, "friction", system=system)
            sw.m_tau, sw.beta = fd.m_tau, fd.beta
        except Infeasible:
            sw.beta = 1
            sw.note = "no_force_distribution"
        except FeasRegionError as exc:
            sw.note = f"evaluation failed: {type(exc).__name__}"

        # foothold for the swing leg
        default = feet[leg][:2] + step
        if strat == "feasible_based":
            nxt = legs[(k + 1) % len(legs)]
            score_legs = [l for l in legs if l not in (leg, nxt)]
            feet_next = dict(feet)
            feet_next[leg] = np.array([*default, feet[leg][2]])
            guess_next = heuristic_future_com(feet_next, nxt)
            quad = _stance(scenario, feet, normals, legs, base_z)
            try:
                plan = plan_foothold(quad, leg, heightmap, default, schedule.candidates,
                                     schedule.direction, stance_legs=score_legs, com_config=guess_next)
                new = plan.position
                sw.note = (sw.note + " " + plan.reason).strip()
            except NoFeasibleFoothold:
                z = heightmap.height(*default)
                new = np.array([default[0], default[1], z])
                sw.note = (sw.note + " no_feasible_foothold").strip()
        else:
            new = np.array([default[0], default[1], heightmap.height(*default)])
        feet[leg] = new
        normals[leg] = heightmap.normal(*new[:2])
        sw.foothold = new.copy()
        log.records.append(sw)
        t += schedule.swing_duration
    return log
