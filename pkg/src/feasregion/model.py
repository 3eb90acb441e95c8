"""Three-joint leg kinematics (HAA-HFE-KFE) and the quadruped built from it.

Convention used throughout:
  - base frame: x forward, y left, z up; base origin coincides with the CoM,
    orientation fixed to identity.
  - HAA rotates about x, HFE and KFE about y.
  - zero configuration: the leg hangs straight down from the hip, so the
    foot sits at hip - (0, 0, l1 + l2 + l3).
  - l1 runs along the zero axis from HAA to HFE; l2 (thigh) and l3 (shank)
    swing in the HAA-rotated sagittal plane.
"""
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .errors import JointLimit, OutOfWorkspace

GRAVITY = 9.81  # [m/s^2]
_LIMIT_TOL = 1e-12
_REACH_TOL = 1e-9

LEG_NAMES = ("LF", "RF", "LH", "RH")


@dataclass(frozen=True)
class LegModel:
    name: str
    hip: np.ndarray  # (3,) hip (HAA) position in the base frame [m]
    lengths: tuple = (0.08, 0.35, 0.33)  # l1, l2, l3 [m]
    masses: tuple = (0.5, 2.5, 1.0)  # point mass per link [kg]
    com_offsets: tuple = None  # distance of each link's mass from its proximal joint [m]
    joint_limits: tuple = ((-1.0, 1.0), (-2.0, 2.0), (-2.8, 2.8))  # [rad]
    torque_limits: tuple = (120.0, 150.0, 150.0)  # symmetric |tau| bound [N m]
    knee_sign: int = -1  # -1: knee points backward (q3 < 0), +1: forward

    def __post_init__(self):
        object.__setattr__(self, "hip", np.asarray(self.hip, dtype=float).reshape(3))
        if any(l <= 0 for l in self.lengths):
            raise ValueError(f"{self.name}: link lengths must be positive")
        if any(t <= 0 for t in self.torque_limits):
            raise ValueError(f"{self.name}: torque limits must be positive")
        if any(m < 0 for m in self.masses):
            raise ValueError(f"{self.name}: link masses must be non-negative")
        if self.com_offsets is None:
            object.__setattr__(self, "com_offsets", tuple(0.5 * l for l in self.lengths))
        if self.knee_sign not in (-1, 1):
            raise ValueError("knee_sign must be -1 or +1")

    @property
    def tau_lim(self):
        return np.asarray(self.torque_limits, dtype=float)

    @property
    def limits(self):
        return np.asarray(self.joint_limits, dtype=float)

    def with_masses(self, masses):
        return replace(self, masses=tuple(masses))

    def with_torque_limits(self, limits):
        return replace(self, torque_limits=tuple(float(t) for t in limits))


@dataclass(frozen=True)
class RobotModel:
    legs: tuple  # of LegModel
    mass: float = 85.0  # [kg], total
    gravity: float = GRAVITY

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("total mass must be positive")
        names = [leg.name for leg in self.legs]
        if len(set(names)) != len(names):
            raise ValueError("leg names must be unique")

    def leg(self, name):
        for leg in self.legs:
            if leg.name == name:
                return leg
        raise KeyError(f"no leg named {name!r}")

    @property
    def leg_names(self):
        return tuple(leg.name for leg in self.legs)

    def replace_leg(self, leg):
        return replace(self, legs=tuple(leg if l.name == leg.name else l for l in self.legs))

    def scaled_limits(self, factor):
        return replace(self, legs=tuple(l.with_torque_limits(factor * l.tau_lim) for l in self.legs))


class LimbState(NamedTuple):
    q: np.ndarray  # [rad]
    p: np.ndarray  # foot position in the base frame [m]


def default_leg(name, hip=None):
    if hip is None:
        sx = 1.0 if name[1] == "F" else -1.0
        sy = 1.0 if name[0] == "L" else -1.0
        hip = (0.37 * sx, 0.21 * sy, 0.0)
    knee = -1 if name.endswith("F") else 1
    return LegModel(name=name, hip=hip, knee_sign=knee)


def default_robot(mass=85.0, gravity=GRAVITY):
    """85 kg hydraulic-scale quadruped used for fixtures and defaults."""
    return RobotModel(legs=tuple(default_leg(n) for n in LEG_NAMES), mass=mass, gravity=gravity)


# ---------------------------------------------------------------------------
# kinematics
# ---------------------------------------------------------------------------

def check_limits(leg, q, tol=_LIMIT_TOL):
    q = np.asarray(q, dtype=float)
    lim = leg.limits
    bad = (q < lim[:, 0] - tol) | (q > lim[:, 1] + tol)
    if bad.any():
        j = int(np.flatnonzero(bad)[0])
        raise JointLimit(f"{leg.name}: joint {j} at {q[j]:.6g} rad outside [{lim[j, 0]:g}, {lim[j, 1]:g}]")


def _planar(leg, q, upto):
    """Sagittal-plane point (x', z') after HAA rotation and its derivatives wrt (q2, q3).

    upto = 'foot' or a link index 0/1/2 meaning that link's mass point.
    """
    l1, l2, l3 = leg.lengths
    q2, q3 = q[1], q[2]
    s2, c2 = np.sin(q2), np.cos(q2)
    s23, c23 = np.sin(q2 + q3), np.cos(q2 + q3)
    if upto == "foot":
        r1, r2, r3 = l1, l2, l3
    elif upto == 0:
        r1, r2, r3 = leg.com_offsets[0], 0.0, 0.0
    elif upto == 1:
        r1, r2, r3 = l1, leg.com_offsets[1], 0.0
    else:
        r1, r2, r3 = l1, l2, leg.com_offsets[2]
    x = -r2 * s2 - r3 * s23
    z = -r1 - r2 * c2 - r3 * c23
    dx = np.array([-r2 * c2 - r3 * c23, -r3 * c23])
    dz = np.array([r2 * s2 + r3 * s23, r3 * s23])
    return x, z, dx, dz


def _lift(leg, q, x, z, dx, dz):
    s1, c1 = np.sin(q[0]), np.cos(q[0])
    p = leg.hip + np.array([x, -s1 * z, c1 * z])
    J = np.empty((3, 3))
    J[:, 0] = (0.0, -c1 * z, -s1 * z)
    J[0, 1:] = dx
    J[1, 1:] = -s1 * dz
    J[2, 1:] = c1 * dz
    return p, J


def forward_kinematics(leg, q, check=True):
    """Foot position in the base frame [m]."""
    q = np.asarray(q, dtype=float)
    if check:
        check_limits(leg, q)
    x, z, dx, dz = _planar(leg, q, "foot")
    return _lift(leg, q, x, z, dx, dz)[0]


def leg_jacobian(leg, q):
    """Analytic 3x3 foot Jacobian, columns dp/dq_j."""
    q = np.asarray(q, dtype=float)
    x, z, dx, dz = _planar(leg, q, "foot")
    return _lift(leg, q, x, z, dx, dz)[1]


def link_points(leg, q):
    """Positions (3, 3) and Jacobians (3, 3, 3) of the three link mass points."""
    q = np.asarray(q, dtype=float)
    P = np.empty((3, 3))
    Js = np.empty((3, 3, 3))
    for k in range(3):
        P[k], Js[k] = _lift(leg, q, *_planar(leg, q, k))
    return P, Js


def jacobian_condition(J):
    s = np.linalg.svd(J, compute_uv=False)
    return np.inf if s[-1] <= 1e-15 * max(s[0], 1.0) else float(s[0] / s[-1])


def inverse_kinematics(leg, p_target, knee_sign=None, check=True):
    """Joint angles placing the foot at p_target (base frame).

    Closed form: HAA from the y-z projection, then a two-link solve for HFE
    and KFE in the rotated plane.  The knee branch follows leg.knee_sign.
    The foot is assumed to lie below the HAA axis (standing legs).
    """
    l1, l2, l3 = leg.lengths
    sgn = leg.knee_sign if knee_sign is None else knee_sign
    px, py, pz = np.asarray(p_target, dtype=float) - leg.hip
    rho = np.hypot(py, pz)
    q1 = np.arctan2(py, -pz)
    X, Z = px, -rho + l1
    D2 = X * X + Z * Z
    D = np.sqrt(D2)
    lo, hi = abs(l2 - l3), l2 + l3
    if D > hi + _REACH_TOL or D < lo - _REACH_TOL:
        raise OutOfWorkspace(f"{leg.name}: distance {D:.6g} m from HFE outside [{lo:.6g}, {hi:.6g}]")
    c3 = np.clip((D2 - l2 * l2 - l3 * l3) / (2.0 * l2 * l3), -1.0, 1.0)
    q3 = sgn * np.arccos(c3)
    q2 = np.arctan2(-X, -Z) - np.arctan2(l3 * np.sin(q3), l2 + l3 * np.cos(q3))
    q2 = (q2 + np.pi) % (2.0 * np.pi) - np.pi
    q = np.array([q1, q2, q3])
    if check:
        try:
            check_limits(leg, q, 1e-9)
        except JointLimit as exc:
            raise OutOfWorkspace(str(exc)) from exc
    return q


def gravity_torques(leg, q, gravity=GRAVITY):
    """Joint-space gravity term g(q) = dU/dq = sum_k J_k^T (m_k g z_hat) [N m]."""
    _, Js = link_points(leg, q)
    m = np.asarray(leg.masses, dtype=float)
    # only the z row of each link Jacobian matters
    return gravity * (m[:, None] * Js[:, 2, :]).sum(axis=0)


def potential_energy(leg, q, gravity=GRAVITY):
    P, _ = link_points(leg, q)
    return float(gravity * np.dot(leg.masses, P[:, 2]))


class ForceEllipsoid(NamedTuple):
    matrix: np.ndarray  # J J^T; the ellipsoid is {f : f^T (J J^T) f <= 1}
    semiaxes: np.ndarray  # 1/sigma_k, inf for vanishing sigma
    axes: np.ndarray  # columns are the principal directions
    anisotropy: float
    degenerate: bool


def force_ellipsoid(leg_or_J, q=None, tol=1e-9):
    """Image of the unit torque sphere through J^{-T}."""
    J = np.asarray(leg_or_J, dtype=float) if q is None else leg_jacobian(leg_or_J, q)
    U, s, _ = np.linalg.svd(J)
    small = s <= tol * max(s[0], 1.0)
    with np.errstate(divide="ignore"):
        semi = np.where(small, np.inf, 1.0 / np.where(small, 1.0, s))
    finite = semi[np.isfinite(semi)]
    aniso = float(finite.max() / finite.min()) if finite.size else np.inf
    return ForceEllipsoid(J @ J.T, semi, U, aniso, bool(small.any()))


# ---------------------------------------------------------------------------
# whole-robot helpers
# ---------------------------------------------------------------------------

def limb_state_for_foot(leg, foot_world, base_position):
    """IK for a world-frame foothold with the base (== CoM) at base_position."""
    p = np.asarray(foot_world, dtype=float) - np.asarray(base_position, dtype=float)
    q = inverse_kinematics(leg, p)
    return LimbState(q, forward_kinematics(leg, q, check=False))


def nominal_feet(robot, height=0.55, base=(0.0, 0.0, 0.55), spread=0.0):
    """World-frame feet directly under the hips for a base at ``base``."""
    base = np.asarray(base, dtype=float)
    out = {}
    for leg in robot.legs:
        p = base + leg.hip + np.array([0.0, np.sign(leg.hip[1]) * spread, -height])
        out[leg.name] = p
    return out
