"""Constraint blocks for the static-equilibrium LP.

Decision vector is x = [f_1, ..., f_nc, c_x, c_y] with f_i the force the
environment applies on contact i (world frame, N) and c the horizontal CoM.

    A1 f + A2 c = u        force and moment balance about the world origin
    B f <= 0               linearised friction cones (unilateral contacts)
    G f <= d               per-limb wrench polytopes from the torque box
"""
import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import gravity_torques, jacobian_condition, leg_jacobian

SINGULAR_COND = 1e8


class SingularJacobianWarning(UserWarning):
    pass


def skew(p):
    x, y, z = p
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def tangent_basis(n):
    """Right-handed (t1, t2) completing the unit normal n."""
    n = np.asarray(n, dtype=float)
    n = n / np.linalg.norm(n)
    t1 = np.cross(n, [0.0, 0.0, 1.0])
    if np.linalg.norm(t1) < 1e-6:
        t1 = np.array([1.0, 0.0, 0.0])
        t1 = t1 - (t1 @ n) * n
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(n, t1)
    return t1, t2


@dataclass(frozen=True)
class Contact:
    position: np.ndarray
    normal: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    mu: float = 0.8
    mode: str = "unilateral"  # or "bilateral"
    leg: str = None
    t1: np.ndarray = None
    t2: np.ndarray = None

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        n = np.asarray(self.normal, dtype=float).reshape(3)
        nn = np.linalg.norm(n)
        if nn == 0.0:
            raise ValueError("contact normal must be nonzero")
        n = n / nn
        object.__setattr__(self, "normal", n)
        if self.mode not in ("unilateral", "bilateral"):
            raise ValueError(f"contact mode must be unilateral or bilateral, got {self.mode!r}")
        if self.mode == "unilateral" and not self.mu > 0:
            raise ValueError("unilateral contacts need mu > 0")
        if self.t1 is None or self.t2 is None:
            t1, t2 = tangent_basis(n)
        else:
            t1, t2 = np.asarray(self.t1, float), np.asarray(self.t2, float)
        object.__setattr__(self, "t1", t1)
        object.__setattr__(self, "t2", t2)

    @property
    def unilateral(self):
        return self.mode == "unilateral"

    def moved(self, position):
        return Contact(position, self.normal, self.mu, self.mode, self.leg)


def build_grasp(contacts, mass, g=9.81, load_z=0.0):
    """(A1, A2, u) for force/moment balance about the world origin.

    ``load_z`` is an extra vertical force applied at the CoM (negative pushes
    down), so the weight carried by the contacts is W = m g - load_z.
    """
    n = len(contacts)
    if n < 1:
        raise ValueError("need at least one contact")
    W = mass * g - load_z
    if W <= 0:
        raise ValueError("net vertical load must point down")
    A1 = np.zeros((6, 3 * n))
    for i, c in enumerate(contacts):
        A1[:3, 3 * i:3 * i + 3] = np.eye(3)
        A1[3:, 3 * i:3 * i + 3] = skew(c.position)
    # c x (W g_hat) with g_hat = -z  ->  (-W c_y, W c_x, 0); moved to the lhs
    A2 = np.zeros((6, 2))
    A2[3, 1] = -W
    A2[4, 0] = W
    u = np.zeros(6)
    u[2] = W
    return A1, A2, u


def build_friction(contacts):
    """Four pyramid faces per unilateral contact; bilateral contacts add none."""
    n = len(contacts)
    rows = []
    for i, c in enumerate(contacts):
        if not c.unilateral:
            continue
        mn = c.mu * c.normal
        for r in (c.t1 - mn, c.t2 - mn, -(c.t1 + mn), -(c.t2 + mn)):
            row = np.zeros(3 * n)
            row[3 * i:3 * i + 3] = r
            rows.append(row)
    return np.array(rows).reshape(-1, 3 * n)


@dataclass
class WrenchPolytope:
    """{f : G f <= d} with G = [J^T; -J^T], d = [g + tau_lim; -(g - tau_lim)]."""

    G: np.ndarray
    d: np.ndarray
    J: np.ndarray
    g: np.ndarray
    tau_lim: np.ndarray
    leg: str = None

    def contains(self, f, tol=1e-6):
        return bool(np.all(self.G @ np.asarray(f, float) <= self.d + tol))

    def vertices(self):
        """The 8 force vertices J^{-T}(g - tau_k) over the torque-box corners."""
        JT = self.J.T
        out = []
        for signs in itertools.product((-1.0, 1.0), repeat=3):
            tau = np.array(signs) * self.tau_lim
            out.append(np.linalg.solve(JT, self.g - tau))
        return np.array(out)

    def torques(self, f):
        """Joint torques tau = g - J^T f that hold force f."""
        return self.g - self.J.T @ np.asarray(f, float)


def wrench_polytope(leg, q, gravity=9.81, name=None):
    J = leg_jacobian(leg, q)
    g = gravity_torques(leg, q, gravity)
    tl = leg.tau_lim
    cond = jacobian_condition(J)
    if cond > SINGULAR_COND:
        warnings.warn(f"{leg.name}: Jacobian condition number {cond:.3g}", SingularJacobianWarning)
    G = np.vstack([J.T, -J.T])
    d = np.concatenate([g + tl, -(g - tl)])
    return WrenchPolytope(G, d, J, g, tl, name or leg.name)


def build_actuation(robot, limb_states, contacts):
    """Block-diagonal (G, d) and the per-limb polytopes, Jacobians frozen at limb_states."""
    n = len(contacts)
    polys = []
    G = np.zeros((6 * n, 3 * n))
    d = np.zeros(6 * n)
    for i, (c, st) in enumerate(zip(contacts, limb_states)):
        leg = robot.leg(c.leg)
        wp = wrench_polytope(leg, st.q, robot.gravity)
        G[6 * i:6 * i + 6, 3 * i:3 * i + 3] = wp.G
        d[6 * i:6 * i + 6] = wp.d
        polys.append(wp)
    return G, d, polys


@dataclass
class ConstraintSystem:
    A1: np.ndarray
    A2: np.ndarray
    u: np.ndarray
    B: np.ndarray
    G: np.ndarray
    d: np.ndarray
    contacts: list
    polytopes: list = None
    weight: float = None

    @property
    def n_forces(self):
        return self.A1.shape[1]

    def inequalities(self, mode):
        """Stacked (C, d) over the force variables for a constraint mode."""
        n = self.n_forces
        blocks, rhs = [], []
        if mode in ("friction", "feasible"):
            blocks.append(self.B)
            rhs.append(np.zeros(self.B.shape[0]))
        if mode in ("actuation", "feasible"):
            if self.G is None:
                raise ValueError("actuation block not assembled")
            blocks.append(self.G)
            rhs.append(self.d)
        if not blocks:
            return np.zeros((0, n)), np.zeros(0)
        return np.vstack(blocks), np.concatenate(rhs)

    def row_count(self, mode="feasible"):
        return self.inequalities(mode)[0].shape[0]


def assemble(contacts, mass, gravity=9.81, robot=None, limb_states=None, load_z=0.0):
    A1, A2, u = build_grasp(contacts, mass, gravity, load_z)
    B = build_friction(contacts)
    G = d = polys = None
    if robot is not None and limb_states is not None:
        G, d, polys = build_actuation(robot, limb_states, contacts)
    return ConstraintSystem(A1, A2, u, B, G, d, list(contacts), polys, u[2])
