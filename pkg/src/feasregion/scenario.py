"""Scenario: robot + contacts + mass + gravity, and its YAML file format.

File grammar (YAML mapping, SI units; keys not listed are rejected):

    robot: default            # preset name, or a mapping:
      # preset: default
      # legs:
      #   LF: {hip: [x,y,z], lengths: [l1,l2,l3], masses: [m1,m2,m3],
      #        com_offsets: [r1,r2,r3], joint_limits: [[lo,hi] x3],
      #        torque_limits: [t1,t2,t3], knee: backward|forward}
    mass: 85.0                # total [kg]
    gravity: 9.81             # [m/s^2]
    com: [x, y, z]            # nominal CoM == base origin [m]
    contacts:
      - leg: LF
        position: [x, y, z]   # world frame [m]; z may be "from_heightmap"
        normal: [nx, ny, nz]  # or "from_heightmap"; default [0, 0, 1]
        friction: 0.8
        mode: unilateral      # or bilateral
    torque_limit_overrides:   # per leg or "all"; 3 numbers or 3 [lo, hi] pairs
      all: [120, 150, 150]
    external_load: -600.0     # extra vertical force at the CoM [N]
    terrain: path/to/map.txt  # used by from_heightmap, relative to the file
    region: {eps: 1.0e-6, bounding_box: 10.0, scale: 0.8, max_iterations: 200}
"""
import os
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from .constraints import Contact, assemble
from .errors import SchemaError
from .model import GRAVITY, LEG_NAMES, LegModel, LimbState, default_leg, default_robot, forward_kinematics, inverse_kinematics

MODES = ("friction", "actuation", "feasible")
_MODE_ALIASES = {
    "friction_only": "friction",
    "actuation_only": "actuation",
    "friction_and_actuation": "feasible",
}


def normalize_mode(mode):
    m = _MODE_ALIASES.get(mode, mode)
    if m not in MODES:
        raise ValueError(f"unknown constraint mode {mode!r}")
    return m


@dataclass
class RegionDefaults:
    eps: float = 1e-6  # [m^2]
    bounding_box: float = 10.0  # half-width [m]
    scale: float = 0.8
    max_iterations: int = 200


@dataclass
class Scenario:
    robot: object
    contacts: list
    com: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 0.55]))
    mass: float = None
    gravity: float = None
    load_z: float = 0.0  # extra vertical force at the CoM [N]
    region: RegionDefaults = field(default_factory=RegionDefaults)
    name: str = ""

    def __post_init__(self):
        self.com = np.asarray(self.com, dtype=float).reshape(3)
        if self.mass is None:
            self.mass = self.robot.mass
        if self.gravity is None:
            self.gravity = self.robot.gravity
        self.contacts = list(self.contacts)

    @property
    def weight(self):
        """Vertical load carried by the contacts [N]."""
        return self.mass * self.gravity - self.load_z

    @property
    def stance_centroid(self):
        return np.mean([c.position[:2] for c in self.contacts], axis=0)

    def base_position(self, com_xy=None):
        b = self.com.copy()
        if com_xy is not None:
            b[:2] = com_xy
        return b

    def limb_states(self, com_xy=None):
        """IK for every contact with the base (== CoM) moved to com_xy."""
        base = self.base_position(com_xy)
        out = []
        for c in self.contacts:
            leg = self.robot.leg(c.leg)
            q = inverse_kinematics(leg, c.position - base)
            out.append(LimbState(q, forward_kinematics(leg, q, check=False)))
        return out

    def system(self, mode="feasible", com_xy=None, limb_states=None):
        mode = normalize_mode(mode)
        if mode != "friction" and limb_states is None:
            limb_states = self.limb_states(com_xy)
        return assemble(
            self.contacts,
            self.mass,
            self.gravity,
            robot=self.robot if mode != "friction" else None,
            limb_states=limb_states,
            load_z=self.load_z,
        )

    def with_(self, **kw):
        return replace(self, **kw)

    def with_mass(self, mass):
        return replace(self, mass=float(mass))

    def with_limit_scale(self, factor):
        return replace(self, robot=self.robot.scaled_limits(factor))

    def subset(self, legs):
        """Same scenario restricted to contacts on the given legs."""
        keep = [c for c in self.contacts if c.leg in legs]
        return replace(self, contacts=keep)


def quadruped_scenario(feet=None, com=(0.0, 0.0, 0.55), robot=None, mu=0.8, legs=LEG_NAMES, **kw):
    """Default robot standing on flat ground with feet under the hips."""
    robot = robot or default_robot()
    com = np.asarray(com, dtype=float)
    if feet is None:
        feet = {l.name: np.array([com[0] + l.hip[0], com[1] + l.hip[1], 0.0]) for l in robot.legs}
    contacts = [Contact(feet[n], mu=mu, leg=n) for n in legs]
    return Scenario(robot=robot, contacts=contacts, com=com, **kw)


# ---------------------------------------------------------------------------
# file loading
# ---------------------------------------------------------------------------

def _num(v, path, positive=False, nonneg=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(path, f"expected a number, got {v!r}")
    v = float(v)
    if not np.isfinite(v):
        raise SchemaError(path, "must be finite")
    if positive and v <= 0:
        raise SchemaError(path, f"must be > 0, got {v}")
    if nonneg and v < 0:
        raise SchemaError(path, f"must be >= 0, got {v}")
    return v


def _vec(v, n, path, **kw):
    if not isinstance(v, (list, tuple)) or len(v) != n:
        raise SchemaError(path, f"expected a list of {n} numbers")
    return np.array([_num(x, f"{path}[{i}]", **kw) for i, x in enumerate(v)])


def _mapping(v, path, allowed):
    if not isinstance(v, dict):
        raise SchemaError(path, "expected a mapping")
    extra = set(v) - set(allowed)
    if extra:
        raise SchemaError(f"{path}.{sorted(extra)[0]}" if path else sorted(extra)[0], "unknown key")
    return v


def _limits(v, path):
    """3 symmetric bounds or 3 [lo, hi] pairs with lo == -hi."""
    if not isinstance(v, (list, tuple)) or len(v) != 3:
        raise SchemaError(path, "expected 3 torque limits")
    out = []
    for i, t in enumerate(v):
        p = f"{path}[{i}]"
        if isinstance(t, (list, tuple)):
            lo, hi = _vec(t, 2, p)
            if hi <= 0 or abs(lo + hi) > 1e-9 * max(1.0, hi):
                raise SchemaError(p, f"asymmetric torque limits [{lo}, {hi}] are not supported")
            out.append(hi)
        else:
            out.append(_num(t, p, positive=True))
    return tuple(out)


_LEG_KEYS = ("hip", "lengths", "masses", "com_offsets", "joint_limits", "torque_limits", "knee")


def _leg(name, spec, path):
    base = default_leg(name) if name in LEG_NAMES else None
    spec = _mapping(spec, path, _LEG_KEYS)
    kw = {}
    if "hip" in spec:
        kw["hip"] = _vec(spec["hip"], 3, f"{path}.hip")
    elif base is None:
        raise SchemaError(f"{path}.hip", "required for non-standard leg names")
    if "lengths" in spec:
        kw["lengths"] = tuple(_vec(spec["lengths"], 3, f"{path}.lengths", positive=True))
    if "masses" in spec:
        kw["masses"] = tuple(_vec(spec["masses"], 3, f"{path}.masses", nonneg=True))
    if "com_offsets" in spec:
        kw["com_offsets"] = tuple(_vec(spec["com_offsets"], 3, f"{path}.com_offsets", nonneg=True))
    if "joint_limits" in spec:
        jl = spec["joint_limits"]
        if not isinstance(jl, (list, tuple)) or len(jl) != 3:
            raise SchemaError(f"{path}.joint_limits", "expected 3 [lo, hi] pairs")
        pairs = tuple(tuple(_vec(p, 2, f"{path}.joint_limits[{i}]")) for i, p in enumerate(jl))
        for i, (lo, hi) in enumerate(pairs):
            if lo >= hi:
                raise SchemaError(f"{path}.joint_limits[{i}]", "lower bound must be below upper bound")
        kw["joint_limits"] = pairs
    if "torque_limits" in spec:
        kw["torque_limits"] = _limits(spec["torque_limits"], f"{path}.torque_limits")
    if "knee" in spec:
        k = spec["knee"]
        if k not in ("backward", "forward"):
            raise SchemaError(f"{path}.knee", "expected 'backward' or 'forward'")
        kw["knee_sign"] = -1 if k == "backward" else 1
    if base is None:
        return LegModel(name=name, **kw)
    return replace(base, **kw) if kw else base


def _robot(spec, path="robot"):
    if spec is None or spec == "default":
        return default_robot()
    if isinstance(spec, str):
        raise SchemaError(path, f"unknown preset {spec!r}")
    spec = _mapping(spec, path, ("preset", "legs", "mass"))
    preset = spec.get("preset", "default")
    if preset != "default":
        raise SchemaError(f"{path}.preset", f"unknown preset {preset!r}")
    robot = default_robot()
    if "mass" in spec:
        robot = replace(robot, mass=_num(spec["mass"], f"{path}.mass", positive=True))
    legs = spec.get("legs")
    if legs is not None:
        if not isinstance(legs, dict) or not legs:
            raise SchemaError(f"{path}.legs", "expected a non-empty mapping of leg name to leg block")
        built = [_leg(str(n), s or {}, f"{path}.legs.{n}") for n, s in legs.items()]
        robot = replace(robot, legs=tuple(built))
    return robot


_TOP_KEYS = (
    "robot", "mass", "gravity", "com", "contacts", "torque_limit_overrides",
    "external_load", "terrain", "region", "name",
)


def scenario_from_dict(data, heightmap=None, base_dir="."):
    data = _mapping(data, "", _TOP_KEYS)
    robot = _robot(data.get("robot"), "robot")

    over = data.get("torque_limit_overrides")
    if over is not None:
        over = _mapping(over, "torque_limit_overrides", ("all",) + robot.leg_names)
        if "all" in over:
            lim = _limits(over["all"], "torque_limit_overrides.all")
            robot = replace(robot, legs=tuple(l.with_torque_limits(lim) for l in robot.legs))
        for name, v in over.items():
            if name != "all":
                lim = _limits(v, f"torque_limit_overrides.{name}")
                robot = robot.replace_leg(robot.leg(name).with_torque_limits(lim))

    mass = _num(data["mass"], "mass", positive=True) if "mass" in data else robot.mass
    gravity = _num(data["gravity"], "gravity", positive=True) if "gravity" in data else GRAVITY
    com = _vec(data["com"], 3, "com") if "com" in data else np.array([0.0, 0.0, 0.55])

    if heightmap is None and data.get("terrain") is not None:
        from .terrain import load_heightmap

        tpath = data["terrain"]
        if not isinstance(tpath, str):
            raise SchemaError("terrain", "expected a file path")
        heightmap = load_heightmap(os.path.join(base_dir, tpath))

    raw = data.get("contacts")
    if not isinstance(raw, list) or not raw:
        raise SchemaError("contacts", "expected a non-empty list")
    contacts = []
    for i, c in enumerate(raw):
        p = f"contacts[{i}]"
        c = _mapping(c, p, ("leg", "position", "normal", "friction", "mode"))
        if "leg" not in c:
            raise SchemaError(f"{p}.leg", "required")
        leg = str(c["leg"])
        if leg not in robot.leg_names:
            raise SchemaError(f"{p}.leg", f"unknown leg {leg!r}")
        if "position" not in c:
            raise SchemaError(f"{p}.position", "required")
        pos = c["position"]
        if not isinstance(pos, (list, tuple)) or len(pos) != 3:
            raise SchemaError(f"{p}.position", "expected [x, y, z]")
        xy = [_num(pos[0], f"{p}.position[0]"), _num(pos[1], f"{p}.position[1]")]
        normal = c.get("normal", [0.0, 0.0, 1.0])
        needs_map = pos[2] == "from_heightmap" or normal == "from_heightmap"
        if needs_map and heightmap is None:
            raise SchemaError(p, "from_heightmap used but no terrain given")
        if needs_map:
            zt, nt = heightmap.sample(*xy)
        z = zt if pos[2] == "from_heightmap" else _num(pos[2], f"{p}.position[2]")
        if normal == "from_heightmap":
            n = nt
        else:
            n = _vec(normal, 3, f"{p}.normal")
            if np.linalg.norm(n) < 1e-12:
                raise SchemaError(f"{p}.normal", "must be nonzero")
        mode = c.get("mode", "unilateral")
        if mode not in ("unilateral", "bilateral"):
            raise SchemaError(f"{p}.mode", "expected 'unilateral' or 'bilateral'")
        mu = _num(c.get("friction", 0.8), f"{p}.friction", nonneg=True)
        if mode == "unilateral" and mu <= 0:
            raise SchemaError(f"{p}.friction", "unilateral contacts need friction > 0")
        contacts.append(Contact([xy[0], xy[1], z], n, mu, mode, leg))
    legs_used = [c.leg for c in contacts]
    if len(set(legs_used)) != len(legs_used):
        raise SchemaError("contacts", "each leg may appear at most once")

    load = data.get("external_load", 0.0)
    if isinstance(load, (list, tuple)):
        v = _vec(load, 3, "external_load")
        if abs(v[0]) > 0 or abs(v[1]) > 0:
            raise SchemaError("external_load", "only vertical loads are supported")
        load = v[2]
    load = _num(load, "external_load")
    if mass * gravity - load <= 0:
        raise SchemaError("external_load", "net vertical load must point down")

    reg = RegionDefaults()
    if data.get("region") is not None:
        r = _mapping(data["region"], "region", ("eps", "bounding_box", "scale", "max_iterations"))
        if "eps" in r:
            reg.eps = _num(r["eps"], "region.eps", positive=True)
        if "bounding_box" in r:
            reg.bounding_box = _num(r["bounding_box"], "region.bounding_box", positive=True)
        if "scale" in r:
            s = _num(r["scale"], "region.scale", positive=True)
            if s > 1:
                raise SchemaError("region.scale", "must lie in (0, 1]")
            reg.scale = s
        if "max_iterations" in r:
            mi = r["max_iterations"]
            if isinstance(mi, bool) or not isinstance(mi, int) or mi < 1:
                raise SchemaError("region.max_iterations", "expected a positive integer")
            reg.max_iterations = mi

    return Scenario(
        robot=robot,
        contacts=contacts,
        com=com,
        mass=mass,
        gravity=gravity,
        load_z=load,
        region=reg,
        name=str(data.get("name", "")),
    )


def load_scenario(path, heightmap=None):
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise SchemaError("", f"not valid YAML: {exc}") from exc
    except OSError as exc:
        raise SchemaError("", f"cannot read {path}: {exc.strerror}") from exc
    if data is None:
        raise SchemaError("", "empty scenario file")
    return scenario_from_dict(data, heightmap, os.path.dirname(os.path.abspath(path)))


def scenario_to_dict(sc):
    """Inverse of scenario_from_dict for the default-preset robot."""
    legs = {}
    for l in sc.robot.legs:
        legs[l.name] = {
            "hip": [float(v) for v in l.hip],
            "lengths": list(map(float, l.lengths)),
            "masses": list(map(float, l.masses)),
            "com_offsets": list(map(float, l.com_offsets)),
            "joint_limits": [list(map(float, p)) for p in l.joint_limits],
            "torque_limits": list(map(float, l.torque_limits)),
            "knee": "backward" if l.knee_sign < 0 else "forward",
        }
    return {
        "name": sc.name,
        "robot": {"preset": "default", "legs": legs},
        "mass": float(sc.mass),
        "gravity": float(sc.gravity),
        "com": [float(v) for v in sc.com],
        "contacts": [
            {
                "leg": c.leg,
                "position": [float(v) for v in c.position],
                "normal": [float(v) for v in c.normal],
                "friction": float(c.mu),
                "mode": c.mode,
            }
            for c in sc.contacts
        ],
        "external_load": float(sc.load_z),
        "region": {
            "eps": sc.region.eps,
            "bounding_box": sc.region.bounding_box,
            "scale": sc.region.scale,
            "max_iterations": sc.region.max_iterations,
        },
    }
