"""Support, actuation and feasible regions for legged robots on arbitrary terrain."""
from . import kernels
from .constraints import Contact, ConstraintSystem, WrenchPolytope, assemble, wrench_polytope
from .errors import *  # noqa: F401,F403
from .geometry import Polygon2, convex_hull_2d, hausdorff_distance, point_in_polygon, scale_polygon
from .global_region import GlobalRegionResult, SipRequest, feasible_volume, global_region, sweep_boundary
from .model import RobotModel, default_robot, forward_kinematics, inverse_kinematics, leg_jacobian
from .optim import LinearProgram, SimplexSession, chebyshev_margin, closest_point_in_polygon, solve_lp
from .planner import GaitSchedule, com_target, crawl_simulate, force_distribution, margin, plan_foothold
from .region import RegionRequest, RegionResult, compute_region, membership_oracle, region, torque_recovery
from .scenario import Scenario, load_scenario, quadruped_scenario
from .terrain import HeightMap, load_heightmap

__version__ = "0.1.0"
