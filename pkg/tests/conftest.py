import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SCENARIOS = os.path.join(ROOT, "scenarios")
FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")

# acceptance criterion number -> (passed, title, detail); filled by test_acceptance.py
ACCEPTANCE = {}
ACCEPTANCE_TITLES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_TITLES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_TITLES):
        ok, detail = ACCEPTANCE.get(n, (False, "did not complete"))
        tr.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {ACCEPTANCE_TITLES[n]}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def quad():
    from feasregion.scenario import quadruped_scenario

    return quadruped_scenario()


def random_convex(rng, n=12, radius=1.0):
    from feasregion.geometry import convex_hull_2d

    ang = rng.uniform(0, 2 * np.pi, n)
    r = radius * np.sqrt(rng.uniform(0.2, 1.0, n))
    return convex_hull_2d(np.column_stack([r * np.cos(ang), r * np.sin(ang)]) + rng.normal(size=2))


def random_scenario(rng, n=None, max_height=0.3, mu=(0.4, 1.0), scale=(0.3, 3.0)):
    """Quadruped on random non-coplanar footholds near the hips, random friction and torque scale."""
    from feasregion.constraints import Contact
    from feasregion.model import LEG_NAMES, default_robot
    from feasregion.scenario import Scenario

    n = n or int(rng.integers(3, 5))
    legs = list(LEG_NAMES)
    if n == 3:
        legs.pop(int(rng.integers(4)))
    robot = default_robot().scaled_limits(float(rng.uniform(*scale)))
    h = rng.uniform(0.0, max_height, len(legs))
    com = np.array([0.0, 0.0, 0.55 + h.mean()])
    contacts = []
    for k, name in enumerate(legs):
        hip = robot.leg(name).hip
        xy = hip[:2] + rng.uniform(-0.06, 0.06, 2)
        tilt = rng.normal(size=2) * 0.2
        contacts.append(Contact([xy[0], xy[1], h[k]], [tilt[0], tilt[1], 1.0], float(rng.uniform(*mu)), leg=name))
    return Scenario(robot=robot, contacts=contacts, com=com, name="random")
