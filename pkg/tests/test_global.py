import numpy as np
import pytest

from feasregion.errors import KinematicLimitHit
from feasregion.geometry import contains, hausdorff_distance, scale_polygon
from feasregion.global_region import (
    SipRequest,
    evenly_spaced,
    feasible_volume,
    global_region,
    line_exit,
    sip_vertex,
    sweep_boundary,
    write_volume,
)
from feasregion.region import RegionRequest, compute_region, membership_oracle
from feasregion.scenario import quadruped_scenario

FEET = {k: np.array(v, float) for k, v in
        {"LF": [0.30, 0.21, 0], "RF": [0.30, -0.21, 0], "LH": [-0.30, 0.21, 0], "RH": [-0.30, -0.21, 0]}.items()}


def stance(scale=1.0):
    sc = quadruped_scenario(feet=FEET)
    return sc if scale == 1.0 else sc.with_limit_scale(scale)


@pytest.fixture(scope="module")
def tight():
    sc = stance(0.4)
    return sc, global_region(SipRequest(sc))


@pytest.fixture(scope="module")
def generous():
    sc = stance(1e4)
    return sc, global_region(SipRequest(sc))


def own_config_feasible(sc, c):
    system = sc.system("feasible", limb_states=sc.limb_states(c))
    return membership_oracle(sc, c, "feasible", system=system).feasible


def test_request_validation():
    sc = stance()
    with pytest.raises(ValueError):
        SipRequest(sc, alpha=0.0)
    with pytest.raises(ValueError):
        SipRequest(sc, alpha=1.5)
    with pytest.raises(ValueError):
        SipRequest(sc, eps_d=0.0)
    with pytest.raises(ValueError):
        global_region(SipRequest(sc, directions=evenly_spaced(2)))
    r = SipRequest(sc, directions=[[3.0, 4.0], [0, 2], [-1, 0]])
    assert np.allclose(np.linalg.norm(r.directions, axis=1), 1.0)


def test_line_exit():
    from feasregion.geometry import convex_hull_2d

    sq = convex_hull_2d([(-1, -1), (1, -1), (1, 1), (-1, 1)])
    assert line_exit(sq, np.zeros(2), np.array([1.0, 0.0])) == pytest.approx(1.0)
    assert line_exit(sq, np.array([0.5, 0.0]), np.array([-1.0, 0.0])) == pytest.approx(1.5)
    assert line_exit(sq, np.array([5.0, 5.0]), np.array([1.0, 0.0])) is None


def test_generous_limits_vertex_on_friction_boundary(generous):
    sc, res = generous
    fr = compute_region(RegionRequest(sc, "friction")).inner
    for tr in res.traces:
        assert tr.converged
        t = line_exit(fr, sc.com[:2], tr.direction)
        target = sc.com[:2] + t * tr.direction
        assert np.hypot(*(tr.vertex - target)) <= 2e-3  # eps_d, plus the last half step


def test_generous_hull_close_to_friction_region(generous):
    sc, res = generous
    fr = compute_region(RegionRequest(sc, "friction")).inner
    assert len(res.vertices) == 16
    # 16 rays sample the rectangle corners coarsely; compare against the rectangle's own 16-ray polygon
    from feasregion.geometry import convex_hull_2d

    ray_poly = convex_hull_2d([sc.com[:2] + line_exit(fr, sc.com[:2], a) * a for a in evenly_spaced(16)])
    assert hausdorff_distance(res.polygon, ray_poly) <= 5e-3
    assert np.all(fr.A @ res.polygon.vertices.T <= fr.b[:, None] + 1e-6)


def test_toward_centroid_two_iterations():
    sc = stance(1e4)
    start = sc.stance_centroid + [0.2, 0.1]
    a = sc.stance_centroid - start
    req = SipRequest(sc, directions=[a], alpha=1.0, start=start)
    from feasregion.global_region import SipTrace

    tr = SipTrace(req.directions[0])
    sip_vertex(req, req.directions[0], tr)
    assert tr.iterations <= 2


def test_tight_limits_converge_and_revalidate(tight):
    sc, res = tight
    assert not res.failures
    for tr in res.traces:
        assert tr.iterations <= 50 and tr.distances[-1] <= 1e-3
        d = np.array(tr.distances)
        assert np.all(np.diff(d[1:]) <= 1e-9)  # contraction after the first iterate
        # feasible at its own configuration, or within eps_d of such a point
        v = tr.vertex
        assert own_config_feasible(sc, v) or own_config_feasible(sc, v - 1e-3 * tr.direction)


def test_tight_hull_strictly_inside_friction(tight):
    sc, res = tight
    fr = compute_region(RegionRequest(sc, "friction")).inner
    assert np.all(fr.A @ res.polygon.vertices.T <= fr.b[:, None] + 1e-6)
    assert res.polygon.area / fr.area < 1.0


def test_plus_x_matches_dense_sweep(tight):
    sc, res = tight
    tr = res.traces[0]
    assert tr.direction == pytest.approx([1.0, 0.0])
    ref = sweep_boundary(sc, sc.com[:2], tr.direction)
    assert np.hypot(*(tr.vertex - ref)) <= 2e-3


def test_sweep_points_inside_inflated_hull(tight):
    # convexity guard; 32 rays keep the chord error of the hull well under eps_d
    sc, _ = tight
    inflated = global_region(SipRequest(sc, directions=evenly_spaced(32))).polygon
    for a in evenly_spaced(5, phase=0.3):
        ref = sweep_boundary(sc, sc.com[:2], a, step=0.01)
        assert contains(inflated, ref, 2e-3)


def test_volume(tmp_path):
    sc = stance(0.6)
    dirs = evenly_spaced(8)
    slices = feasible_volume(sc, [0.55], directions=dirs)
    assert len(slices) == 1 and slices[0].polygon is not None
    slices = feasible_volume(sc, [0.95], directions=dirs)
    assert slices[0].polygon is None and slices[0].cause == "KinematicLimitHit"
    zs = [0.45, 0.5, 0.55, 0.6, 0.65]
    slices = feasible_volume(sc, zs, directions=dirs)
    areas = np.array([s.polygon.area for s in slices])
    assert np.all(areas > 0)
    assert np.max(np.abs(np.diff(areas))) < 0.5 * areas.max()
    rng = np.random.default_rng(0)
    for s in slices:
        from dataclasses import replace

        com = sc.com.copy()
        com[2] = s.z
        sz = replace(sc, com=com)
        for k in rng.choice(8, 3, replace=False):
            ref = sweep_boundary(sz, com[:2], dirs[k], step=0.01)
            assert np.hypot(*(s.result.vertices[k] - ref)) <= 2e-3 + 1e-6
    write_volume(slices + feasible_volume(sc, [0.95], directions=dirs), tmp_path)
    index = (tmp_path / "volume_index.csv").read_text().splitlines()
    assert index[0] == "z,file,cause" and index[-1] == "0.95,,KinematicLimitHit"
    assert (tmp_path / "slice_000.csv").exists()


def test_vanished_slice_cause():
    sc = stance(0.05)
    s = feasible_volume(sc, [0.55], directions=evenly_spaced(4))[0]
    assert s.polygon is None and s.cause == "RegionVanished"


def test_kinematic_failure_raised_per_direction():
    sc = stance(1e4)
    sc.com[2] = 0.74  # nearly straight legs: any horizontal shift leaves the workspace
    res = global_region(SipRequest(sc, directions=evenly_spaced(4)))
    assert any("KinematicLimitHit" in e for _, e in res.failures)
