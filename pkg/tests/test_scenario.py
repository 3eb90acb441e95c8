import numpy as np
import pytest
import yaml

from feasregion.errors import SchemaError
from feasregion.scenario import load_scenario, scenario_from_dict, scenario_to_dict
from feasregion.terrain import flat, save_heightmap

from conftest import SCENARIOS

BASE = {
    "com": [0, 0, 0.55],
    "contacts": [
        {"leg": "LF", "position": [0.37, 0.21, 0]},
        {"leg": "RF", "position": [0.37, -0.21, 0]},
        {"leg": "LH", "position": [-0.37, 0.21, 0]},
    ],
}


def with_(**kw):
    d = yaml.safe_load(yaml.safe_dump(BASE))
    d.update(kw)
    return d


def test_bundled_scenarios_load():
    for name in ("quadruped_flat", "rectangle_stance", "sip_stance", "uneven_heavy_load"):
        sc = load_scenario(f"{SCENARIOS}/{name}.yaml")
        assert sc.name == name and len(sc.contacts) == 4
    sc = load_scenario(f"{SCENARIOS}/uneven_heavy_load.yaml")
    assert sc.load_z == -600.0 and sc.weight == pytest.approx(85 * 9.81 + 600)
    assert load_scenario(f"{SCENARIOS}/rectangle_stance.yaml").robot.leg("RH").tau_lim == pytest.approx([60, 75, 75])


def test_defaults():
    sc = scenario_from_dict(BASE)
    assert sc.region.eps == 1e-6 and sc.region.bounding_box == 10.0 and sc.region.scale == 0.8
    assert sc.mass == 85.0 and sc.gravity == 9.81
    assert sc.contacts[0].mu == 0.8 and sc.contacts[0].unilateral


@pytest.mark.parametrize(
    "patch, path",
    [
        ({"mass": -1}, "mass"),
        ({"mass": "heavy"}, "mass"),
        ({"colour": 1}, "colour"),
        ({"com": [0, 0]}, "com"),
        ({"contacts": []}, "contacts"),
        ({"region": {"eps": 0}}, "region.eps"),
        ({"region": {"scale": 1.5}}, "region.scale"),
        ({"torque_limit_overrides": {"all": [[-50, 100], [-1, 1], [-1, 1]]}}, "torque_limit_overrides.all[0]"),
        ({"torque_limit_overrides": {"LF": [1, 2]}}, "torque_limit_overrides.LF"),
        ({"robot": {"legs": {"LF": {"lengths": [0.1, -0.3, 0.3]}}}}, "robot.legs.LF.lengths[1]"),
        ({"robot": {"legs": {"LF": {"knee": "sideways"}}}}, "robot.legs.LF.knee"),
        ({"robot": "spot"}, "robot"),
        ({"external_load": [10, 0, -5]}, "external_load"),
        ({"external_load": 5000}, "external_load"),
    ],
)
def test_schema_errors_carry_path(patch, path):
    with pytest.raises(SchemaError) as ei:
        scenario_from_dict(with_(**patch))
    assert ei.value.path == path
    assert path in str(ei.value)


@pytest.mark.parametrize(
    "contact, path",
    [
        ({"position": [0, 0, 0]}, "contacts[0].leg"),
        ({"leg": "XX", "position": [0, 0, 0]}, "contacts[0].leg"),
        ({"leg": "LF"}, "contacts[0].position"),
        ({"leg": "LF", "position": [0, 0, 0], "normal": [0, 0, 0]}, "contacts[0].normal"),
        ({"leg": "LF", "position": [0, 0, 0], "mode": "glued"}, "contacts[0].mode"),
        ({"leg": "LF", "position": [0, 0, 0], "friction": 0}, "contacts[0].friction"),
        ({"leg": "LF", "position": [0, "a", 0]}, "contacts[0].position[1]"),
        ({"leg": "LF", "position": [0, 0, "from_heightmap"]}, "contacts[0]"),
    ],
)
def test_contact_errors(contact, path):
    with pytest.raises(SchemaError) as ei:
        scenario_from_dict(with_(contacts=[contact]))
    assert ei.value.path == path


def test_duplicate_leg():
    with pytest.raises(SchemaError):
        scenario_from_dict(with_(contacts=[{"leg": "LF", "position": [0, 0, 0]}] * 2))


def test_from_heightmap(tmp_path):
    save_heightmap(tmp_path / "t.txt", flat(0.07))
    d = with_(terrain="t.txt", contacts=[{"leg": "LF", "position": [0.37, 0.21, "from_heightmap"], "normal": "from_heightmap"}])
    (tmp_path / "s.yaml").write_text(yaml.safe_dump(d))
    sc = load_scenario(tmp_path / "s.yaml")
    assert sc.contacts[0].position[2] == pytest.approx(0.07)
    assert sc.contacts[0].normal == pytest.approx([0, 0, 1])


def test_bad_files(tmp_path):
    with pytest.raises(SchemaError):
        load_scenario(tmp_path / "missing.yaml")
    (tmp_path / "e.yaml").write_text("")
    with pytest.raises(SchemaError):
        load_scenario(tmp_path / "e.yaml")
    (tmp_path / "b.yaml").write_text("contacts: [\n")
    with pytest.raises(SchemaError):
        load_scenario(tmp_path / "b.yaml")


def test_dict_round_trip():
    sc = load_scenario(f"{SCENARIOS}/uneven_heavy_load.yaml")
    back = scenario_from_dict(scenario_to_dict(sc))
    assert back.load_z == sc.load_z and back.name == sc.name
    for a, b in zip(sc.contacts, back.contacts):
        assert np.allclose(a.position, b.position) and np.allclose(a.normal, b.normal) and a.mu == b.mu
    for a, b in zip(sc.robot.legs, back.robot.legs):
        assert np.allclose(a.hip, b.hip) and a.knee_sign == b.knee_sign
        for f in ("lengths", "masses", "com_offsets", "joint_limits", "torque_limits"):
            assert np.allclose(getattr(a, f), getattr(b, f))
