import json
import os

import numpy as np
import pytest
import yaml

from feasregion.cli import EXIT_EMPTY, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_SCHEMA, main
from feasregion.geometry import contains, hausdorff_distance, read_polygon_csv
from feasregion.region import membership_oracle
from feasregion.scenario import load_scenario

from conftest import FIXTURES, SCENARIOS

GOLDEN = os.path.join(FIXTURES, "rectangle_golden")
RECT = os.path.join(SCENARIOS, "rectangle_stance.yaml")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("mode", ["friction", "feasible"])
def test_region_matches_golden(tmp_path, capsys, mode):
    code, out, _ = run(capsys, "region", "--mode", mode, "--scenario", RECT, "--eps", 1e-6, "--out", tmp_path)
    assert code == EXIT_OK and f"{mode} region: area" in out
    for which in ("inner", "outer"):
        got, hdr = read_polygon_csv(tmp_path / f"{mode}_{which}.csv")
        want, whdr = read_polygon_csv(os.path.join(GOLDEN, f"{mode}_{which}.csv"))
        assert hdr["eps"] == whdr["eps"] == "1e-06"
        assert hdr["mode"] == mode and hdr["polygon"] == which
        assert hausdorff_distance(got, want) <= 1e-9
    meta = json.loads((tmp_path / "metadata.json").read_text())
    assert meta["eps"] == 1e-6 and meta["mode"] == mode and meta["converged"]
    svg = (tmp_path / "region.svg").read_text()
    assert svg.startswith("<svg") and svg.count('class="contact"') == 4
    assert ('class="feasible"' in svg) == (mode == "feasible")
    assert 'class="friction"' in svg


def test_golden_against_grid_oracle():
    sc = load_scenario(RECT)
    poly, _ = read_polygon_csv(os.path.join(GOLDEN, "feasible_inner.csv"))
    outer, _ = read_polygon_csv(os.path.join(GOLDEN, "feasible_outer.csv"))
    lo = outer.vertices.min(0) - 0.05
    hi = outer.vertices.max(0) + 0.05
    band = 2 * np.sqrt(1e-6)
    xs, ys = np.linspace(lo[0], hi[0], 40), np.linspace(lo[1], hi[1], 40)
    bad = 0
    for x in xs:
        for y in ys:
            p = np.array([x, y])
            ok = membership_oracle(sc, p, "feasible").feasible
            inside = contains(poly, p, 0.0)
            if ok != inside and abs(poly.signed_distance(p)) > band:
                bad += 1
    assert bad == 0


def test_golden_svg_stable(tmp_path, capsys):
    run(capsys, "region", "--mode", "feasible", "--scenario", RECT, "--eps", 1e-6, "--out", tmp_path)
    a = (tmp_path / "region.svg").read_text()
    b = open(os.path.join(GOLDEN, "region.svg")).read()
    assert a.splitlines()[0] == b.splitlines()[0]
    assert a.count("<polygon") == b.count("<polygon") == 2


def test_bad_scenario_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    data = yaml.safe_load(open(RECT))
    data["mass"] = -3.0
    bad.write_text(yaml.safe_dump(data))
    code, _, err = run(capsys, "region", "--scenario", bad, "--out", tmp_path)
    assert code == EXIT_SCHEMA
    assert "mass" in err and "-3.0" in err
    data = yaml.safe_load(open(RECT))
    data["contacts"][1]["frictoin"] = 0.5
    bad.write_text(yaml.safe_dump(data))
    code, _, err = run(capsys, "region", "--scenario", bad, "--out", tmp_path)
    assert code == EXIT_SCHEMA and "contacts[1]" in err


def test_empty_region_exit_2(tmp_path, capsys):
    s = tmp_path / "heavy.yaml"
    data = yaml.safe_load(open(RECT))
    data["torque_limit_overrides"] = {"all": [1, 1, 1]}
    s.write_text(yaml.safe_dump(data))
    code, _, err = run(capsys, "region", "--scenario", s, "--out", tmp_path)
    assert code == EXIT_EMPTY and err


def test_iteration_cap_exit_3(tmp_path, capsys):
    s = tmp_path / "capped.yaml"
    data = yaml.safe_load(open(RECT))
    data["region"] = {"max_iterations": 4}
    s.write_text(yaml.safe_dump(data))
    code, _, _ = run(capsys, "region", "--scenario", s, "--out", tmp_path)
    assert code == EXIT_NOT_CONVERGED
    meta = json.loads((tmp_path / "metadata.json").read_text())
    assert meta["converged"] is False
    inner, _ = read_polygon_csv(tmp_path / "feasible_inner.csv")
    outer, _ = read_polygon_csv(tmp_path / "feasible_outer.csv")
    assert inner.area <= outer.area


def test_margin_output(capsys):
    code, out, _ = run(capsys, "margin", "--scenario", RECT, "--com", "0,0")
    assert code == EXIT_OK
    lines = dict(l.split(": ") for l in out.strip().splitlines())
    assert float(lines["r"]) > 0 and lines["beta"] == "0"
    code, out, _ = run(capsys, "margin", "--scenario", RECT, "--com", "1.5,0")
    lines = dict(l.split(": ") for l in out.strip().splitlines())
    assert float(lines["r"]) < 0 and lines["beta"] == "1"


def test_plan_deterministic(tmp_path, capsys):
    sched = os.path.join(SCENARIOS, "crawl_schedule.yaml")
    sc = os.path.join(SCENARIOS, "quadruped_flat.yaml")
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        code, out, _ = run(capsys, "plan", "--scenario", sc, "--terrain", "pallet:0.15",
                           "--schedule", sched, "--out", d)
        assert code == EXIT_OK and out.startswith("min m_tau over triple stances:")
        outs.append(((d / "plan_log.csv").read_bytes(), sorted(os.listdir(d))))
    assert outs[0] == outs[1]
    assert any(n.startswith("phase_") and n.endswith(".svg") for n in outs[0][1])
    rows = outs[0][0].decode().splitlines()
    assert rows[0].startswith("time,phase,swing_leg") and len(rows) > 8


def test_plan_bad_schedule(tmp_path, capsys):
    s = tmp_path / "sched.yaml"
    s.write_text("steps: 4\nstride: 0.1\n")
    code, _, err = run(capsys, "plan", "--scenario", RECT, "--terrain", "flat", "--schedule", s,
                       "--out", tmp_path, "--no-svg")
    assert code == EXIT_SCHEMA and "stride" in err
    code, _, err = run(capsys, "plan", "--scenario", RECT, "--terrain", "nowhere.txt", "--out", tmp_path)
    assert code == EXIT_SCHEMA


def test_global_and_volume(tmp_path, capsys):
    sip = os.path.join(SCENARIOS, "sip_stance.yaml")
    code, out, _ = run(capsys, "global", "--scenario", sip, "--directions", 8, "--out", tmp_path)
    assert code == EXIT_OK and "global region: area" in out
    poly, _ = read_polygon_csv(tmp_path / "global_region.csv")
    assert poly.area > 0
    traces = (tmp_path / "sip_traces.csv").read_text().splitlines()
    assert len(traces) == 9
    code, out, _ = run(capsys, "global", "--scenario", sip, "--directions", 2, "--out", tmp_path)
    assert code == EXIT_SCHEMA
    code, out, _ = run(capsys, "global", "--scenario", sip, "--directions", 6, "--volume", "0.5,0.9",
                       "--out", tmp_path / "vol")
    assert code == EXIT_OK
    index = (tmp_path / "vol" / "volume_index.csv").read_text().splitlines()
    assert index[0] == "z,file,cause" and len(index) == 3
    assert index[2].endswith("KinematicLimitHit")


def test_bench_output(capsys):
    code, out, _ = run(capsys, "bench", "--scenario", os.path.join(SCENARIOS, "quadruped_flat.yaml"),
                       "--repeat", 3)
    assert code == EXIT_OK
    assert "feasible: p50" in out and "p99.5" in out
    assert "foothold batch (p=9)" in out
