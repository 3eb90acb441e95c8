"""Command-line front end.

Exit codes: 0 success, 1 bad input (scenario schema, terrain parse),
2 empty region, 3 iteration cap reached.
"""
import argparse
import json
import os
import sys
import time

import numpy as np
import yaml

from . import kernels
from .errors import EmptyRegion, NotConverged, OutOfBounds, ParseError, SchemaError
from .geometry import format_float, write_polygon_csv
from .plotting import region_svg
from .region import RegionRequest, compute_region

EXIT_OK, EXIT_SCHEMA, EXIT_EMPTY, EXIT_NOT_CONVERGED = 0, 1, 2, 3

# acceptance thresholds echoed by ``bench``
BENCH_P50_MS = 25.0
BENCH_P995_MS = 100.0
BENCH_FOOTHOLD_MS = 250.0


def _load(path):
    from .scenario import load_scenario

    return load_scenario(path)


def _terrain(spec, seed=0):
    """A heightmap file, or a generator: flat[:z], pallet[:height], bricks[:max_height]."""
    from . import terrain

    if os.path.exists(spec):
        return terrain.load_heightmap(spec)
    name, _, arg = spec.partition(":")
    if name == "flat":
        return terrain.flat(float(arg or 0.0))
    if name == "pallet":
        return terrain.pallet(float(arg or 0.15), x_range=(0.45, 2.0), y_range=(0.0, 1.0))
    if name in ("bricks", "brick_field"):
        return terrain.brick_field(float(arg or 0.1), seed=seed)
    raise SchemaError("terrain", f"no such file and unknown generator {spec!r}")


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def _xy(s):
    try:
        x, y = (float(v) for v in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y, got {s!r}")
    return np.array([x, y])


def _floats(s):
    try:
        return [float(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_region(args):
    sc = _load(args.scenario)
    os.makedirs(args.out, exist_ok=True)
    req = RegionRequest(sc, args.mode, eps=args.eps)
    status = EXIT_OK
    try:
        res = compute_region(req)
    except NotConverged as exc:
        res = exc.result
        status = EXIT_NOT_CONVERGED
        print(f"not converged: {exc}", file=sys.stderr)
    friction = res if args.mode == "friction" else None
    if friction is None:
        try:
            friction = compute_region(RegionRequest(sc, "friction", eps=args.eps))
        except (EmptyRegion, NotConverged):
            friction = None
    meta = res.metadata()
    meta["scenario"] = os.path.basename(args.scenario)
    meta["backend"] = kernels.get_backend()
    header = {k: (format_float(v) if isinstance(v, float) else v) for k, v in res.metadata().items()}
    write_polygon_csv(os.path.join(args.out, f"{args.mode}_inner.csv"), res.inner, dict(header, polygon="inner"))
    write_polygon_csv(os.path.join(args.out, f"{args.mode}_outer.csv"), res.outer, dict(header, polygon="outer"))
    svg = region_svg(
        [c.position[:2] for c in sc.contacts],
        friction=friction.inner if friction is not None else None,
        feasible=res.inner if args.mode != "friction" else None,
        com=sc.com[:2],
        title=f"{args.mode} region",
    )
    _write(os.path.join(args.out, "region.svg"), svg)
    _write(os.path.join(args.out, "metadata.json"), json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(f"{args.mode} region: area {format_float(res.inner.area)} m^2, {len(res.inner)} vertices, "
          f"{res.iterations} iterations, gap {format_float(res.area_gap)} m^2")
    return status


def cmd_margin(args):
    from .planner import margin

    sc = _load(args.scenario)
    rep = margin(sc, args.com)
    print(f"r: {format_float(rep.r)}")
    print(f"beta: {rep.beta}")
    print(f"m_tau: {format_float(rep.m_tau)}")
    return EXIT_OK


def _schedule(path):
    from .planner import GaitSchedule

    if path is None:
        return GaitSchedule()
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise SchemaError("", "schedule must be a mapping")
    allowed = set(GaitSchedule.__dataclass_fields__)
    for k in data:
        if k not in allowed:
            raise SchemaError(k, "unknown schedule key")
    if "sequence" in data:
        data["sequence"] = tuple(data["sequence"])
    if "direction" in data:
        data["direction"] = tuple(data["direction"])
    try:
        return GaitSchedule(**data)
    except (TypeError, ValueError) as exc:
        raise SchemaError("schedule", str(exc))


def cmd_plan(args):
    from .planner import crawl_simulate

    sc = _load(args.scenario)
    hm = _terrain(args.terrain, args.seed)
    sched = _schedule(args.schedule)
    log = crawl_simulate(sc, sched, hm, args.strategy)
    os.makedirs(args.out, exist_ok=True)
    _write(os.path.join(args.out, "plan_log.csv"), log.to_csv())
    if not args.no_svg:
        for k, rec in enumerate(log.records):
            if rec.phase != "swing" or rec.stance_xy is None:
                continue
            svg = region_svg(rec.stance_xy, friction=rec.poly_f, feasible=rec.poly_fa, com=rec.com,
                             title=f"swing {rec.swing_leg} t={rec.time:.2f} s")
            _write(os.path.join(args.out, f"phase_{k:03d}.svg"), svg)
    print(f"min m_tau over triple stances: {format_float(log.min_m_tau)}")
    return EXIT_OK


def cmd_global(args):
    from .global_region import SipRequest, evenly_spaced, feasible_volume, global_region, write_volume

    sc = _load(args.scenario)
    os.makedirs(args.out, exist_ok=True)
    dirs = evenly_spaced(args.directions)
    if args.volume:
        slices = feasible_volume(sc, args.volume, directions=dirs)
        write_volume(slices, args.out)
        for s in slices:
            area = format_float(s.polygon.area) if s.polygon is not None else "empty"
            print(f"z {format_float(s.z)}: {area} {s.cause}".rstrip())
        return EXIT_OK
    res = global_region(SipRequest(sc, directions=dirs))
    lines = ["dx,dy,iterations,vertex_x,vertex_y,error"]
    for tr in res.traces:
        v = tr.vertex if tr.vertex is not None else (np.nan, np.nan)
        lines.append(",".join([format_float(tr.direction[0]), format_float(tr.direction[1]), str(tr.iterations),
                               format_float(v[0]), format_float(v[1]), tr.error.replace(",", ";")]))
    _write(os.path.join(args.out, "sip_traces.csv"), "\n".join(lines) + "\n")
    if res.polygon is None:
        print("global region: fewer than 3 directions converged", file=sys.stderr)
        return EXIT_EMPTY
    write_polygon_csv(os.path.join(args.out, "global_region.csv"), res.polygon)
    _write(os.path.join(args.out, "global_region.svg"),
           region_svg([c.position[:2] for c in sc.contacts], feasible=res.polygon, com=sc.com[:2],
                      title="global feasible region"))
    print(f"global region: area {format_float(res.polygon.area)} m^2, "
          f"{len(res.vertices)}/{len(res.traces)} directions converged")
    return EXIT_OK


def bench_region(sc, mode, repeat):
    ts = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        compute_region(RegionRequest(sc, mode))
        ts.append(time.perf_counter() - t0)
    ts = np.array(ts) * 1e3
    return float(np.percentile(ts, 50)), float(np.percentile(ts, 99.5))


def bench_footholds(sc, repeat, p=9):
    """Wall time of one p-candidate foothold batch (triple-stance evaluations)."""
    from .planner import plan_foothold
    from .terrain import flat

    hm = flat(0.0)
    leg = sc.contacts[0].leg
    default = sc.contacts[0].position[:2] + np.array([0.12, 0.0])
    ts = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        plan_foothold(sc, leg, hm, default, p=p)
        ts.append(time.perf_counter() - t0)
    return float(np.median(ts) * 1e3)


def cmd_bench(args):
    sc = _load(args.scenario)
    backends = kernels.available_backends() if args.backend == "both" else [args.backend or kernels.get_backend()]
    prev = kernels.get_backend()
    try:
        for be in backends:
            kernels.set_backend(be)
            compute_region(RegionRequest(sc, "feasible"))  # warm-up (JIT)
            for mode in ("friction", "actuation", "feasible"):
                try:
                    p50, p995 = bench_region(sc, mode, args.repeat)
                except EmptyRegion:
                    print(f"{be} {mode}: empty region")
                    continue
                flag = ""
                if mode == "feasible":
                    ok = p50 < BENCH_P50_MS and p995 < BENCH_P995_MS
                    flag = f"  [{'pass' if ok else 'FAIL'}: p50 < {BENCH_P50_MS:g} ms, p99.5 < {BENCH_P995_MS:g} ms]"
                print(f"{be} {mode}: p50 {p50:.3f} ms  p99.5 {p995:.3f} ms  (n={args.repeat}){flag}")
            if len(sc.contacts) == 4:
                ms = bench_footholds(sc, max(1, min(args.repeat, 10)))
                ok = ms < BENCH_FOOTHOLD_MS
                print(f"{be} foothold batch (p=9): median {ms:.1f} ms  [{'pass' if ok else 'FAIL'}: < {BENCH_FOOTHOLD_MS:g} ms]")
    finally:
        kernels.set_backend(prev)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="feasregion", description="Actuation-aware support regions for legged robots.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("region", help="compute a friction, actuation or feasible region")
    r.add_argument("--mode", choices=("friction", "actuation", "feasible"), default="feasible")
    r.add_argument("--scenario", required=True)
    r.add_argument("--eps", type=float, default=None, help="area tolerance [m^2] (default 1e-6)")
    r.add_argument("--out", default=".")
    r.set_defaults(fn=cmd_region)

    m = sub.add_parser("margin", help="feasibility margin r and torque flag beta at a CoM")
    m.add_argument("--scenario", required=True)
    m.add_argument("--com", type=_xy, required=True, help="X,Y [m]")
    m.set_defaults(fn=cmd_margin)

    pl = sub.add_parser("plan", help="kinematic crawl over a height map")
    pl.add_argument("--scenario", required=True)
    pl.add_argument("--terrain", required=True, help="heightmap file or flat[:z] / pallet[:h] / bricks[:h]")
    pl.add_argument("--schedule", default=None, help="YAML gait schedule")
    pl.add_argument("--strategy", choices=("friction", "feasible"), default="feasible")
    pl.add_argument("--seed", type=int, default=0)
    pl.add_argument("--out", default=".")
    pl.add_argument("--no-svg", action="store_true")
    pl.set_defaults(fn=cmd_plan)

    g = sub.add_parser("global", help="configuration-independent region by SIP")
    g.add_argument("--scenario", required=True)
    g.add_argument("--directions", type=int, default=16)
    g.add_argument("--volume", type=_floats, default=None, help="z1,z2,... base heights [m]")
    g.add_argument("--out", default=".")
    g.set_defaults(fn=cmd_global)

    b = sub.add_parser("bench", help="latency percentiles of compute_region")
    b.add_argument("--scenario", required=True)
    b.add_argument("--repeat", type=int, default=200)
    b.add_argument("--backend", choices=("numba", "numpy", "both"), default=None)
    b.set_defaults(fn=cmd_bench)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "directions", 3) < 3:
        print("error: need at least 3 directions", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        return args.fn(args)
    except (SchemaError, ParseError, OutOfBounds) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except EmptyRegion as exc:
        print(f"empty region: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except NotConverged as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED


if __name__ == "__main__":
    sys.exit(main())
