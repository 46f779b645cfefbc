"""Command-line interface: classify, simulate, maps, sweep."""

from __future__ import annotations

import argparse
import io
import os
import random
import sys
from math import degrees

from .configio import (
    ConfigError,
    config_digest,
    parse_config,
    parse_sweep,
)
from .hybrid import Budget, simulate, trajectory_rows
from .model import BodyState, GeometryError
from .poincare import maps_csv, maps_svg, sample_maps
from .stability import REGION_LEGEND, classify
from .svgplot import SvgCanvas
from .sweep import region_csv, region_svg, run_sweep


def _fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise SystemExit(f"error: cannot read {path}: {exc}")


def _write(out_dir: str, name: str, content: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(content)
    return path


def _load_config(path: str):
    try:
        return parse_config(_read(path))
    except ConfigError as exc:
        raise SystemExit(f"error: {path}: {exc}")


def cmd_classify(args) -> int:
    config = _load_config(args.config)
    try:
        verdict = classify(config, map_points=args.grid, refine_depth=args.refine)
    except GeometryError as exc:
        raise SystemExit(f"error: degenerate geometry: {exc}")
    ev = verdict.evidence
    print(f"region {verdict.region_class}: {verdict.region_name}"
          + (" [marginal]" if verdict.marginal else ""))
    print(f"  equilibrium: {ev['equilibrium']}")
    b1, b2 = ev["painleve_bounds"]
    print(f"  friction bounds: mu1 < {b1:.4g}, mu2 < {b2:.4g}")
    if ev.get("max_G") is not None:
        print(f"  max G over defined samples: {ev['max_G']:.4g}")
    if ev.get("G_minus") is not None:
        print(f"  G at -pi/2: {ev['G_minus']:.4g}")
    if ev.get("G_plus") is not None:
        print(f"  G at +pi/2: {ev['G_plus']:.4g}")
    for fp in ev.get("fixed_points", []):
        print(f"  fixed point phi*={fp.phi_star:+.4f} ({fp.kind}) "
              f"slope={fp.R_slope:.4g} G={fp.G_at:.4g}")
    if "partition" in ev:
        cuts = ", ".join(f"{c:+.4f}" for c in ev["partition"].cut_points)
        print(f"  stable partition cuts: {cuts}")
    summary = REGION_LEGEND[verdict.region_class]
    row = (f"config,region,marginal,summary\n"
           f"{config_digest(config)},{verdict.region_class},"
           f"{1 if verdict.marginal else 0},{summary}\n")
    _write(args.out_dir, "verdict.csv", row)
    return 0


def _parse_state(text: str) -> BodyState:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 6:
        raise SystemExit("error: --state needs 'z1,z2,x2,dz1,dz2,dx2'")
    try:
        z1, z2, x2, dz1, dz2, dx2 = (float(p) for p in parts)
    except ValueError:
        raise SystemExit(f"error: --state has a non-numeric entry: {text!r}")
    return BodyState(z1, z2, x2, dz1, dz2, dx2)


def _random_state(seed: int, magnitude: float) -> BodyState:
    rng = random.Random(seed)
    return BodyState(
        z1=rng.uniform(0, magnitude ** 2), z2=rng.uniform(0, magnitude ** 2),
        x2=rng.uniform(-magnitude ** 2, magnitude ** 2),
        dz1=rng.uniform(-magnitude, magnitude), dz2=rng.uniform(-magnitude, magnitude),
        dx2=rng.uniform(-magnitude, magnitude),
    )


def _trajectory_csv(traj) -> str:
    out = io.StringIO()
    out.write("t,z1,z2,x2,dz1,dz2,dx2,mode,event\n")
    for row in trajectory_rows(traj):
        cells = [_fmt(v) if isinstance(v, float) or v is None else str(v) for v in row]
        out.write(",".join(cells) + "\n")
    return out.getvalue()


def _trajectory_svg(traj) -> str:
    rows = [r for r in trajectory_rows(traj) if r[1] is not None]
    cv = SvgCanvas(880, 560)
    if rows:
        ts = [r[0] for r in rows]
        t0, t1 = min(ts), max(ts)
        if t1 <= t0:
            t1 = t0 + 1.0
        series = [("z1", 1, "#2166ac"), ("z2", 2, "#b2182b"), ("x2", 3, "#33a02c")]
        vals = [r[k] for r in rows for _, k, _ in series]
        lo, hi = min(vals), max(vals)
        if hi <= lo:
            hi = lo + 1.0
        ax = cv.axes(50, 30, 800, 460, (t0, t1), (lo, hi))
        ax.frame("local coordinates vs time")
        for name, k, color in series:
            ax.polyline([(r[0], r[k]) for r in rows], stroke=color)
        for i, (name, _, color) in enumerate(series):
            cv.rect(60 + 120 * i, 510, 12, 12, color)
            cv.text(78 + 120 * i, 521, name)
    return cv.render()


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    if args.state:
        state = _parse_state(args.state)
    else:
        state = _random_state(args.seed, args.random_delta)
    budget = Budget(max_transitions=args.budget_transitions, max_time=args.max_time)
    traj = simulate(config, state, budget)
    print(f"terminal: {traj.terminal}"
          + (f" ({traj.detail})" if traj.detail else ""))
    print("signature: " + " -> ".join(traj.signature_plain()))
    if traj.terminal_state is not None:
        s = traj.terminal_state
        print(f"final state: z1={s.z1:.6g} z2={s.z2:.6g} x2={s.x2:.6g} "
              f"t={traj.terminal_time:.6g}")
    path = _write(args.out_dir, "trajectory.csv", _trajectory_csv(traj))
    print(f"wrote {path}")
    if args.svg:
        path = _write(args.out_dir, "trajectory.svg", _trajectory_svg(traj))
        print(f"wrote {path}")
    return 0


def cmd_maps(args) -> int:
    config = _load_config(args.config)
    maps = sample_maps(config, n_uniform=args.grid, refine_depth=args.refine)
    defined = maps.defined_samples()
    print(f"defined samples: {len(defined)}/{len(maps.samples)}")
    if defined:
        print(f"max G: {max(s.outcome.G for s in defined):.6g}")
    if maps.g_minus is not None:
        print(f"G at -pi/2: {maps.g_minus:.6g}")
    if maps.g_plus is not None:
        print(f"G at +pi/2: {maps.g_plus:.6g}")
    if maps.breakpoints:
        print("breakpoints: " + ", ".join(f"{b:+.4f}" for b in maps.breakpoints))
    path = _write(args.out_dir, "maps.csv", maps_csv(maps))
    print(f"wrote {path}")
    if args.svg:
        path = _write(args.out_dir, "maps.svg", maps_svg(maps))
        print(f"wrote {path}")
    return 0


def cmd_sweep(args) -> int:
    try:
        spec = parse_sweep(_read(args.config))
    except ConfigError as exc:
        raise SystemExit(f"error: {args.config}: {exc}")
    rmap = run_sweep(spec, jobs=args.jobs)
    counts = {}
    for cell in rmap.cells:
        counts[cell.region] = counts.get(cell.region, 0) + 1
    for region in sorted(counts):
        name = REGION_LEGEND.get(region, "error")
        print(f"region {region} ({name}): {counts[region]} cells")
    path = _write(args.out_dir, "regions.csv", region_csv(rmap))
    print(f"wrote {path}")
    if args.svg:
        path = _write(args.out_dir, "regions.svg", region_svg(rmap))
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contactstab",
        description="Stability analysis of a planar rigid body on two frictional contacts",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify one configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--grid", type=int, default=2001, help="map sample count")
    p.add_argument("--refine", type=int, default=40, help="breakpoint bisections")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("simulate", help="run one trajectory")
    p.add_argument("--config", required=True)
    p.add_argument("--state", help="initial 'z1,z2,x2,dz1,dz2,dx2'")
    p.add_argument("--seed", type=int, default=0, help="seed for a random initial state")
    p.add_argument("--random-delta", type=float, default=0.01,
                   help="magnitude of the random initial state")
    p.add_argument("--budget-transitions", type=int, default=10_000)
    p.add_argument("--max-time", type=float, default=1e6)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--svg", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("maps", help="sample the return and growth maps")
    p.add_argument("--config", required=True)
    p.add_argument("--grid", type=int, default=2001)
    p.add_argument("--refine", type=int, default=40)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--svg", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_maps)

    p = sub.add_parser("sweep", help="classify a 2-D parameter grid")
    p.add_argument("--config", required=True, help="sweep spec file")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--svg", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
