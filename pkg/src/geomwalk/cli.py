"""Command-line orchestration.

Subcommands compose through files: `sample` writes points, `graph` turns
points into edges, `walk`/`sigma2` simulate, `conductance` solves the
periodized network, `boxes`/`crossings` run the percolation machinery.  All
randomness flows from one master seed through named child streams, so any
pipeline rerun with the same seed is byte-identical regardless of worker
count.  Progress goes to stderr; data goes to files only.

Exit codes: 0 ok, 1 runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import boxes as boxes_mod
from . import diffusion, fileio, resistor
from .graphs import creek_crossing, delaunay, gabriel
from .point_process import ParameterError, ProcessSpec, Window, palm_version, sample
from .rng import child_rng


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


class UsageError(Exception):
    """Bad flag combination: reported with exit code 2."""


def _window_from_args(args) -> Window:
    try:
        return Window.cube(args.window, args.dim, margin=args.margin)
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc


def _spec_from_args(args) -> ProcessSpec:
    try:
        return ProcessSpec(args.process, args.intensity, mu=args.mu, R=args.radius)
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc


def _add_process_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--process", choices=["ppp", "mcp", "mhp1", "mhp2"], default="ppp")
    p.add_argument("--lambda", dest="intensity", type=float, default=1.0,
                   help="intensity of the (base/parent) Poisson process")
    p.add_argument("--mu", type=float, default=None, help="daughter intensity (mcp)")
    p.add_argument("--radius", type=float, default=None, help="cluster/hardcore radius")
    p.add_argument("--window", type=float, default=20.0, help="side of the core window")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--margin", type=float, default=0.0, help="sampling margin per side")


def cmd_sample(args) -> int:
    window = _window_from_args(args)
    spec = _spec_from_args(args)
    rng = child_rng(args.seed, 0)
    if args.palm:
        cfg = palm_version(spec, window, rng)
    else:
        cfg = sample(spec, window, rng)
    cfg = type(cfg)(cfg.window, cfg.points, palm=cfg.palm, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fileio.write_points(out / "points.csv", cfg, spec)
    _log(f"sampled {len(cfg)} points -> {out / 'points.csv'}")
    return 0


def cmd_graph(args) -> int:
    if args.type == "creek" and args.n < 2:
        raise UsageError("creek-crossing parameter n must be >= 2")
    cfg = fileio.read_points(args.points)
    if args.type == "dt":
        g = delaunay(cfg)
    elif args.type == "gabriel":
        g = gabriel(cfg)
    else:
        g = creek_crossing(cfg, args.n)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fileio.write_edges(out / "edges.csv", g)
    _log(f"{g.kind}: {g.n_edges} edges -> {out / 'edges.csv'}")
    return 0


def cmd_walk(args) -> int:
    from .walk import simulate_vsrw

    cfg = fileio.read_points(args.points)
    g = fileio.read_edges(args.edges, n_vertices=len(cfg))
    rng = child_rng(args.seed, 0)
    inner_lo = np.asarray(cfg.window.lo) if args.censor else None
    inner_hi = np.asarray(cfg.window.hi) if args.censor else None
    path = simulate_vsrw(g, cfg, args.start, args.t_max, rng,
                         inner_lo=inner_lo, inner_hi=inner_hi)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fileio.write_walk(out / "walk.csv", path, cfg)
    _log(f"{path.n_jumps} jumps (truncated={path.truncated}) -> {out / 'walk.csv'}")
    return 0


def cmd_sigma2(args) -> int:
    window = _window_from_args(args)
    spec = _spec_from_args(args)
    times = np.arange(args.t_min, args.t_max + 1e-9, args.t_step)
    curve, _ = diffusion.annealed_msd(spec, args.graph, times, args.configs,
                                      args.walks, window, args.seed,
                                      n_workers=args.workers)
    fit = diffusion.fit_sigma2(curve, (args.fit_lo or times[0], args.fit_hi or times[-1]))
    iso = diffusion.isotropy_check(curve, (args.fit_lo or times[0], args.fit_hi or times[-1]))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fileio.write_msd(out / "msd.csv", curve)
    fileio.write_json(out / "sigma2.json", {
        "per_axis": list(fit.per_axis),
        "per_axis_stderr": list(fit.per_axis_stderr),
        "pooled": fit.pooled,
        "stderr": fit.stderr,
        "r2": fit.r2,
        "fit_window": list(fit.fit_window),
        "censor_fraction": curve.censor_fraction,
        "isotropy_statistic": iso.max_pair_statistic,
        "low_counts": fit.low_counts,
    })
    _log(f"sigma2={fit.pooled:.6g} (r2={fit.r2:.4f}) -> {out / 'sigma2.json'}")
    return 0


def cmd_conductance(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.network:
        net = fileio.read_network(args.network)
        sol = resistor.dirichlet_solve(net)
        payload = {"kappa": sol.kappa, "residual": sol.residual,
                   "iterations": sol.iterations, "connected": sol.connected}
        fileio.write_json(out / "conductance.json", payload)
        _log(f"kappa={sol.kappa:.12g} -> {out / 'conductance.json'}")
        return 0
    cfg = fileio.read_points(args.points)
    pnet = resistor.build_periodized(cfg, args.N, args.rc, graph_kind=args.graph)
    sol = resistor.dirichlet_solve(pnet.base)
    dn = resistor.diffusion_from_conductance(pnet, sol.kappa)
    payload = {"kappa": sol.kappa, "residual": sol.residual,
               "iterations": sol.iterations, "connected": sol.connected,
               "D_N": dn, "N": pnet.N, "r_c": pnet.r_c,
               "n_nodes": pnet.n_nodes_identified}
    if args.msd_check:
        rng = child_rng(args.seed, 1)
        rate, se = resistor.msd_on_network(pnet, args.t, args.samples, rng)
        payload["msd_slope"] = rate
        payload["msd_slope_stderr"] = se
        payload["relative_gap"] = abs(rate - dn) / dn if dn else None
    fileio.write_network(out / "network.csv", pnet.base, N=pnet.N, r_c=pnet.r_c)
    fileio.write_json(out / "conductance.json", payload)
    _log(f"kappa={sol.kappa:.12g} D_N={dn:.12g} -> {out / 'conductance.json'}")
    return 0


def cmd_boxes(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.sweep:
        spec = _spec_from_args(args)
        ks = [float(v) for v in args.sweep.split(",")]
        lines = ["K,p_hat,stderr"]
        for i, K in enumerate(ks):
            c2 = args.c2 if args.c2 else 2.0 * spec.intensity(args.dim) * 1.0
            rep = boxes_mod.empirical_good_density(spec, K, args.n, c2,
                                                   args.samples, args.seed + i,
                                                   n_workers=args.workers)
            lines.append(f"{K},{rep.p_hat},{rep.stderr}")
            _log(f"K={K}: p_hat={rep.p_hat:.3f} +- {rep.stderr:.3f}")
        (out / "sweep.csv").write_text("\n".join(lines) + "\n")
        return 0
    cfg = fileio.read_points(args.points)
    c2 = args.c2 if args.c2 else 2.0 * max(len(cfg), 1) / cfg.window.volume()
    grid = boxes_mod.classify_nice(cfg, args.K, c2)
    boxes_mod.classify_good(cfg, grid, args.n)
    report = [{"z": list(z), "nice": bool(grid.nice[z]), "good": bool(grid.good[z]),
               "ref_vertex": int(grid.ref_vertex[z]) if z in grid.ref_vertex else None}
              for z in grid.z_iter()]
    fileio.write_json(out / "boxes.json", {"K": args.K, "c2": c2, "n": args.n,
                                           "boxes": report})
    n_good = sum(1 for r in report if r["good"])
    _log(f"{n_good}/{len(report)} boxes good -> {out / 'boxes.json'}")
    return 0


def cmd_crossings(args) -> int:
    field_path = Path(args.field)
    payload = json.loads(field_path.read_text())
    arr = np.asarray(payload["open"], dtype=bool)
    rep = boxes_mod.count_disjoint_lr_crossings(boxes_mod.SiteField(arr), payload["N"])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fileio.write_json(out / "crossings.json", {
        "N": rep.N, "per_slice_counts": list(rep.per_slice_counts), "total": rep.total})
    _log(f"{rep.total} disjoint crossings -> {out / 'crossings.json'}")
    return 0


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    ap = argparse.ArgumentParser(prog="geomwalk",
                                 description="random geometric graph walk laboratory")
    ap.add_argument("--config", type=str, default=None,
                    help="JSON file of flag defaults (explicit flags win)")
    sub = ap.add_subparsers(dest="command", required=True)
    registry: dict[str, argparse.ArgumentParser] = {}

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out", type=str, default=".")

    p = sub.add_parser("sample", help="sample a point process")
    _add_process_flags(p)
    p.add_argument("--palm", action="store_true", help="Palm version (origin point)")
    common(p)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("graph", help="build a geometric graph over points")
    p.add_argument("--points", required=True)
    p.add_argument("--type", choices=["dt", "gabriel", "creek"], default="dt")
    p.add_argument("--n", type=int, default=2, help="creek-crossing parameter")
    common(p)
    p.set_defaults(fn=cmd_graph)

    p = sub.add_parser("walk", help="simulate one variable-speed walk")
    p.add_argument("--points", required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--t-max", type=float, default=100.0)
    p.add_argument("--censor", action="store_true",
                   help="truncate at the first exit from the core window")
    common(p)
    p.set_defaults(fn=cmd_walk)

    p = sub.add_parser("sigma2", help="annealed diffusion-constant pipeline")
    _add_process_flags(p)
    p.add_argument("--graph", default="dt", help="dt | gabriel | creek[:n]")
    p.add_argument("--configs", type=int, default=20)
    p.add_argument("--walks", type=int, default=20)
    p.add_argument("--t-min", type=float, default=50.0)
    p.add_argument("--t-max", type=float, default=500.0)
    p.add_argument("--t-step", type=float, default=50.0)
    p.add_argument("--fit-lo", type=float, default=None)
    p.add_argument("--fit-hi", type=float, default=None)
    common(p)
    p.set_defaults(fn=cmd_sigma2)

    p = sub.add_parser("conductance", help="periodized-network conductance")
    p.add_argument("--network", default=None, help="solve a prebuilt network CSV")
    p.add_argument("--points", default=None)
    p.add_argument("--graph", default="dt")
    p.add_argument("--N", type=int, default=8)
    p.add_argument("--rc", type=float, default=3.0)
    p.add_argument("--msd-check", action="store_true",
                   help="cross-check D_N against the winding walk")
    p.add_argument("--t", type=float, default=200.0)
    p.add_argument("--samples", type=int, default=100000)
    common(p)
    p.set_defaults(fn=cmd_conductance)

    p = sub.add_parser("boxes", help="nice/good box classification or density sweep")
    _add_process_flags(p)
    p.add_argument("--points", default=None)
    p.add_argument("--K", type=float, default=8.0)
    p.add_argument("--c2", type=float, default=None)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--sweep", default=None, help="comma-separated K values")
    p.add_argument("--samples", type=int, default=20)
    common(p)
    p.set_defaults(fn=cmd_boxes)

    p = sub.add_parser("crossings", help="count disjoint LR crossings of a site field")
    p.add_argument("--field", required=True, help='JSON {"N": n, "open": [[...]]}')
    common(p)
    p.set_defaults(fn=cmd_crossings)

    registry.update(sub.choices)
    return ap, registry


def main(argv=None) -> int:
    ap, registry = build_parser()
    pre, _ = ap.parse_known_args(argv)
    if getattr(pre, "config", None):
        try:
            defaults = json.loads(Path(pre.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            _log(f"error: cannot read config file: {exc}")
            return 2
        for p in registry.values():
            known = {a.dest for a in p._actions}  # noqa: SLF001
            p.set_defaults(**{k: v for k, v in defaults.items() if k in known})
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        _log(f"usage error: {exc}")
        return 2
    except Exception as exc:  # runtime failure
        _log(f"error: {type(exc).__name__}: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
