"""File formats: points/edges/walk/msd CSVs with JSON sidecars.

Floats are written with 17 significant digits, which round-trips IEEE
doubles exactly, so rereading a file reproduces the in-memory values bit for
bit and reruns are byte-comparable.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .graphs import Graph
from .point_process import ParameterError, PointConfig, ProcessSpec, Window
from .resistor import ResistorNetwork
from .walk import WalkPath


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_points(path, config: PointConfig, spec: ProcessSpec | None = None) -> None:
    """points CSV (header x0,x1,...; Palm origin in the first row) plus a
    metadata JSON sidecar."""
    path = Path(path)
    d = config.dim
    lines = [",".join(f"x{k}" for k in range(d))]
    for p in config.points:
        lines.append(",".join(_fmt(v) for v in p))
    path.write_text("\n".join(lines) + "\n")
    meta = {
        "kind": spec.kind if spec else None,
        "lambda": spec.lam if spec else None,
        "mu": spec.mu if spec else None,
        "R": spec.R if spec else None,
        "window": {"lo": list(config.window.lo), "hi": list(config.window.hi),
                   "margin": config.window.margin},
        "seed": config.seed,
        "palm": config.palm,
    }
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_points(path) -> PointConfig:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
        rows = [[float(v) for v in line.split(",")] for line in fh if line.strip()]
    d = len(header)
    pts = np.asarray(rows, dtype=float).reshape(-1, d)
    meta_path = path.with_suffix(".json")
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
        w = meta["window"]
        window = Window(tuple(w["lo"]), tuple(w["hi"]), w.get("margin", 0.0))
        return PointConfig(window, pts, palm=bool(meta.get("palm", False)),
                           seed=meta.get("seed"))
    lo = pts.min(axis=0) if len(pts) else np.zeros(d)
    hi = pts.max(axis=0) if len(pts) else np.ones(d)
    pad = 1e-9 + 0.0 * lo
    return PointConfig(Window(tuple(lo - pad), tuple(hi + pad)), pts)


def write_edges(path, graph: Graph) -> None:
    """edges CSV (header i,j with i < j) plus graph metadata JSON."""
    path = Path(path)
    lines = ["i,j"] + [f"{i},{j}" for i, j in graph.edges]
    path.write_text("\n".join(lines) + "\n")
    meta = {"kind": graph.kind, "n_vertices": graph.n_vertices, "n_edges": graph.n_edges}
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_edges(path, n_vertices: int | None = None) -> Graph:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip()
        if header.split(",")[:2] != ["i", "j"]:
            raise ParameterError(f"edge file {path}: expected header 'i,j', got {header!r}")
        edges = [tuple(int(v) for v in line.split(",")) for line in fh if line.strip()]
    kind = "LOADED"
    meta_path = path.with_suffix(".json")
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
        kind = meta.get("kind", kind)
        n_vertices = n_vertices or meta.get("n_vertices")
    if n_vertices is None:
        n_vertices = 1 + max((max(e) for e in edges), default=-1)
    return Graph.from_edges(n_vertices, edges, kind)


def write_walk(path, walk: WalkPath, config: PointConfig) -> None:
    """walk CSV: t,vertex,x0,x1,... one row per jump; sidecar holds the
    truncation flag."""
    path = Path(path)
    d = config.dim
    header = "t,vertex," + ",".join(f"x{k}" for k in range(d))
    lines = [header]
    for t, v in zip(walk.times, walk.vertices):
        coords = ",".join(_fmt(c) for c in config.points[v])
        lines.append(f"{_fmt(t)},{int(v)},{coords}")
    path.write_text("\n".join(lines) + "\n")
    meta = {"start": int(walk.start), "t_end": walk.t_end, "truncated": walk.truncated,
            "n_jumps": walk.n_jumps}
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def write_msd(path, curve) -> None:
    """msd CSV: t, per-axis msd, per-axis stderr, survivor count."""
    path = Path(path)
    d = curve.dim
    header = ("t," + ",".join(f"msd_x{k}" for k in range(d)) + ","
              + ",".join(f"stderr_x{k}" for k in range(d)) + ",count")
    lines = [header]
    for k, t in enumerate(curve.times):
        vals = [_fmt(t)]
        vals += [_fmt(v) for v in curve.msd[k]]
        vals += [_fmt(v) for v in curve.stderr[k]]
        vals.append(str(int(curve.counts[k])))
        lines.append(",".join(vals))
    path.write_text("\n".join(lines) + "\n")


def write_network(path, net: ResistorNetwork, N: int | None = None,
                  r_c: float | None = None) -> None:
    """network CSV: i,j,c plus JSON header {n_nodes, source, sink, N, r_c}."""
    path = Path(path)
    lines = ["i,j,c"] + [f"{i},{j},{_fmt(c)}" for i, j, c in net.triples()]
    path.write_text("\n".join(lines) + "\n")
    meta = {"n_nodes": net.n_nodes, "source": sorted(net.source),
            "sink": sorted(net.sink), "N": N, "r_c": r_c}
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_network(path) -> ResistorNetwork:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip()
        if header.split(",")[:3] != ["i", "j", "c"]:
            raise ParameterError(f"network file {path}: expected header 'i,j,c', got {header!r}")
        edges = []
        for line in fh:
            if not line.strip():
                continue
            i, j, c = line.split(",")
            edges.append((int(i), int(j), float(c)))
    meta = json.loads(path.with_suffix(".json").read_text())
    return ResistorNetwork.from_triples(int(meta["n_nodes"]), edges,
                                        frozenset(meta["source"]), frozenset(meta["sink"]))


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
