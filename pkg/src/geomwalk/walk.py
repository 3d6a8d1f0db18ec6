"""Variable-speed random walk on a graph.

The walk waits at a vertex for an exponential time with rate equal to the
vertex degree, then jumps to a uniformly chosen neighbor (unit conductance on
every edge).  Equivalently: the discrete jump chain is the simple random walk
and the holding clocks are independent exponentials.

simulate_vsrw records full jump histories; run_displacement_ensemble is the
vectorized engine used for mean-squared-displacement estimation, advancing
many walkers jump-by-jump and recording displacements at a fixed time grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import Graph
from .point_process import ParameterError, PointConfig


class IsolatedVertexError(ValueError):
    """The walk is undefined from a vertex with no neighbors."""


@dataclass(frozen=True)
class WalkPath:
    """Ordered jump records of one trajectory: times[0] = 0 at the start
    vertex; vertices[k] is occupied on [times[k], times[k+1])."""

    times: np.ndarray
    vertices: np.ndarray
    t_end: float
    start: int
    truncated: bool = False

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.vertices, dtype=np.int64)
        if len(t) != len(v) or len(t) == 0:
            raise ParameterError("times and vertices must be congruent and nonempty")
        if t[0] != 0.0 or v[0] != self.start:
            raise ParameterError("path must begin with (0, start)")
        if np.any(np.diff(t) <= 0):
            raise ParameterError("jump times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "vertices", v)

    @property
    def n_jumps(self) -> int:
        return len(self.times) - 1


def _exp_holding(rng: np.random.Generator, rate: float) -> float:
    # inverse CDF on the open unit interval; never returns 0
    u = rng.random()
    while u == 0.0:
        u = rng.random()
    return -math.log(u) / rate


def simulate_vsrw(graph: Graph, config: PointConfig, start: int, t_max: float,
                  rng: np.random.Generator,
                  inner_lo=None, inner_hi=None) -> WalkPath:
    """Simulate one variable-speed random walk until t_max.

    If inner bounds are given, the path stops (flagged truncated) at the
    first jump onto a vertex outside [inner_lo, inner_hi].
    """
    if t_max <= 0:
        raise ParameterError("t_max must be positive")
    if graph.degree(start) == 0:
        raise IsolatedVertexError(f"start vertex {start} is isolated")
    coords = config.points
    check_inner = inner_lo is not None
    if check_inner:
        inner_lo = np.asarray(inner_lo, dtype=float)
        inner_hi = np.asarray(inner_hi, dtype=float)
    times = [0.0]
    verts = [start]
    t = 0.0
    v = start
    truncated = False
    while True:
        t = t + _exp_holding(rng, graph.degree(v))
        if t > t_max:
            break
        nbrs = graph.neighbors(v)
        v = int(nbrs[rng.integers(len(nbrs))])
        times.append(t)
        verts.append(v)
        if check_inner and (np.any(coords[v] < inner_lo) or np.any(coords[v] > inner_hi)):
            truncated = True
            break
    t_end = times[-1] if truncated else t_max
    return WalkPath(np.array(times), np.array(verts), float(t_end), start, truncated)


def jump_chain(graph: Graph, start: int, n_steps: int, rng: np.random.Generator) -> np.ndarray:
    """Discrete-time simple random walk: each step uniform over neighbors."""
    if graph.degree(start) == 0:
        raise IsolatedVertexError(f"start vertex {start} is isolated")
    out = np.empty(n_steps + 1, dtype=np.int64)
    out[0] = start
    v = start
    for k in range(1, n_steps + 1):
        nbrs = graph.neighbors(v)
        v = int(nbrs[rng.integers(len(nbrs))])
        out[k] = v
    return out


def position_at(path: WalkPath, config: PointConfig, t: float) -> np.ndarray:
    """Coordinates occupied at time t (right-continuous)."""
    if t < 0 or t > path.t_end:
        raise ParameterError("t outside [0, t_end]")
    k = int(np.searchsorted(path.times, t, side="right")) - 1
    return config.points[path.vertices[k]]


def displacement_from_jumps(path: WalkPath, config: PointConfig) -> np.ndarray:
    """Sum of the per-jump displacement vectors along the whole path."""
    pts = config.points[path.vertices]
    delta = np.diff(pts, axis=0)
    out = np.zeros(config.dim)
    for row in delta:
        out += row
    return out


@dataclass
class EnsembleResult:
    """Per-time accumulators over an ensemble of walkers.

    sum_sq / sum_quad hold running sums of x_a^2 and x_a^4 per axis;
    sum_cross holds x_a * x_b for axis pairs a < b (and its square);
    counts the surviving walkers per grid time.  positions[k] stores raw
    displacement vectors of survivors at times[k] when requested (NaN rows
    for censored walkers).
    """

    times: np.ndarray
    sum_sq: np.ndarray
    sum_quad: np.ndarray
    sum_cross: np.ndarray
    sum_cross_sq: np.ndarray
    counts: np.ndarray
    n_walkers: int
    positions: list | None = None

    def merge(self, other: "EnsembleResult") -> "EnsembleResult":
        if not np.array_equal(self.times, other.times):
            raise ParameterError("cannot merge ensembles on different grids")
        pos = None
        if self.positions is not None and other.positions is not None:
            pos = [np.vstack([a, b]) for a, b in zip(self.positions, other.positions)]
        return EnsembleResult(self.times, self.sum_sq + other.sum_sq,
                              self.sum_quad + other.sum_quad,
                              self.sum_cross + other.sum_cross,
                              self.sum_cross_sq + other.sum_cross_sq,
                              self.counts + other.counts,
                              self.n_walkers + other.n_walkers, pos)


def run_displacement_ensemble(graph: Graph, config: PointConfig, start: int,
                              times, n_walkers: int, rng: np.random.Generator,
                              inner_lo=None, inner_hi=None,
                              record_positions: bool = False) -> EnsembleResult:
    """Advance n_walkers independent VSRWs from `start`, recording squared
    displacements (per axis, plus cross moments) at the given time grid.

    A walker contributes at a grid time only if it has not yet left the
    inner window; on its first jump outside it is censored and contributes
    to no later time.
    """
    times = np.asarray(times, dtype=float)
    if len(times) == 0 or np.any(times <= 0) or np.any(np.diff(times) <= 0):
        raise ParameterError("times must be positive and strictly increasing")
    if graph.degree(start) == 0:
        raise IsolatedVertexError(f"start vertex {start} is isolated")
    coords = config.points
    d = config.dim
    n_times = len(times)
    offsets = graph.nbr_offsets
    flat = graph.nbr_flat
    degs = np.diff(offsets).astype(float)

    check_inner = inner_lo is not None
    if check_inner:
        inner_lo = np.asarray(inner_lo, dtype=float)
        inner_hi = np.asarray(inner_hi, dtype=float)

    pair_idx = [(a, b) for a in range(d) for b in range(a + 1, d)]
    sum_sq = np.zeros((n_times, d))
    sum_quad = np.zeros((n_times, d))
    sum_cross = np.zeros((n_times, max(len(pair_idx), 1)))
    sum_cross_sq = np.zeros((n_times, max(len(pair_idx), 1)))
    counts = np.zeros(n_times, dtype=np.int64)
    positions: list | None = None
    if record_positions:
        positions = [np.full((n_walkers, d), np.nan) for _ in range(n_times)]

    state = np.full(n_walkers, start, dtype=np.int64)
    t_now = np.zeros(n_walkers)
    t_next = np.zeros(n_walkers)
    rec_idx = np.zeros(n_walkers, dtype=np.int64)
    ids = np.arange(n_walkers)
    origin = coords[start].copy()
    alive = np.ones(n_walkers, dtype=bool)

    while np.any(alive):
        act = ids[alive]
        u = rng.random(len(act))
        u[u == 0.0] = 0.5  # probability-zero guard against log(0)
        t_next[act] = t_now[act] - np.log(u) / degs[state[act]]

        # record every grid time the pending jump passes over
        due = act[t_next[act] >= times[rec_idx[act]]]
        while len(due):
            k = rec_idx[due]
            disp = coords[state[due]] - origin
            for a in range(d):
                np.add.at(sum_sq[:, a], k, disp[:, a] ** 2)
                np.add.at(sum_quad[:, a], k, disp[:, a] ** 4)
            for c, (a, b) in enumerate(pair_idx):
                prod = disp[:, a] * disp[:, b]
                np.add.at(sum_cross[:, c], k, prod)
                np.add.at(sum_cross_sq[:, c], k, prod ** 2)
            np.add.at(counts, k, 1)
            if positions is not None:
                for kk in np.unique(k):
                    sel = due[k == kk]
                    positions[kk][sel] = coords[state[sel]] - origin
            rec_idx[due] += 1
            due = due[rec_idx[due] < n_times]
            if len(due):
                due = due[t_next[due] >= times[rec_idx[due]]]

        alive &= rec_idx < n_times
        act = ids[alive]
        if len(act) == 0:
            break

        u2 = rng.random(len(act))
        off = offsets[state[act]]
        deg_act = (offsets[state[act] + 1] - off).astype(float)
        pick = np.minimum((u2 * deg_act).astype(np.int64),
                          (deg_act - 1).astype(np.int64))
        state[act] = flat[off + pick]
        t_now[act] = t_next[act]
        if check_inner:
            outside = np.any((coords[state[act]] < inner_lo)
                             | (coords[state[act]] > inner_hi), axis=1)
            alive[act[outside]] = False

    return EnsembleResult(times, sum_sq, sum_quad, sum_cross, sum_cross_sq,
                          counts, n_walkers, positions)
