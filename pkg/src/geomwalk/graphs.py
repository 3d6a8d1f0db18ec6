"""Geometric graph builders over a point configuration.

Three families: the Delaunay triangulation (2-D, exact predicates), the
Gabriel graph (empty diametral ball), and the creek-crossing graphs G_n (an
edge survives unless some detour of at most n hops uses strictly shorter
steps).  For every point set the chain G_n ⊆ G_2 ⊆ Gabriel ⊆ Delaunay holds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .delaunay import DegenerateInputError, delaunay_edges
from .point_process import ParameterError, PointConfig


@dataclass(frozen=True)
class Graph:
    """Undirected graph over point indices, stored as a sorted edge array
    plus a CSR adjacency."""

    n_vertices: int
    edges: np.ndarray  # (m, 2) int64, i < j, lexicographically sorted
    kind: str
    nbr_offsets: np.ndarray  # (n+1,) int64
    nbr_flat: np.ndarray  # (2m,) int64

    @classmethod
    def from_edges(cls, n_vertices: int, edges, kind: str) -> "Graph":
        e = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if len(e):
            e = np.sort(e, axis=1)
            e = np.unique(e, axis=0)
            if np.any(e[:, 0] == e[:, 1]):
                raise ParameterError("self-loops are not allowed")
            if e.min() < 0 or e.max() >= n_vertices:
                raise ParameterError("edge endpoint out of range")
        both = np.concatenate([e, e[:, ::-1]]) if len(e) else np.empty((0, 2), np.int64)
        order = np.lexsort((both[:, 1], both[:, 0])) if len(both) else np.empty(0, np.int64)
        both = both[order]
        counts = np.bincount(both[:, 0], minlength=n_vertices) if len(both) else np.zeros(n_vertices, np.int64)
        offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        return cls(n_vertices, e, kind, offsets, both[:, 1].copy() if len(both) else np.empty(0, np.int64))

    def neighbors(self, v: int) -> np.ndarray:
        return self.nbr_flat[self.nbr_offsets[v]:self.nbr_offsets[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.nbr_offsets[v + 1] - self.nbr_offsets[v])

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.nbr_offsets)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_set(self) -> set[tuple[int, int]]:
        return set(map(tuple, self.edges.tolist()))


def delaunay(config: PointConfig) -> Graph:
    """Delaunay triangulation of a 2-D configuration.

    Fewer than three points yield the complete graph on them; collinear
    input raises DegenerateInputError.
    """
    if config.dim != 2:
        raise ParameterError("delaunay triangulation is implemented for dim 2")
    n = len(config)
    if n < 3:
        edges = [(0, 1)] if n == 2 else []
        return Graph.from_edges(n, edges, "DT")
    return Graph.from_edges(n, delaunay_edges(config.points), "DT")


def _gabriel_mask(points: np.ndarray, edges: np.ndarray, tree: cKDTree | None = None) -> np.ndarray:
    """For each candidate edge, True iff the open ball with that segment as
    diameter contains no other point.

    A count pre-screen settles most edges: the closed diametral ball holds
    only the endpoints exactly when its hit count is 2.
    """
    if tree is None:
        tree = cKDTree(points)
    mids = 0.5 * (points[edges[:, 0]] + points[edges[:, 1]])
    # inflate so both endpoints always land in the screen ball despite
    # rounding; the detailed test below stays strict
    radii = 0.5 * np.linalg.norm(points[edges[:, 0]] - points[edges[:, 1]], axis=1) * (1 + 1e-9)
    keep = np.ones(len(edges), dtype=bool)
    counts = tree.query_ball_point(mids, radii, return_length=True)
    pending = np.flatnonzero(counts > 2)
    if len(pending):
        hits = tree.query_ball_point(mids[pending], radii[pending])
        lens = np.fromiter((len(r) for r in hits), dtype=np.int64, count=len(hits))
        flat = np.concatenate([np.asarray(r, dtype=np.int64) for r in hits])
        eidx = np.repeat(pending, lens)
        cand = points[flat]
        # strict interior of the diametral ball: obtuse angle at the candidate
        inner = np.einsum("ij,ij->i", cand - points[edges[eidx, 0]],
                          cand - points[edges[eidx, 1]])
        blocked = (inner < 0.0) & (flat != edges[eidx, 0]) & (flat != edges[eidx, 1])
        keep[np.unique(eidx[blocked])] = False
    return keep


def gabriel(config: PointConfig) -> Graph:
    """Gabriel graph: edge iff the open diametral ball is empty.

    In 2-D it is computed by filtering Delaunay edges; in other dimensions
    (or for collinear 2-D input) by a direct kd-tree test over all pairs.
    """
    n = len(config)
    if n < 2:
        return Graph.from_edges(n, [], "GABRIEL")
    points = config.points
    if config.dim == 2:
        try:
            candidates = delaunay_edges(points)
        except DegenerateInputError:
            candidates = _all_pairs(n)
    else:
        candidates = _all_pairs(n)
    keep = _gabriel_mask(points, candidates)
    return Graph.from_edges(n, candidates[keep], "GABRIEL")


def _all_pairs(n: int) -> np.ndarray:
    i, j = np.triu_indices(n, k=1)
    return np.stack([i, j], axis=1).astype(np.int64)


def creek_crossing(config: PointConfig, n: int) -> Graph:
    """Creek-crossing graph G_n: an edge {x, y} survives iff no path of at
    most n hops joins x to y with every hop strictly shorter than |x - y|.

    Candidates are Gabriel edges (any pair outside the Gabriel graph is
    already killed by a two-hop detour through its diametral ball, so
    G_n ⊆ Gabriel for n >= 2).  The detour search is a depth-limited DFS over
    points returned by a kd-tree range query around the edge midpoint.
    """
    if n < 2:
        raise ParameterError("creek-crossing parameter n must be >= 2")
    base = gabriel(config)
    points = config.points
    if base.n_edges == 0:
        return Graph.from_edges(len(config), [], f"CREEK({n})")
    tree = cKDTree(points)
    if n == 2:
        keep = _two_hop_survivors(points, tree, base.edges)
    else:
        keep = np.array([not _has_short_detour(points, tree, int(i), int(j), n)
                         for i, j in base.edges])
    return Graph.from_edges(len(config), base.edges[keep], f"CREEK({n})")


def _two_hop_survivors(points: np.ndarray, tree: cKDTree, edges: np.ndarray) -> np.ndarray:
    """Vectorized n = 2 test: an edge dies iff some point is strictly closer
    than the edge length to both endpoints (any such point lies in the lens
    around the midpoint, radius sqrt(3)/2 times the length).  Edges whose
    lens ball holds only the endpoints survive without a detailed check."""
    pi = points[edges[:, 0]]
    pj = points[edges[:, 1]]
    lengths = np.linalg.norm(pj - pi, axis=1)
    mids = 0.5 * (pi + pj)
    radii = lengths * (math.sqrt(3.0) / 2.0 + 1e-12)
    keep = np.ones(len(edges), dtype=bool)
    counts = tree.query_ball_point(mids, radii, return_length=True)
    pending = np.flatnonzero(counts > 2)
    if len(pending):
        hits = tree.query_ball_point(mids[pending], radii[pending])
        lens = np.fromiter((len(r) for r in hits), dtype=np.int64, count=len(hits))
        flat = np.concatenate([np.asarray(r, dtype=np.int64) for r in hits])
        eidx = np.repeat(pending, lens)
        cand = points[flat]
        di = np.linalg.norm(cand - points[edges[eidx, 0]], axis=1)
        dj = np.linalg.norm(cand - points[edges[eidx, 1]], axis=1)
        blocked = ((di < lengths[eidx]) & (dj < lengths[eidx])
                   & (flat != edges[eidx, 0]) & (flat != edges[eidx, 1]))
        keep[np.unique(eidx[blocked])] = False
    return keep


def _has_short_detour(points: np.ndarray, tree: cKDTree, i: int, j: int, n: int) -> bool:
    """True iff some path i -> j of at most n hops uses only hops strictly
    shorter than |i - j|."""
    pi, pj = points[i], points[j]
    length = float(np.linalg.norm(pj - pi))
    mid = 0.5 * (pi + pj)
    local = tree.query_ball_point(mid, n * length)
    local = [h for h in local if h != i and h != j]
    if not local:
        return False
    cand = points[local]
    d_to_j = np.linalg.norm(cand - pj, axis=1)

    # fail[u] = smallest remaining-hop budget already known to be hopeless
    fail: dict[int, int] = {}

    def dfs(u_pos: np.ndarray, u_key: int, hops_left: int) -> bool:
        if float(np.linalg.norm(pj - u_pos)) < length:
            return True
        if hops_left <= 1:
            return False
        if fail.get(u_key, 0) >= hops_left:
            return False
        d_here = np.linalg.norm(cand - u_pos, axis=1)
        for k in np.flatnonzero((d_here < length) & (d_to_j < (hops_left - 1) * length)):
            if dfs(cand[k], local[k], hops_left - 1):
                return True
        fail[u_key] = max(fail.get(u_key, 0), hops_left)
        return False

    return dfs(pi, i, n)


def voronoi_nucleus(config: PointConfig, location) -> int:
    """Index of the configuration point nearest to the location (the nucleus
    of the Voronoi cell containing it); ties break to the lowest index."""
    if len(config) == 0:
        raise ParameterError("voronoi_nucleus requires a nonempty configuration")
    loc = np.asarray(location, dtype=float)
    d2 = np.sum((config.points - loc) ** 2, axis=1)
    return int(np.argmin(d2))


@dataclass(frozen=True)
class DegreeStats:
    histogram: dict[int, int]
    moments: tuple[float, ...]  # k-th empirical moments, k = 1..8
    max_incident_length: np.ndarray  # per vertex; 0 for isolated vertices
    tail: dict[int, float]  # D -> empirical P[deg >= D]


def degree_stats(graph: Graph, config: PointConfig) -> DegreeStats:
    """Degree histogram, moments up to order 8, per-vertex maximum incident
    edge length, and degree tail frequencies."""
    degs = graph.degrees
    hist = {int(d): int(c) for d, c in zip(*np.unique(degs, return_counts=True))}
    moments = tuple(float(np.mean(degs.astype(float) ** k)) if len(degs) else 0.0
                    for k in range(1, 9))
    maxlen = np.zeros(graph.n_vertices)
    if graph.n_edges:
        lengths = np.linalg.norm(config.points[graph.edges[:, 0]] - config.points[graph.edges[:, 1]], axis=1)
        np.maximum.at(maxlen, graph.edges[:, 0], lengths)
        np.maximum.at(maxlen, graph.edges[:, 1], lengths)
    dmax = int(degs.max()) if len(degs) else 0
    nv = max(graph.n_vertices, 1)
    tail = {D: float(np.sum(degs >= D)) / nv for D in range(dmax + 2)}
    return DegreeStats(hist, moments, maxlen, tail)
