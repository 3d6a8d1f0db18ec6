"""Electrical networks: the periodized medium, effective conductance, and the
diffusion-conductance identity.

The periodized medium over a configuration spanning [-N, N]^d keeps graph
edges of Euclidean length at most r_c inside the open cube (conductance 1),
attaches every point of the two boundary slabs to every integer lattice point
of the corresponding face (conductance 1/#face), and identifies opposite face
points pairwise.  The walk on the identified network winds; its accumulated
first-coordinate increments have a long-time quadratic rate equal to
8 N^2 kappa / #nodes, where kappa is the effective conductance between the
faces of the unidentified network.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import cg

from .graphs import Graph
from .point_process import ParameterError, PointConfig


@dataclass(frozen=True)
class ResistorNetwork:
    """Weighted undirected graph with electrode node sets.

    Edges are stored as parallel arrays (endpoints and strictly positive
    conductances); parallel duplicates are legal and add up.
    """

    n_nodes: int
    edges_i: np.ndarray
    edges_j: np.ndarray
    cond: np.ndarray
    source: frozenset
    sink: frozenset

    def __post_init__(self):
        i = np.asarray(self.edges_i, dtype=np.int64)
        j = np.asarray(self.edges_j, dtype=np.int64)
        c = np.asarray(self.cond, dtype=float)
        if not (len(i) == len(j) == len(c)):
            raise ParameterError("edge arrays must be congruent")
        if len(c) and (np.any(c <= 0) or np.any(i == j)
                       or i.min() < 0 or j.min() < 0
                       or max(i.max(), j.max()) >= self.n_nodes):
            raise ParameterError("edges need positive conductance, no self-loops, "
                                 "endpoints in range")
        object.__setattr__(self, "edges_i", i)
        object.__setattr__(self, "edges_j", j)
        object.__setattr__(self, "cond", c)
        object.__setattr__(self, "source", frozenset(int(s) for s in self.source))
        object.__setattr__(self, "sink", frozenset(int(s) for s in self.sink))
        if not self.source or not self.sink or (self.source & self.sink):
            raise ParameterError("source and sink must be nonempty and disjoint")

    @classmethod
    def from_triples(cls, n_nodes: int, triples, source, sink) -> "ResistorNetwork":
        triples = list(triples)
        i = np.array([t[0] for t in triples], dtype=np.int64)
        j = np.array([t[1] for t in triples], dtype=np.int64)
        c = np.array([t[2] for t in triples], dtype=float)
        return cls(n_nodes, i, j, c, frozenset(source), frozenset(sink))

    @property
    def n_edges(self) -> int:
        return len(self.cond)

    def triples(self) -> list[tuple[int, int, float]]:
        return [(int(a), int(b), float(c)) for a, b, c
                in zip(self.edges_i, self.edges_j, self.cond)]

    def drop_edge(self, k: int) -> "ResistorNetwork":
        keep = np.ones(self.n_edges, dtype=bool)
        keep[k] = False
        return ResistorNetwork(self.n_nodes, self.edges_i[keep], self.edges_j[keep],
                               self.cond[keep], self.source, self.sink)


@dataclass(frozen=True)
class DirichletSolution:
    potential: np.ndarray
    kappa: float
    residual: float
    iterations: int
    connected: bool  # some component holds both a source and a sink node
    source_current: float
    sink_current: float


def dirichlet_solve(net: ResistorNetwork, rtol: float = 1e-10) -> DirichletSolution:
    """Solve the Dirichlet problem (potential 0 on the source set, 1 on the
    sink set) by Jacobi-preconditioned conjugate gradient and return the
    potential together with the Dirichlet energy kappa.

    Nodes in components that touch neither electrode keep potential 0 (they
    carry no current).  When no component holds both a source and a sink
    node, the current is zero and the solution is flagged disconnected.
    """
    n = net.n_nodes
    ei, ej, c = net.edges_i, net.edges_j, net.cond
    u = np.zeros(n)
    src = np.fromiter(net.source, dtype=np.int64)
    snk = np.fromiter(net.sink, dtype=np.int64)
    u[snk] = 1.0
    fixed = np.zeros(n, dtype=bool)
    fixed[src] = True
    fixed[snk] = True

    if len(c):
        adj = sp.coo_matrix((np.ones(len(c)), (ei, ej)), shape=(n, n))
        _, comp = connected_components(adj, directed=False)
    else:
        comp = np.arange(n)
    live = np.zeros(n, dtype=bool)
    live[np.isin(comp, comp[src])] = True
    live[np.isin(comp, comp[snk])] = True
    connected = bool(set(comp[src]) & set(comp[snk]))

    free = np.flatnonzero(~fixed & live)
    iterations = 0
    residual = 0.0
    if len(free) and len(c):
        pos = -np.ones(n, dtype=np.int64)
        pos[free] = np.arange(len(free))
        fi, fj = pos[ei], pos[ej]
        diag = np.zeros(len(free))
        np.add.at(diag, fi[fi >= 0], c[fi >= 0])
        np.add.at(diag, fj[fj >= 0], c[fj >= 0])
        both = (fi >= 0) & (fj >= 0)
        rows = np.concatenate([fi[both], fj[both], np.arange(len(free))])
        cols = np.concatenate([fj[both], fi[both], np.arange(len(free))])
        vals = np.concatenate([-c[both], -c[both], diag])
        A = sp.csr_matrix(sp.coo_matrix((vals, (rows, cols)),
                                        shape=(len(free), len(free))))
        b = np.zeros(len(free))
        only_i = (fi >= 0) & (fj < 0)
        np.add.at(b, fi[only_i], c[only_i] * u[ej[only_i]])
        only_j = (fj >= 0) & (fi < 0)
        np.add.at(b, fj[only_j], c[only_j] * u[ei[only_j]])
        M = sp.diags(1.0 / diag)
        count = [0]

        def _tick(_xk):
            count[0] += 1

        x, info = cg(A, b, rtol=rtol, atol=0.0, maxiter=max(10 * n, 100),
                     M=M, callback=_tick)
        if info != 0:
            raise RuntimeError(f"conjugate gradient failed to converge (info={info})")
        u[free] = x
        residual = float(np.linalg.norm(A @ x - b) / (np.linalg.norm(b) or 1.0))
        iterations = count[0]

    du = u[ej] - u[ei] if len(c) else np.zeros(0)
    kappa = float(np.sum(c * du * du))
    in_src_i = np.isin(ei, src)
    in_src_j = np.isin(ej, src)
    cur_src = float(np.sum(c[in_src_i] * du[in_src_i])
                    - np.sum(c[in_src_j] * du[in_src_j]))
    in_snk_i = np.isin(ei, snk)
    in_snk_j = np.isin(ej, snk)
    cur_snk = float(-np.sum(c[in_snk_i] * du[in_snk_i])
                    + np.sum(c[in_snk_j] * du[in_snk_j]))
    if not connected:
        kappa = 0.0
    return DirichletSolution(u, kappa, residual, iterations, connected,
                             cur_src, cur_snk)


def effective_conductance(net: ResistorNetwork, rtol: float = 1e-10) -> float:
    """Effective conductance between the electrode sets: the Dirichlet energy
    of the unit-potential solution (0 when the electrodes are disconnected)."""
    return dirichlet_solve(net, rtol).kappa


def dirichlet_energy(net: ResistorNetwork, potential: np.ndarray) -> float:
    """Energy of an arbitrary potential (for optimality checks)."""
    u = np.asarray(potential, dtype=float)
    du = u[net.edges_j] - u[net.edges_i]
    return float(np.sum(net.cond * du * du))


def series_parallel_oracle(net: ResistorNetwork) -> float | None:
    """Exact conductance by series/parallel reduction, or None when the
    network does not reduce to a single equivalent edge.

    Electrode sets are first merged into single terminals (they are
    equipotential), then parallel edges merge, degree-2 interior nodes
    contract, and dangling interior branches are pruned.
    """
    SRC, SNK = -1, -2
    relabel = {}
    for s in net.source:
        relabel[s] = SRC
    for s in net.sink:
        relabel[s] = SNK
    adj: dict[int, dict[int, float]] = {}

    def add_edge(a, b, c):
        if a == b:
            return
        adj.setdefault(a, {})
        adj.setdefault(b, {})
        adj[a][b] = adj[a].get(b, 0.0) + c  # parallel law
        adj[b][a] = adj[a][b]

    for i, j, c in net.triples():
        add_edge(relabel.get(i, i), relabel.get(j, j), c)
    if SRC not in adj or SNK not in adj:
        return 0.0

    changed = True
    while changed:
        changed = False
        for v in list(adj.keys()):
            if v in (SRC, SNK) or v not in adj:
                continue
            nbrs = adj[v]
            if len(nbrs) == 1:  # dangling branch: carries no current
                (w,) = nbrs
                del adj[w][v]
                del adj[v]
                changed = True
            elif len(nbrs) == 2:  # series law
                (a, ca), (b, cb) = nbrs.items()
                del adj[a][v]
                del adj[b][v]
                del adj[v]
                add_edge(a, b, 1.0 / (1.0 / ca + 1.0 / cb))
                changed = True
    live = {v for v in adj if adj[v]}
    if live == {SRC, SNK} and SNK in adj[SRC]:
        return float(adj[SRC][SNK])
    if not live:
        return 0.0
    return None


@dataclass(frozen=True)
class PeriodizedNetwork:
    """Periodized medium: the unidentified two-face network (for the
    conductance solve) plus the identified walk graph with per-edge winding
    increments along the first axis."""

    base: ResistorNetwork
    N: int
    r_c: float
    interior_points: np.ndarray     # coordinates of the interior nodes
    interior_index: np.ndarray      # interior node k <- configuration point index
    n_interior: int
    n_gamma: int                    # identified face nodes
    # identified walk graph (interior nodes first, then gamma nodes)
    walk_offsets: np.ndarray
    walk_nbr: np.ndarray
    walk_cond: np.ndarray
    walk_d1: np.ndarray
    slab_flags: np.ndarray          # -1 (left slab), +1 (right slab), 0 otherwise

    @property
    def n_nodes_identified(self) -> int:
        return self.n_interior + self.n_gamma


def gamma_face_count(N: int, dim: int) -> int:
    """Number of integer lattice points of one face: first coordinate fixed,
    the others strictly between -N and N."""
    return (2 * N - 1) ** (dim - 1)


def build_periodized(config: PointConfig, N: int, r_c: float,
                     graph_kind: str = "dt", graph: Graph | None = None) -> PeriodizedNetwork:
    """Build the periodized medium over a configuration spanning [-N, N]^d.

    Interior edges are the graph edges with both endpoints inside the open
    cube and length at most r_c (conductance 1).  Every point with first
    coordinate within r_c of a face connects to every integer lattice point
    of that face with conductance 1/#face; opposite face points are
    identified pairwise in the walk graph.

    N must be an integer with N > 2 r_c, which keeps the two slabs disjoint
    with an insulating band between them.
    """
    if int(N) != N or N <= 0:
        raise ParameterError("N must be a positive integer (the faces carry "
                             "integer lattice points)")
    N = int(N)
    if not (N > 2 * r_c):
        raise ParameterError("require N > 2 r_c so the electrode slabs are disjoint")
    from .diffusion import build_graph

    d = config.dim
    pts = config.points
    if graph is None:
        graph = build_graph(config, graph_kind)

    inside = np.all((pts > -N) & (pts < N), axis=1) if len(pts) else np.zeros(0, bool)
    interior_idx = np.flatnonzero(inside)
    remap = -np.ones(len(pts), dtype=np.int64)
    remap[interior_idx] = np.arange(len(interior_idx))
    q = pts[interior_idx]
    nq = len(q)

    if graph.n_edges:
        lengths = np.linalg.norm(pts[graph.edges[:, 0]] - pts[graph.edges[:, 1]], axis=1)
        keep = inside[graph.edges[:, 0]] & inside[graph.edges[:, 1]] & (lengths <= r_c)
        int_i = remap[graph.edges[keep, 0]]
        int_j = remap[graph.edges[keep, 1]]
    else:
        int_i = np.empty(0, dtype=np.int64)
        int_j = np.empty(0, dtype=np.int64)

    n_gamma = gamma_face_count(N, d)
    x1 = q[:, 0] if nq else np.empty(0)
    left_slab = np.flatnonzero(x1 <= -N + r_c) if nq else np.empty(0, np.int64)
    right_slab = np.flatnonzero(x1 >= N - r_c) if nq else np.empty(0, np.int64)
    slab_flags = np.zeros(nq, dtype=np.int8)
    slab_flags[left_slab] = -1
    slab_flags[right_slab] = 1
    c_gamma = 1.0 / n_gamma

    # unidentified network: interior 0..nq-1, left face next, right face last
    gl = np.arange(nq, nq + n_gamma)
    gr = np.arange(nq + n_gamma, nq + 2 * n_gamma)
    el_i = np.concatenate([np.repeat(left_slab, n_gamma), np.repeat(right_slab, n_gamma)])
    el_j = np.concatenate([np.tile(gl, len(left_slab)), np.tile(gr, len(right_slab))])
    base = ResistorNetwork(
        nq + 2 * n_gamma,
        np.concatenate([int_i, el_i]),
        np.concatenate([int_j, el_j]),
        np.concatenate([np.ones(len(int_i)), np.full(len(el_i), c_gamma)]),
        frozenset(gl.tolist()), frozenset(gr.tolist()))

    # identified walk graph: interior 0..nq-1, then the identified face nodes
    g_id = np.arange(nq, nq + n_gamma)
    d1_int = q[int_j, 0] - q[int_i, 0] if len(int_i) else np.empty(0)
    slabs = np.concatenate([left_slab, right_slab]).astype(np.int64)
    d1_from_gamma = np.where(slab_flags[slabs] < 0, q[slabs, 0] + N, q[slabs, 0] - N) \
        if len(slabs) else np.empty(0)
    e_s = np.repeat(slabs, n_gamma)
    e_g = np.tile(g_id, len(slabs))
    e_d1 = np.repeat(d1_from_gamma, n_gamma)

    half_u = np.concatenate([int_i, int_j, e_s, e_g])
    half_v = np.concatenate([int_j, int_i, e_g, e_s])
    half_c = np.concatenate([np.ones(2 * len(int_i)),
                             np.full(2 * len(e_s), c_gamma)])
    half_d1 = np.concatenate([d1_int, -d1_int, -e_d1, e_d1])
    order = np.argsort(half_u, kind="stable")
    half_u = half_u[order]
    counts = np.bincount(half_u, minlength=nq + n_gamma)
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return PeriodizedNetwork(base, N, float(r_c), q, interior_idx, nq, n_gamma,
                             offsets, half_v[order], half_c[order], half_d1[order],
                             slab_flags)


def diffusion_from_conductance(net: PeriodizedNetwork, kappa: float) -> float:
    """Diffusion constant of the periodized walk from the effective
    conductance: 8 N^2 kappa / #identified nodes."""
    if kappa < 0:
        raise ParameterError("kappa must be nonnegative")
    return 8.0 * net.N ** 2 * kappa / net.n_nodes_identified


def msd_on_network(net: PeriodizedNetwork, t: float, n_samples: int,
                   rng: np.random.Generator, block: int = 25000) -> tuple[float, float]:
    """Monte Carlo rate (1/t) E[(winding at t)^2] for the walk on the
    identified network started from the uniform distribution.

    The winding is the running sum of per-jump first-coordinate increments;
    positions alone cannot see face crossings.
    """
    if t <= 0:
        raise ParameterError("t must be positive")
    n_nodes = net.n_nodes_identified
    rates = np.zeros(n_nodes)
    np.add.at(rates, np.repeat(np.arange(n_nodes), np.diff(net.walk_offsets)),
              net.walk_cond)

    # flat cumulative keys: node v's edge block maps into [v, v+1)
    cum = np.zeros(len(net.walk_cond))
    for v in range(n_nodes):
        a, b = net.walk_offsets[v], net.walk_offsets[v + 1]
        if b > a:
            local = np.cumsum(net.walk_cond[a:b])
            cum[a:b] = v + local / local[-1]

    winding_sq_sum = 0.0
    winding_quad_sum = 0.0
    done = 0
    while done < n_samples:
        m = min(block, n_samples - done)
        w = _winding_block(net, rates, cum, t, m, rng)
        winding_sq_sum += float(np.sum(w ** 2))
        winding_quad_sum += float(np.sum(w ** 4))
        done += m
    mean_sq = winding_sq_sum / n_samples
    var = max(winding_quad_sum / n_samples - mean_sq ** 2, 0.0)
    stderr = math.sqrt(var / n_samples)
    return mean_sq / t, stderr / t


def _winding_block(net: PeriodizedNetwork, rates, cum, t, m, rng) -> np.ndarray:
    n_nodes = net.n_nodes_identified
    state = rng.integers(n_nodes, size=m)
    t_now = np.zeros(m)
    winding = np.zeros(m)
    active = np.arange(m)
    nbr = net.walk_nbr
    d1 = net.walk_d1
    while len(active):
        r = rates[state[active]]
        u = rng.random(len(active))
        u[u == 0.0] = 0.5
        with np.errstate(divide="ignore"):
            dt = -np.log(u) / r
        t_next = t_now[active] + dt
        live = t_next <= t
        act = active[live]
        t_now[act] = t_next[live]
        if len(act) == 0:
            break
        u2 = rng.random(len(act))
        target = state[act] + u2  # lands in [v, v+1): index into the flat keys
        e = np.searchsorted(cum, target, side="left")
        winding[act] += d1[e]
        state[act] = nbr[e]
        active = act
    return winding


def crossing_lower_bound(net: PeriodizedNetwork, paths: list[list[int]],
                         tol: float = 1e-8) -> float:
    """Lower bound sum(1/length) from face-to-face paths through interior
    nodes, validated against the Dirichlet solve.

    Each path is a list of interior node indices: the first must lie in the
    left slab, the last in the right slab, consecutive nodes must share an
    interior edge, and paths must be vertex-disjoint.  The implied length
    counts the two electrode hops, so a path on k nodes has length k + 1.
    By Rayleigh monotonicity the bound never exceeds the effective
    conductance; a violation raises.
    """
    interior_adj: dict[int, set[int]] = {}
    for v in set(v for path in paths for v in path):
        a, b = net.walk_offsets[v], net.walk_offsets[v + 1]
        interior_adj[v] = {int(w) for w in net.walk_nbr[a:b] if w < net.n_interior}
    seen: set[int] = set()
    total = 0.0
    for path in paths:
        if not path:
            raise ParameterError("empty path")
        if net.slab_flags[path[0]] >= 0 or net.slab_flags[path[-1]] <= 0:
            raise ParameterError("paths must run from the left slab to the right slab")
        for v in path:
            if v in seen:
                raise ParameterError("paths must be vertex-disjoint")
            seen.add(v)
        for a, b in zip(path[:-1], path[1:]):
            if b not in interior_adj[a]:
                raise ParameterError(f"({a},{b}) is not an interior edge of the network")
        total += 1.0 / (len(path) + 1)
    kappa = effective_conductance(net.base)
    if total > kappa + tol:
        raise AssertionError(
            f"crossing bound {total} exceeds effective conductance {kappa}")
    return total
