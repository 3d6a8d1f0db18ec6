"""Good-box discretization and left-right crossing counting.

Space is cut into side-K boxes.  A box is *nice* when its point count is at
most c2 K^d and every one of its alpha_d^d sub-boxes (alpha_d = 4 ceil(sqrt d)
+ 5) holds a point; it is *good* when it is nice and, toward every adjacent
box, the local graph-connectivity events along the joining segment hold.
Good boxes admit a reference vertex (the nucleus of the Voronoi cell of the
box center) and short inter-box paths, which is what lets lattice percolation
crossings transfer to graph crossings.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .graphs import Graph, voronoi_nucleus
from .maxflow import count_slice_crossings
from .parallel import parallel_map
from .point_process import ParameterError, PointConfig, ProcessSpec, Window, sample
from .rng import child_rng

#: literature estimate of the critical probability of site percolation on the
#: square lattice; configurable wherever a verdict is reported
SQUARE_SITE_PERCOLATION_THRESHOLD = 0.592746


def alpha_subdivision(dim: int) -> int:
    """Number of sub-boxes per axis: 4 ceil(sqrt(dim)) + 5 (odd, so the
    central sub-box is centered on the box center)."""
    return 4 * math.ceil(math.sqrt(dim)) + 5


def segment_subbox_count(dim: int) -> int:
    """Sub-boxes along the half segment covered by one box's own events."""
    return 2 * math.ceil(math.sqrt(dim)) + 3


def goodness_margin(K: float, dim: int, n: int) -> float:
    """Sampling margin beyond the origin box that makes its goodness decision
    exact: the farthest event center plus the event cube plus the reach of
    the creek-crossing edge decisions inside it (detour witnesses lie within
    (n - 1) hop lengths of an endpoint)."""
    s = K / alpha_subdivision(dim)
    rd = math.sqrt(dim)
    cube_diam = 2 * (1 + rd) * s * rd
    reach = (segment_subbox_count(dim) - 1) * s + (1 + rd) * s + (n - 1) * cube_diam
    return max(reach - K / 2.0, 0.0)


@dataclass
class BoxGrid:
    """Lattice of side-K boxes with nice/good flags.

    Boxes are indexed by integer lattice vectors z (box = K z + [-K/2, K/2]^d,
    half-open on the upper side for counting).  ref_vertex holds the per-good-
    box reference vertex once classified.
    """

    K: float
    c2: float
    z_lo: np.ndarray
    z_hi: np.ndarray  # inclusive
    nice: dict
    good: dict
    ref_vertex: dict
    n: int | None = None  # creek-crossing parameter once good was classified

    @property
    def dim(self) -> int:
        return len(self.z_lo)

    @property
    def sub_side(self) -> float:
        return self.K / alpha_subdivision(self.dim)

    def z_iter(self):
        ranges = [range(int(self.z_lo[a]), int(self.z_hi[a]) + 1) for a in range(self.dim)]
        out = [()]
        for r in ranges:
            out = [z + (i,) for z in out for i in r]
        return out

    def check_good_implies_nice(self) -> bool:
        return all(self.nice.get(z, False) for z, g in self.good.items() if g)


def _box_of(points: np.ndarray, K: float) -> np.ndarray:
    # half-open convention: box z owns [Kz - K/2, Kz + K/2)
    return np.floor(points / K + 0.5).astype(np.int64)


def classify_nice(config: PointConfig, K: float, c2: float,
                  z_lo=None, z_hi=None) -> BoxGrid:
    """Classify boxes as nice: count at most c2 K^d and every sub-box of side
    K / alpha_d occupied.

    The classified lattice range defaults to the boxes fully inside the
    window core.
    """
    if K <= 0 or c2 <= 0:
        raise ParameterError("require K > 0 and c2 > 0")
    d = config.dim
    alpha = alpha_subdivision(d)
    if z_lo is None or z_hi is None:
        lo = np.asarray(config.window.lo, dtype=float)
        hi = np.asarray(config.window.hi, dtype=float)
        z_lo = np.ceil((lo + K / 2) / K).astype(np.int64)
        z_hi = np.floor((hi - K / 2) / K).astype(np.int64)
        if np.any(z_hi < z_lo):
            raise ParameterError("window holds no complete box at this K")
    z_lo = np.asarray(z_lo, dtype=np.int64)
    z_hi = np.asarray(z_hi, dtype=np.int64)
    grid = BoxGrid(float(K), float(c2), z_lo, z_hi, {}, {}, {})

    pts = config.points
    box_idx = _box_of(pts, K) if len(pts) else np.empty((0, d), np.int64)
    by_box: dict[tuple, list[int]] = {}
    for i, z in enumerate(map(tuple, box_idx)):
        by_box.setdefault(z, []).append(i)
    s = K / alpha
    limit = c2 * K ** d
    for z in grid.z_iter():
        members = by_box.get(z, [])
        if not members or len(members) > limit:
            grid.nice[z] = False
            continue
        local = pts[members] - (np.asarray(z, float) * K - K / 2.0)
        sub = np.clip((local / s).astype(np.int64), 0, alpha - 1)
        occupied = set(map(tuple, sub))
        grid.nice[z] = len(occupied) == alpha ** d
    return grid


def _neighbor_dirs(dim: int):
    """All lattice directions with sup-norm 1 (includes diagonals)."""
    from itertools import product

    return [u for u in product((-1, 0, 1), repeat=dim) if any(u)]


def segment_subbox_centers(K: float, dim: int, z1, z2) -> list[np.ndarray]:
    """Centers of the sub-boxes met by the segment from box center K z1 to
    neighbor center K z2: c_i = K z1 + (i - 1) s u, i = 1 .. alpha_d + 1."""
    alpha = alpha_subdivision(dim)
    s = K / alpha
    u = np.asarray(z2, float) - np.asarray(z1, float)
    base = np.asarray(z1, float) * K
    return [base + i * s * u for i in range(alpha + 1)]


def _event_holds(points: np.ndarray, tree: cKDTree, graph: Graph,
                 center: np.ndarray, half_vertex: float, half_path: float) -> bool:
    """Connectivity event at a sub-box center: all graph vertices inside the
    vertex cube are joined inside the doubled cube.

    Decided by breadth-first search on the graph restricted to the doubled
    cube.  An empty or single-vertex cube passes vacuously.
    """
    idx = tree.query_ball_point(center, half_vertex * math.sqrt(len(center)) + 1e-12, p=2)
    inside_vertex = [i for i in idx
                     if np.all(np.abs(points[i] - center) <= half_vertex)]
    if len(inside_vertex) < 2:
        return True
    allowed_idx = tree.query_ball_point(center, half_path * math.sqrt(len(center)) + 1e-12, p=2)
    allowed = {i for i in allowed_idx
               if np.all(np.abs(points[i] - center) <= half_path)}
    targets = set(inside_vertex)
    start = inside_vertex[0]
    seen = {start}
    stack = [start]
    found = {start} & targets
    while stack:
        v = stack.pop()
        for w in graph.neighbors(v):
            w = int(w)
            if w in allowed and w not in seen:
                seen.add(w)
                stack.append(w)
                if w in targets:
                    found.add(w)
    return len(found) == len(targets)


def classify_good(config: PointConfig, grid: BoxGrid, n: int,
                  graph: Graph | None = None) -> BoxGrid:
    """Classify boxes as good: nice, and for every sup-norm-adjacent lattice
    direction the connectivity events hold at the first 2 ceil(sqrt d) + 3
    sub-box centers along the segment toward the neighbor.

    Each event asks that any two creek-crossing vertices in the cube of side
    (1 + sqrt d) s centered at the sub-box center be joined by a graph path
    inside the doubled cube.  The creek-crossing graph is built over the
    whole configuration unless one is supplied.
    """
    if n < 2:
        raise ParameterError("creek-crossing parameter n must be >= 2")
    if graph is None:
        from .graphs import creek_crossing

        graph = creek_crossing(config, n)
    d = grid.dim
    s = grid.sub_side
    half_vertex = (1 + math.sqrt(d)) * s / 2.0
    half_path = (1 + math.sqrt(d)) * s
    m = segment_subbox_count(d)
    pts = config.points
    tree = cKDTree(pts) if len(pts) else None
    grid.n = n
    for z in grid.z_iter():
        if not grid.nice.get(z, False):
            grid.good[z] = False
            continue
        ok = True
        for u in _neighbor_dirs(d):
            z2 = tuple(np.asarray(z) + np.asarray(u))
            centers = segment_subbox_centers(grid.K, d, z, z2)[:m]
            for c in centers:
                if not _event_holds(pts, tree, graph, c, half_vertex, half_path):
                    ok = False
                    break
            if not ok:
                break
        grid.good[z] = ok
        if ok:
            grid.ref_vertex[z] = voronoi_nucleus(config, np.asarray(z, float) * grid.K)
    return grid


def reference_vertex(config: PointConfig, grid: BoxGrid, z) -> int:
    """Reference vertex of a good box: the nucleus of the Voronoi cell of the
    box center.  For a nice box it always lies inside the box."""
    z = tuple(int(a) for a in z)
    if not grid.good.get(z, False):
        raise ParameterError(f"box {z} is not good")
    if z in grid.ref_vertex:
        return grid.ref_vertex[z]
    v = voronoi_nucleus(config, np.asarray(z, float) * grid.K)
    grid.ref_vertex[z] = v
    return v


class PathConstructionError(RuntimeError):
    """Path construction failed for boxes classified good: the classification
    itself is falsified, so this is a hard error with diagnostics."""


def _bfs_path(graph: Graph, allowed: set[int], a: int, b: int) -> list[int] | None:
    from collections import deque

    if a == b:
        return [a]
    if a not in allowed or b not in allowed:
        return None
    prev = {a: a}
    queue = deque([a])
    while queue:
        v = queue.popleft()
        for w in sorted(int(x) for x in graph.neighbors(v)):
            if w in allowed and w not in prev:
                prev[w] = v
                if w == b:
                    path = [b]
                    while path[-1] != a:
                        path.append(prev[path[-1]])
                    return path[::-1]
                queue.append(w)
    return None


def _remove_loops(path: list[int]) -> list[int]:
    out: list[int] = []
    pos: dict[int, int] = {}
    for v in path:
        if v in pos:
            del out[pos[v] + 1:]
            pos = {w: k for k, w in enumerate(out)}
        else:
            out.append(v)
            pos[v] = len(out) - 1
    return out


def connect_neighbors(config: PointConfig, grid: BoxGrid, graph: Graph, z1, z2) -> list[int]:
    """Simple graph path between the reference vertices of two adjacent good
    boxes, contained in their union, of length at most 2 c2 K^d.

    Built by chaining the Voronoi nuclei of the sub-box centers along the
    joining segment (each consecutive pair joined inside its doubled cube)
    and removing loops; falls back to a direct search inside the box union.
    Failure falsifies the goodness classification and raises.
    """
    z1 = tuple(int(a) for a in z1)
    z2 = tuple(int(a) for a in z2)
    if sum(abs(a - b) for a, b in zip(z1, z2)) != 1:
        # diagonal pairs share only a corner, so the union cannot contain the
        # construction; crossing steps are axis steps anyway
        raise ParameterError("boxes must be axis-adjacent on the lattice")
    if not (grid.good.get(z1, False) and grid.good.get(z2, False)):
        raise ParameterError("both boxes must be good")
    d = grid.dim
    K = grid.K
    pts = config.points
    v1 = reference_vertex(config, grid, z1)
    v2 = reference_vertex(config, grid, z2)
    if v1 == v2:
        return []

    in_union = _box_union_mask(pts, K, z1, z2)
    union_set = set(np.flatnonzero(in_union))

    centers = segment_subbox_centers(K, d, z1, z2)
    s = grid.sub_side
    half_path = (1 + math.sqrt(d)) * s
    nuclei = [voronoi_nucleus(config, c) for c in centers]
    chain: list[int] = [v1]
    ok = nuclei[0] == v1 and nuclei[-1] == v2
    if ok:
        for c, a, b in zip(centers[:-1], nuclei[:-1], nuclei[1:]):
            allowed = {i for i in np.flatnonzero(np.all(np.abs(pts - c) <= half_path, axis=1))}
            seg = _bfs_path(graph, allowed, a, b)
            if seg is None:
                ok = False
                break
            chain.extend(seg[1:])
    if not ok:
        seg = _bfs_path(graph, union_set, v1, v2)
        if seg is None:
            raise PathConstructionError(
                f"no path between reference vertices of good boxes {z1} and {z2}; "
                f"K={K}, c2={grid.c2}, n={grid.n}, refs=({v1},{v2})")
        chain = seg
    path = _remove_loops(chain)
    if any(i not in union_set for i in path):
        raise PathConstructionError(
            f"path between {z1} and {z2} leaves the box union; path={path}")
    limit = 2 * grid.c2 * K ** d
    if len(path) - 1 > limit:
        raise PathConstructionError(
            f"path length {len(path) - 1} exceeds 2 c2 K^d = {limit}")
    return path


def _box_union_mask(pts: np.ndarray, K: float, z1, z2) -> np.ndarray:
    def inside(z):
        c = np.asarray(z, float) * K
        return np.all(np.abs(pts - c) <= K / 2.0, axis=1)

    return inside(z1) | inside(z2)


@dataclass(frozen=True)
class SiteField:
    """Boolean site-percolation field over an integer lattice block.

    open_sites is indexed [i1, i2, ..., id]; axis 0 spans 2N + 1 columns
    (first coordinate from -N to N) and the remaining axes 2N - 1 values
    each (from -(N-1) to N-1)."""

    open_sites: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.open_sites, dtype=bool)
        if arr.ndim < 2 or any(s <= 0 for s in arr.shape):
            raise ParameterError("site field needs positive extents and dim >= 2")
        object.__setattr__(self, "open_sites", arr)

    @property
    def dim(self) -> int:
        return self.open_sites.ndim


@dataclass(frozen=True)
class CrossingReport:
    N: int
    per_slice_counts: tuple[int, ...]
    total: int


def count_disjoint_lr_crossings(field: SiteField, N: int) -> CrossingReport:
    """Maximum number of vertex-disjoint left-right crossings of the block
    [-N, N] x [-N+1, N-1]^(d-1).

    Crossings live inside 2-dimensional slices (all coordinates beyond the
    second are frozen), so the count is the sum over slices of per-slice
    max-flow values.
    """
    arr = field.open_sites
    if arr.shape[0] != 2 * N + 1 or any(s != 2 * N - 1 for s in arr.shape[1:]):
        raise ParameterError("field extents do not match the requested N")
    if arr.ndim == 2:
        slices = [arr]
    else:
        flat = arr.reshape(arr.shape[0], arr.shape[1], -1)
        slices = [flat[:, :, k] for k in range(flat.shape[2])]
    counts = tuple(count_slice_crossings(s) for s in slices)
    return CrossingReport(N, counts, int(sum(counts)))


@dataclass(frozen=True)
class GoodDensityReport:
    p_hat: float
    stderr: float
    verdict: bool
    threshold: float
    n_samples: int


@dataclass(frozen=True)
class _GoodnessReplica:
    spec: ProcessSpec
    K: float
    n: int
    c2: float
    seed: int

    def __call__(self, index: int) -> bool:
        from .graphs import creek_crossing

        rng = child_rng(self.seed, index)
        d = 2
        window = Window.cube(self.K, d, margin=goodness_margin(self.K, d, self.n)
                             + self.spec.interaction_radius)
        config = sample(self.spec, window, rng)
        grid = classify_nice(config, self.K, self.c2)
        if not grid.nice.get((0,) * d, False):
            return False
        graph = creek_crossing(config, self.n)
        classify_good(config, grid, self.n, graph=graph)
        return bool(grid.good.get((0,) * d, False))


def empirical_good_density(spec: ProcessSpec, K: float, n: int, c2: float,
                           n_samples: int, seed: int, n_workers: int = 1,
                           threshold: float = SQUARE_SITE_PERCOLATION_THRESHOLD) -> GoodDensityReport:
    """Monte Carlo estimate of the probability that the origin box is good.

    The verdict compares the estimate against the (configurable) square-site
    percolation threshold; it indicates supercriticality, it does not prove
    stochastic domination.
    """
    replica = _GoodnessReplica(spec, float(K), int(n), float(c2), int(seed))
    outcomes = parallel_map(replica, list(range(n_samples)), n_workers)
    hits = int(sum(outcomes))
    p = hits / n_samples
    se = math.sqrt(max(p * (1 - p), 1.0 / n_samples ** 2) / n_samples)
    return GoodDensityReport(p, se, p > threshold, threshold, n_samples)


def crossings_to_paths(config: PointConfig, grid: BoxGrid, graph: Graph,
                       crossings: list[list[tuple]]) -> list[list[int]]:
    """Convert disjoint lattice crossings of the good-box field into
    vertex-disjoint graph paths between the reference vertices of the second
    and second-to-last boxes of each crossing.

    Consecutive interior boxes are joined with connect_neighbors and the
    concatenation is made simple; disjointness is inherited because each
    path stays inside the union of its own crossing's boxes.
    """
    paths = []
    for crossing in crossings:
        interior = crossing[1:-1]
        if len(interior) == 0:
            raise ParameterError("crossing has no interior boxes")
        chain = [reference_vertex(config, grid, interior[0])]
        for z1, z2 in zip(interior[:-1], interior[1:]):
            seg = connect_neighbors(config, grid, graph, z1, z2)
            if not seg:
                seg = [chain[-1]]
            if seg[0] != chain[-1]:
                raise PathConstructionError("segment does not extend the chain")
            chain.extend(seg[1:])
        paths.append(_remove_loops(chain))
    return paths
