"""Incremental 2-D Delaunay triangulation with exact predicates.

Bowyer-Watson insertion over a triangle soup with a symbolic ghost vertex
standing in for the region outside the convex hull.  Points are inserted in
Morton (Z-curve) order so the locate walk stays short.  Strictness of the
in-circumdisk tests means cocircular point sets come out as *a* Delaunay
triangulation; a final flip pass then canonicalizes every cocircular quad to
the diagonal whose sorted index pair is lexicographically smallest, which
pins the output on degenerate inputs.
"""
from __future__ import annotations

import numpy as np

from .predicates import incircle, orient2d

GHOST = -1


class DegenerateInputError(ValueError):
    """Raised when all input points are collinear (no triangulation exists)."""


def _morton_order(points: np.ndarray) -> np.ndarray:
    """Indices sorted along a Z-curve over quantized coordinates."""
    n = len(points)
    if n <= 2:
        return np.arange(n)
    lo = points.min(axis=0)
    span = points.max(axis=0) - lo
    span[span == 0.0] = 1.0
    q = ((points - lo) / span * 0xFFFF).astype(np.uint64)
    code = np.zeros(n, dtype=np.uint64)
    for bit in range(16):
        code |= ((q[:, 0] >> np.uint64(bit)) & np.uint64(1)) << np.uint64(2 * bit)
        code |= ((q[:, 1] >> np.uint64(bit)) & np.uint64(1)) << np.uint64(2 * bit + 1)
    return np.argsort(code, kind="stable")


def _in_open_segment(ux, uy, vx, vy, px, py) -> bool:
    # p collinear with uv assumed; strict interior of the segment
    if ux != vx:
        return (ux < px < vx) or (vx < px < ux)
    return (uy < py < vy) or (vy < py < uy)


class _Triangulation:
    """Mutable triangle soup addressed by directed edges.

    Finite triangles are stored counterclockwise.  A ghost triangle
    (a, b, GHOST) owns the reversed copy (a, b) of a hull edge, and its
    "circumdisk" is the open halfplane strictly left of a->b plus the open
    segment ab, so the disks of all triangles cover the plane.
    """

    def __init__(self, pts: list[tuple[float, float]]):
        self.pts = pts
        self.verts: list[tuple[int, int, int] | None] = []
        self.edge2tri: dict[tuple[int, int], int] = {}
        self.free: list[int] = []
        self.hint = 0

    def make(self, a: int, b: int, c: int) -> int:
        if self.free:
            tid = self.free.pop()
            self.verts[tid] = (a, b, c)
        else:
            tid = len(self.verts)
            self.verts.append((a, b, c))
        e = self.edge2tri
        e[(a, b)] = tid
        e[(b, c)] = tid
        e[(c, a)] = tid
        return tid

    def kill(self, tid: int) -> None:
        a, b, c = self.verts[tid]
        del self.edge2tri[(a, b)]
        del self.edge2tri[(b, c)]
        del self.edge2tri[(c, a)]
        self.verts[tid] = None
        self.free.append(tid)

    def in_disk(self, tid: int, px: float, py: float) -> bool:
        a, b, c = self.verts[tid]
        pts = self.pts
        if c == GHOST:
            ux, uy = pts[a]
            vx, vy = pts[b]
            o = orient2d(ux, uy, vx, vy, px, py)
            if o != 0:
                return o > 0
            return _in_open_segment(ux, uy, vx, vy, px, py)
        ax, ay = pts[a]
        bx, by = pts[b]
        cx, cy = pts[c]
        return incircle(ax, ay, bx, by, cx, cy, px, py) > 0

    def locate(self, px: float, py: float) -> int:
        """Walk to a triangle whose circumdisk region contains p."""
        pts = self.pts
        tid = self.hint
        if self.verts[tid] is None:
            tid = next(i for i, v in enumerate(self.verts) if v is not None)
        for _ in range(4 * len(self.verts) + 16):
            a, b, c = self.verts[tid]
            if c == GHOST:
                if self.in_disk(tid, px, py):
                    return tid
                tid = self.edge2tri[(b, a)]
                continue
            ax, ay = pts[a]
            bx, by = pts[b]
            cx, cy = pts[c]
            if orient2d(ax, ay, bx, by, px, py) < 0:
                tid = self.edge2tri[(b, a)]
            elif orient2d(bx, by, cx, cy, px, py) < 0:
                tid = self.edge2tri[(c, b)]
            elif orient2d(cx, cy, ax, ay, px, py) < 0:
                tid = self.edge2tri[(a, c)]
            else:
                return tid
        raise RuntimeError("point location walk failed to terminate")

    def insert(self, p: int) -> None:
        px, py = self.pts[p]
        seed = self.locate(px, py)
        if not self.in_disk(seed, px, py):
            # a located triangle always holds p in its circumdisk region
            # unless p coincides with one of its vertices
            raise ValueError("duplicate point in Delaunay input")
        cavity = {seed}
        stack = [seed]
        boundary: list[tuple[int, int]] = []
        while stack:
            tid = stack.pop()
            a, b, c = self.verts[tid]
            for u, v in ((a, b), (b, c), (c, a)):
                nb = self.edge2tri.get((v, u))
                if nb is None or nb in cavity:
                    continue
                if self.in_disk(nb, px, py):
                    cavity.add(nb)
                    stack.append(nb)
                else:
                    boundary.append((u, v))
        for tid in cavity:
            self.kill(tid)
        last = 0
        for u, v in boundary:
            # keep the ghost vertex in the last slot
            if u == GHOST:
                last = self.make(v, p, GHOST)
            elif v == GHOST:
                last = self.make(p, u, GHOST)
            else:
                last = self.make(u, v, p)
        self.hint = last

    def finite_triangles(self) -> list[tuple[int, int, int]]:
        return [t for t in self.verts if t is not None and GHOST not in t]


def _canonical_flip_pass(tri: _Triangulation) -> None:
    """Flip every exactly-cocircular quad to the diagonal whose sorted vertex
    pair is lexicographically smallest."""
    pts = tri.pts
    changed = True
    while changed:
        changed = False
        for (u, v), tid in list(tri.edge2tri.items()):
            if u == GHOST or v == GHOST or u > v:
                continue
            cur = tri.edge2tri.get((u, v))
            opp = tri.edge2tri.get((v, u))
            if cur is None or opp is None or cur != tid:
                continue
            tri_uv = tri.verts[cur]
            tri_vu = tri.verts[opp]
            if GHOST in tri_uv or GHOST in tri_vu:
                continue
            w = next(a for a in tri_uv if a != u and a != v)
            x = next(a for a in tri_vu if a != u and a != v)
            if (min(w, x), max(w, x)) >= (u, v):
                continue
            if incircle(*pts[u], *pts[v], *pts[w], *pts[x]) != 0:
                continue
            # cocircular quad u, x, v, w; swap the diagonal to w-x
            tri.kill(cur)
            tri.kill(opp)
            tri.make(u, x, w)
            tri.make(x, v, w)
            changed = True


def _build(points: np.ndarray) -> _Triangulation:
    n = len(points)
    order = _morton_order(points)
    pts = [(float(x), float(y)) for x, y in points]

    i0 = int(order[0])
    i1 = None
    k1 = n
    for k in range(1, n):
        if pts[int(order[k])] != pts[i0]:
            i1 = int(order[k])
            k1 = k
            break
    if i1 is None or k1 > 1:
        raise ValueError("duplicate points in Delaunay input")
    i2 = None
    k2 = n
    o = 0
    skipped: list[int] = []
    for k in range(k1 + 1, n):
        cand = int(order[k])
        o = orient2d(*pts[i0], *pts[i1], *pts[cand])
        if o != 0:
            i2 = cand
            k2 = k
            break
        skipped.append(cand)
    if i2 is None:
        raise DegenerateInputError("all points are collinear")
    if o < 0:
        i0, i1 = i1, i0
    tri = _Triangulation(pts)
    tri.make(i0, i1, i2)
    tri.make(i1, i0, GHOST)
    tri.make(i2, i1, GHOST)
    tri.make(i0, i2, GHOST)
    for v in skipped:
        tri.insert(v)
    for k in range(k2 + 1, n):
        tri.insert(int(order[k]))
    _canonical_flip_pass(tri)
    return tri


def delaunay_triangulation(points: np.ndarray) -> _Triangulation:
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ValueError("expected 2-D points of shape (n, 2)")
    if len(points) < 3:
        raise DegenerateInputError("need at least three points to triangulate")
    return _build(points)


def delaunay_edges(points: np.ndarray) -> np.ndarray:
    """Delaunay edge list of shape (m, 2) with i < j, over 2-D points.

    Fewer than three points give the complete graph; fully collinear input
    raises DegenerateInputError.
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    if n < 2:
        return np.empty((0, 2), dtype=np.int64)
    if n == 2:
        return np.array([[0, 1]], dtype=np.int64)
    tri = delaunay_triangulation(points)
    edges = set()
    for a, b, c in tri.finite_triangles():
        edges.add((a, b) if a < b else (b, a))
        edges.add((b, c) if b < c else (c, b))
        edges.add((c, a) if c < a else (a, c))
    return np.array(sorted(edges), dtype=np.int64)


def delaunay_triangles(points: np.ndarray) -> list[tuple[int, int, int]]:
    """Counterclockwise finite triangles of the Delaunay triangulation."""
    return delaunay_triangulation(points).finite_triangles()
