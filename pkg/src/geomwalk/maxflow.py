"""Maximum vertex-disjoint left-right crossings of a site-percolation slice.

A crossing is a nearest-neighbor path of open sites from the left boundary
column to the right one, touching each boundary exactly once; two crossings
are disjoint when they share no site.  The maximum number of pairwise
disjoint crossings equals (Menger) the max flow of the unit-vertex-capacity
network, computed here with Dinic's algorithm on the split graph.
"""
from __future__ import annotations

from collections import deque

import numpy as np


class _Dinic:
    def __init__(self, n: int):
        self.n = n
        self.head: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[int] = []

    def add(self, u: int, v: int, c: int) -> None:
        self.head[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(c)
        self.head[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0)

    def max_flow(self, s: int, t: int) -> int:
        flow = 0
        while True:
            level = [-1] * self.n
            level[s] = 0
            dq = deque([s])
            while dq:
                u = dq.popleft()
                for e in self.head[u]:
                    if self.cap[e] > 0 and level[self.to[e]] < 0:
                        level[self.to[e]] = level[u] + 1
                        dq.append(self.to[e])
            if level[t] < 0:
                return flow
            it = [0] * self.n

            def dfs(u: int, f: int) -> int:
                if u == t:
                    return f
                while it[u] < len(self.head[u]):
                    e = self.head[u][it[u]]
                    v = self.to[e]
                    if self.cap[e] > 0 and level[v] == level[u] + 1:
                        d = dfs(v, min(f, self.cap[e]))
                        if d > 0:
                            self.cap[e] -= d
                            self.cap[e ^ 1] += d
                            return d
                    it[u] += 1
                return 0

            while True:
                f = dfs(s, 1 << 30)
                if f == 0:
                    break
                flow += f


def extract_disjoint_crossings(open_sites: np.ndarray) -> list[list[tuple[int, int]]]:
    """A maximum family of vertex-disjoint left-right crossings of one 2-D
    slice, each as a list of (i1, i2) array indices, obtained by decomposing
    an integral max flow into unit paths."""
    open_sites = np.asarray(open_sites, dtype=bool)
    n1, n2 = open_sites.shape
    if n1 < 2:
        return []
    g, S, T, vid = _build_flow(open_sites)
    g.max_flow(S, T)
    # forward arcs sit at even indices and started with capacity 1;
    # flow(e) = 1 - residual capacity
    paths = []
    for e in g.head[S]:
        if e % 2 or g.cap[e] != 0:
            continue
        node = g.to[e]  # an in-node on the left column
        path = []
        while node != T:
            v = node // 2
            path.append((v // n2, v % n2))
            out_node = 2 * v + 1
            nxt = None
            for e2 in g.head[out_node]:
                if e2 % 2 == 0 and g.cap[e2] == 0:
                    g.cap[e2] = 1  # consume this unit so shared tracing can't reuse it
                    nxt = g.to[e2]
                    break
            node = nxt
        paths.append(path)
    return paths


def _build_flow(open_sites: np.ndarray):
    n1, n2 = open_sites.shape

    def vid(i, j):
        return i * n2 + j

    n_sites = n1 * n2
    S, T = 2 * n_sites, 2 * n_sites + 1
    g = _Dinic(2 * n_sites + 2)
    for i in range(n1):
        for j in range(n2):
            if not open_sites[i, j]:
                continue
            v = vid(i, j)
            g.add(2 * v, 2 * v + 1, 1)  # unit vertex capacity
            if i == 0:
                g.add(S, 2 * v, 1)
            if i == n1 - 1:
                g.add(2 * v + 1, T, 1)
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                a, b = i + di, j + dj
                if 0 <= a < n1 and 0 <= b < n2 and open_sites[a, b]:
                    if i == n1 - 1 or a == 0:
                        continue  # no exit from the right column, no entry to the left
                    g.add(2 * v + 1, 2 * vid(a, b), 1)
    return g, S, T, vid


def count_slice_crossings(open_sites: np.ndarray) -> int:
    """Maximum number of vertex-disjoint left-right crossings of one 2-D
    slice.  open_sites has shape (n_cols, n_rows) indexed [i1, i2]; crossings
    run from column 0 to column n_cols - 1.

    Left-column sites have no incoming arcs and right-column sites no
    outgoing ones, so each crossing touches the boundaries exactly once, as
    the crossing definition requires.
    """
    open_sites = np.asarray(open_sites, dtype=bool)
    if open_sites.shape[0] < 2:
        return 0
    g, S, T, _ = _build_flow(open_sites)
    return g.max_flow(S, T)
