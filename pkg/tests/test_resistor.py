from __future__ import annotations

import numpy as np
import pytest

from geomwalk.point_process import ParameterError, PointConfig, Window
from geomwalk.resistor import (ResistorNetwork, build_periodized,
                               crossing_lower_bound, diffusion_from_conductance,
                               dirichlet_energy, dirichlet_solve, effective_conductance,
                               msd_on_network, series_parallel_oracle)
from geomwalk.rng import child_rng




# ---------------------------------------------------------------------------
# random series-parallel networks with exact conductance known by construction
# ---------------------------------------------------------------------------


def random_sp_network(rng, max_depth=4):
    """Recursive series/parallel composition.  Returns (edges, n_nodes,
    source, sink, exact conductance); the exact value is tracked through the
    construction, independently of any reduction code."""

    def build(depth):
        if depth == 0 or rng.random() < 0.3:
            c = float(rng.uniform(0.2, 5.0))
            return [(0, 1, c)], 2, 0, 1, c
        kind = rng.choice(["series", "parallel"])
        le, ln, ls, lt, lc = build(depth - 1)
        re_, rn, rs, rt, rc = build(depth - 1)
        edges = list(le)
        if kind == "series":
            remap = lambda v: lt if v == rs else v + ln  # noqa: E731
            edges += [(remap(i), remap(j), c) for i, j, c in re_]
            return edges, ln + rn, ls, remap(rt), 1.0 / (1.0 / lc + 1.0 / rc)
        remap = lambda v: ls if v == rs else (lt if v == rt else v + ln)  # noqa: E731
        edges += [(remap(i), remap(j), c) for i, j, c in re_]
        return edges, ln + rn, ls, lt, lc + rc

    return build(max_depth)


def test_series_chain_exact():
    net = ResistorNetwork.from_triples(5, [(i, i + 1, 1.0) for i in range(4)], {0}, {4})
    assert abs(effective_conductance(net) - 0.25) < 1e-10
    assert series_parallel_oracle(net) == pytest.approx(0.25, abs=1e-14)


def test_parallel_chains():
    edges = []
    nid = 2
    for _ in range(3):
        edges += [(0, nid, 1.0), (nid, 1, 1.0)]
        nid += 1
    net = ResistorNetwork.from_triples(nid, edges, {0}, {1})
    assert abs(effective_conductance(net) - 1.5) < 1e-10
    assert series_parallel_oracle(net) == pytest.approx(1.5, abs=1e-14)


def test_single_and_parallel_edges_oracle():
    net = ResistorNetwork.from_triples(2, [(0, 1, 2.5)], {0}, {1})
    assert series_parallel_oracle(net) == pytest.approx(2.5)
    net2 = ResistorNetwork.from_triples(2, [(0, 1, 1.0), (0, 1, 2.0)], {0}, {1})
    assert series_parallel_oracle(net2) == pytest.approx(3.0)
    assert abs(effective_conductance(net2) - 3.0) < 1e-10


def test_wheatstone_bridge_not_reducible():
    net = ResistorNetwork.from_triples(4, [(0, 1, 1.0), (0, 2, 2.0), (1, 3, 3.0),
                              (2, 3, 4.0), (1, 2, 5.0)], {0}, {3})
    assert series_parallel_oracle(net) is None


def test_random_series_parallel_match():
    rng = np.random.default_rng(77)
    for _ in range(200):
        edges, n, s, t, exact = random_sp_network(rng)
        net = ResistorNetwork.from_triples(n, edges, {s}, {t})
        oracle = series_parallel_oracle(net)
        solver = effective_conductance(net)
        assert oracle is not None
        assert oracle == pytest.approx(exact, rel=1e-10)
        assert solver == pytest.approx(exact, rel=1e-8)


# ---------------------------------------------------------------------------
# solver properties
# ---------------------------------------------------------------------------


def random_connected_network(rng, n=14, extra=12):
    edges = [(i, int(rng.integers(i + 1, n)) if i + 1 < n else n - 1,
              float(rng.uniform(0.2, 3.0))) for i in range(n - 1)]
    for _ in range(extra):
        i, j = rng.integers(0, n, 2)
        if i != j:
            edges.append((int(min(i, j)), int(max(i, j)), float(rng.uniform(0.2, 3.0))))
    return ResistorNetwork.from_triples(n, edges, {0}, {n - 1})


def test_rayleigh_monotonicity_random_deletions():
    rng = np.random.default_rng(78)
    for _ in range(60):
        net = random_connected_network(rng)
        kappa = effective_conductance(net)
        k = int(rng.integers(net.n_edges))
        assert effective_conductance(net.drop_edge(k)) <= kappa + 1e-9


def test_dirichlet_minimizer_optimality():
    rng = np.random.default_rng(79)
    net = random_connected_network(rng)
    sol = dirichlet_solve(net)
    base = dirichlet_energy(net, sol.potential)
    assert base == pytest.approx(sol.kappa, rel=1e-9)
    for _ in range(40):
        bump = sol.potential.copy()
        free = [v for v in range(net.n_nodes) if v not in net.source | net.sink]
        v = int(rng.choice(free))
        bump[v] += rng.normal() * 0.1
        assert dirichlet_energy(net, bump) >= base - 1e-12


def test_energy_flow_consistency():
    rng = np.random.default_rng(80)
    for _ in range(20):
        net = random_connected_network(rng)
        sol = dirichlet_solve(net)
        assert sol.source_current == pytest.approx(sol.kappa, rel=1e-8)
        assert sol.sink_current == pytest.approx(sol.kappa, rel=1e-8)


def test_disconnected_electrodes_flagged_zero():
    net = ResistorNetwork.from_triples(4, [(0, 1, 1.0), (2, 3, 1.0)], {0}, {3})
    sol = dirichlet_solve(net)
    assert not sol.connected
    assert sol.kappa == 0.0


# ---------------------------------------------------------------------------
# periodized medium
# ---------------------------------------------------------------------------


def chain_config():
    # five points spaced 1 on the axis spanning [-3, 3]^2; with r_c = 1 the
    # endpoints fall in the electrode slabs and the interior is one chain
    pts = [[-2.0, 0.0], [-1.0, 0.0], [0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]
    return PointConfig(Window((-3.0, -3.0), (3.0, 3.0)), np.asarray(pts))


def test_build_periodized_series_chain_enumeration():
    net = build_periodized(chain_config(), 3, 1.0, graph_kind="gabriel")
    assert net.n_interior == 5
    assert net.n_gamma == 5  # integer points (x, +-3) with |x| < 3
    interior = [(i, j, c) for i, j, c in net.base.triples() if c == 1.0]
    assert sorted((min(i, j), max(i, j)) for i, j, _ in interior) == [(0, 1), (1, 2), (2, 3), (3, 4)]
    electrode = [(i, j, c) for i, j, c in net.base.triples() if c != 1.0]
    assert len(electrode) == 2 * 5  # each slab point to every face point
    assert all(c == pytest.approx(1.0 / 5.0) for _, _, c in electrode)
    kappa = effective_conductance(net.base)
    assert kappa == pytest.approx(1.0 / 6.0, abs=1e-10)  # six series units


def test_build_periodized_validation():
    cfg = chain_config()
    with pytest.raises(ParameterError):
        build_periodized(cfg, 3, 1.6, graph_kind="gabriel")  # N <= 2 r_c
    with pytest.raises(ParameterError):
        build_periodized(cfg, 2.5, 1.0, graph_kind="gabriel")  # non-integer N


def test_empty_interior_zero_conductance():
    cfg = PointConfig(Window((-3.0, -3.0), (3.0, 3.0)), np.empty((0, 2)))
    net = build_periodized(cfg, 3, 1.0, graph_kind="gabriel")
    sol = dirichlet_solve(net.base)
    assert sol.kappa == 0.0 and not sol.connected


def test_long_edges_cut_off():
    # spacing 2 exceeds r_c = 1: conduction identical to the empty interior
    pts = [[-2.0, 0.0], [0.0, 0.0], [2.0, 0.0]]
    cfg = PointConfig(Window((-3.0, -3.0), (3.0, 3.0)), np.asarray(pts))
    net = build_periodized(cfg, 3, 1.0, graph_kind="gabriel")
    assert effective_conductance(net.base) == 0.0


def test_diffusion_from_conductance_formula():
    net = build_periodized(chain_config(), 3, 1.0, graph_kind="gabriel")
    # 8 N^2 kappa / #identified nodes, by direct arithmetic
    assert diffusion_from_conductance(net, 2.0) == pytest.approx(
        8.0 * 9.0 * 2.0 / (5 + 5))
    assert diffusion_from_conductance(net, 0.0) == 0.0


def test_winding_slope_matches_conductance_identity():
    # 2-D chain: winding rate at t = 200 should match 8 N^2 kappa / #V
    net = build_periodized(chain_config(), 3, 1.0, graph_kind="gabriel")
    kappa = effective_conductance(net.base)
    dn = diffusion_from_conductance(net, kappa)
    rate, se = msd_on_network(net, 200.0, 40000, child_rng(81))
    assert abs(rate - dn) / dn < 0.05


def test_winding_variance_scales_with_samples():
    net = build_periodized(chain_config(), 3, 1.0, graph_kind="gabriel")
    _, se_small = msd_on_network(net, 50.0, 2000, child_rng(82))
    _, se_big = msd_on_network(net, 50.0, 8000, child_rng(83))
    assert se_big < se_small  # roughly halves; direction suffices here


def test_cutoff_monotonicity():
    rng = child_rng(84)
    from geomwalk.point_process import sample_ppp

    cfg = sample_ppp(2.0, Window.cube(8.0, 2, margin=1.0), rng)
    kappas = []
    for r_c in (0.8, 1.2, 1.6, 1.9):
        net = build_periodized(cfg, 4, r_c, graph_kind="dt")
        kappas.append(effective_conductance(net.base))
    assert all(b >= a - 1e-9 for a, b in zip(kappas, kappas[1:]))


def test_no_edges_winding_identically_zero():
    # no interior edge and no slab point: every walker is frozen
    pts = [[0.0, 0.0], [0.0, 1.5]]
    cfg = PointConfig(Window((-3.0, -3.0), (3.0, 3.0)), np.asarray(pts))
    net = build_periodized(cfg, 3, 1.0, graph_kind="gabriel")
    rate, se = msd_on_network(net, 20.0, 2000, child_rng(85))
    assert rate == 0.0 and se == 0.0


def test_isolated_component_contributes_vanishing_rate():
    # a two-point component away from the slabs has winding bounded by its
    # extent, so the squared rate decays like 1/t toward zero contribution
    pts = [[0.0, 0.0], [0.5, 0.0]]
    cfg = PointConfig(Window((-3.0, -3.0), (3.0, 3.0)), np.asarray(pts))
    net = build_periodized(cfg, 3, 1.0, graph_kind="gabriel")
    rate20, _ = msd_on_network(net, 20.0, 4000, child_rng(86))
    rate160, _ = msd_on_network(net, 160.0, 4000, child_rng(87))
    assert rate20 <= 0.25 / 20.0 + 1e-12
    assert rate160 < rate20 / 4


# ---------------------------------------------------------------------------
# crossing lower bound
# ---------------------------------------------------------------------------


def ladder_network():
    # two disjoint horizontal chains y = +-1 spanning the cube
    pts = [[-2.0, -1.0], [-1.0, -1.0], [0.0, -1.0], [1.0, -1.0], [2.0, -1.0],
           [-2.0, 1.0], [-1.0, 1.0], [0.0, 1.0], [1.0, 1.0], [2.0, 1.0]]
    cfg = PointConfig(Window((-3.0, -3.0), (3.0, 3.0)), np.asarray(pts))
    return build_periodized(cfg, 3, 1.0, graph_kind="gabriel")


def test_crossing_bound_single_and_parallel_paths():
    net = ladder_network()
    one = crossing_lower_bound(net, [[0, 1, 2, 3, 4]])
    assert one == pytest.approx(1.0 / 6.0)
    both = crossing_lower_bound(net, [[0, 1, 2, 3, 4], [5, 6, 7, 8, 9]])
    assert both == pytest.approx(2.0 / 6.0)
    # equality case: the bound meets the solver value exactly here
    assert both == pytest.approx(effective_conductance(net.base), abs=1e-9)


def test_crossing_bound_rejects_bad_paths():
    net = ladder_network()
    with pytest.raises(ParameterError):
        crossing_lower_bound(net, [[0, 1, 2, 3, 4], [4, 3, 2, 1, 0]])  # shared
    with pytest.raises(ParameterError):
        crossing_lower_bound(net, [[1, 2, 3]])  # does not reach the slabs
    with pytest.raises(ParameterError):
        crossing_lower_bound(net, [[0, 2, 3, 4]])  # (0,2) not an edge
