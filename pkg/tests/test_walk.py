from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from geomwalk.graphs import Graph
from geomwalk.point_process import ParameterError
from geomwalk.rng import child_rng
from geomwalk.walk import (IsolatedVertexError, WalkPath, displacement_from_jumps,
                           jump_chain, position_at, simulate_vsrw)

from conftest import make_config


def single_edge():
    cfg = make_config([[0.0, 0.0], [1.0, 0.0]])
    return cfg, Graph.from_edges(2, [(0, 1)], "LOADED")


def star_k13():
    # dyadic coordinates: float sums along paths are exact
    cfg = make_config([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-0.5, -0.25]])
    return cfg, Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)], "LOADED")


def cycle_c4():
    cfg = make_config([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    return cfg, Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)], "LOADED")


def test_single_edge_alternates():
    cfg, g = single_edge()
    path = simulate_vsrw(g, cfg, 0, 50.0, child_rng(1))
    assert np.all(path.vertices == np.arange(len(path.vertices)) % 2)


def test_single_edge_jump_count_poisson():
    # both degrees are 1, so jumps arrive at unit rate: count(t) ~ Poisson(t)
    cfg, g = single_edge()
    rng = child_rng(2)
    t = 5.0
    counts = np.array([simulate_vsrw(g, cfg, 0, t, rng).n_jumps for _ in range(10000)])
    kmax = int(counts.max())
    observed = np.bincount(counts, minlength=kmax + 1)
    probs = stats.poisson.pmf(np.arange(kmax + 1), t)
    # bin the tail so expected counts stay above 5
    exp = probs * len(counts)
    cut = np.searchsorted(np.cumsum(exp[::-1]), 5.0)
    k_hi = kmax - int(cut)
    obs_b = np.concatenate([observed[:k_hi], [observed[k_hi:].sum()]])
    exp_b = np.concatenate([exp[:k_hi], [len(counts) - exp[:k_hi].sum()]])
    chi2 = float(np.sum((obs_b - exp_b) ** 2 / exp_b))
    p = float(stats.chi2.sf(chi2, len(obs_b) - 1))
    assert p > 0.01


def test_star_center_mean_holding_time():
    cfg, g = star_k13()
    rng = child_rng(3)
    holds = [simulate_vsrw(g, cfg, 0, 100.0, rng).times[1] for _ in range(4000)]
    se = np.std(holds, ddof=1) / math.sqrt(len(holds))
    assert abs(np.mean(holds) - 1.0 / 3.0) < 3 * se


def test_holding_times_iid_exponential_ks():
    # sojourn times at the center of the star are Exp(3): KS at the 1% level
    cfg, g = star_k13()
    rng = child_rng(4)
    sojourns = []
    while len(sojourns) < 4000:
        p = simulate_vsrw(g, cfg, 0, 200.0, rng)
        at_center = np.flatnonzero(p.vertices[:-1] == 0)
        sojourns.extend(np.diff(p.times)[at_center])
    res = stats.kstest(sojourns, "expon", args=(0, 1.0 / 3.0))
    assert res.pvalue > 0.01


def test_isolated_start_rejected():
    cfg = make_config([[0, 0], [1, 0], [5, 5]])
    g = Graph.from_edges(3, [(0, 1)], "LOADED")
    with pytest.raises(IsolatedVertexError):
        simulate_vsrw(g, cfg, 2, 1.0, child_rng(5))
    with pytest.raises(IsolatedVertexError):
        jump_chain(g, 2, 10, child_rng(5))


def test_truncation_at_inner_window():
    cfg, g = single_edge()
    # inner box excludes vertex 1, so the first jump truncates
    path = simulate_vsrw(g, cfg, 0, 50.0, child_rng(6),
                         inner_lo=[-0.5, -0.5], inner_hi=[0.5, 0.5])
    assert path.truncated
    assert path.vertices[-1] == 1
    assert path.t_end == path.times[-1]


def test_jump_chain_cycle_occupation_uniform():
    _, g = cycle_c4()
    seq = jump_chain(g, 0, 100000, child_rng(7))
    counts = np.bincount(seq, minlength=4)
    chi2, p = stats.chisquare(counts)
    assert p > 0.01


def test_jump_chain_star_leaves_uniform():
    _, g = star_k13()
    seq = jump_chain(g, 0, 30000, child_rng(8))
    leaves = seq[seq != 0]
    counts = np.bincount(leaves, minlength=4)[1:]
    chi2, p = stats.chisquare(counts)
    assert p > 0.01


def test_jump_chain_path_graph_half_half():
    g = Graph.from_edges(3, [(0, 1), (1, 2)], "LOADED")
    rng = child_rng(9)
    firsts = [jump_chain(g, 1, 1, rng)[1] for _ in range(20000)]
    frac0 = np.mean(np.asarray(firsts) == 0)
    assert abs(frac0 - 0.5) < 3 * math.sqrt(0.25 / len(firsts))
    assert set(firsts) == {0, 2}


def test_position_at_endpoints_and_cadlag():
    cfg, g = single_edge()
    path = simulate_vsrw(g, cfg, 0, 20.0, child_rng(10))
    assert np.all(position_at(path, cfg, 0.0) == cfg.points[0])
    t1 = path.times[1]
    assert np.all(position_at(path, cfg, np.nextafter(t1, 0)) == cfg.points[0])
    assert np.all(position_at(path, cfg, t1) == cfg.points[path.vertices[1]])
    with pytest.raises(ParameterError):
        position_at(path, cfg, 21.0)


def test_position_at_matches_linear_scan(rng):
    cfg, g = cycle_c4()
    path = simulate_vsrw(g, cfg, 0, 30.0, child_rng(11))
    for _ in range(200):
        t = float(rng.random() * path.t_end)
        k = 0
        while k + 1 < len(path.times) and path.times[k + 1] <= t:
            k += 1
        assert np.all(position_at(path, cfg, t) == cfg.points[path.vertices[k]])


def test_reconstruction_identity_exact_on_dyadic_coordinates():
    # coordinates are dyadic rationals at small exponents, so every float
    # addition along the path is exact and the jump-sum reproduces the
    # position displacement bit for bit
    cfg, g = star_k13()
    for seed in range(20):
        path = simulate_vsrw(g, cfg, 0, 50.0, child_rng(100 + seed))
        total = displacement_from_jumps(path, cfg)
        direct = position_at(path, cfg, path.t_end) - position_at(path, cfg, 0.0)
        assert np.all(total == direct)


def test_reconstruction_identity_random_coordinates(rng):
    pts = rng.random((30, 2)) * 10
    cfg = make_config(pts)
    from geomwalk.graphs import delaunay

    g = delaunay(cfg)
    path = simulate_vsrw(g, cfg, 0, 50.0, child_rng(12))
    total = displacement_from_jumps(path, cfg)
    direct = position_at(path, cfg, path.t_end) - position_at(path, cfg, 0.0)
    assert np.allclose(total, direct, rtol=0, atol=1e-10)


def test_detailed_balance_structural():
    # deg(x) P(x -> y) = 1 = deg(y) P(y -> x) on every edge by construction
    _, g = cycle_c4()
    for i, j in g.edges:
        assert g.degree(i) * (1.0 / g.degree(i)) == 1.0
        assert g.degree(j) * (1.0 / g.degree(j)) == 1.0


def test_no_explosion_mean_jump_count():
    # cycle: all rates 2, so jumps by time t average 2 t
    cfg, g = cycle_c4()
    rng = child_rng(13)
    t = 50.0
    counts = [simulate_vsrw(g, cfg, 0, t, rng).n_jumps for _ in range(2000)]
    se = np.std(counts, ddof=1) / math.sqrt(len(counts))
    assert abs(np.mean(counts) - 2 * t) < 3 * se


def test_walkpath_validation():
    with pytest.raises(ParameterError):
        WalkPath(np.array([0.0, 1.0, 1.0]), np.array([0, 1, 0]), 2.0, 0)
    with pytest.raises(ParameterError):
        WalkPath(np.array([0.5, 1.0]), np.array([0, 1]), 2.0, 0)
