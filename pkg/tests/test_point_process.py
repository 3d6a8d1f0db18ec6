from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from geomwalk.graphs import delaunay, gabriel
from geomwalk.point_process import (ParameterError, ProcessSpec, Window,
                                    ball_intersection_volume, ball_volume,
                                    estimate_deviation_probability,
                                    estimate_void_probability,
                                    mcp_second_moment_density, palm_version,
                                    sample, sample_mcp, sample_mhp1, sample_mhp2,
                                    sample_ppp, _mhp1_thin, _mhp2_thin)
from geomwalk.rng import child_rng


# ---------------------------------------------------------------------------
# windows and specs
# ---------------------------------------------------------------------------


def test_window_validation():
    with pytest.raises(ParameterError):
        Window((0.0, 0.0), (1.0, 0.0))
    with pytest.raises(ParameterError):
        Window((0.0,), (1.0,), margin=-1.0)
    w = Window.cube(4.0, 2, margin=1.0)
    assert w.volume() == 16.0
    assert w.full_volume() == 36.0


def test_spec_validation():
    with pytest.raises(ParameterError):
        ProcessSpec("mcp", 1.0)  # needs mu, R
    with pytest.raises(ParameterError):
        ProcessSpec("mhp1", 1.0)
    with pytest.raises(ParameterError):
        ProcessSpec("nope", 1.0)
    assert ProcessSpec("ppp", 2.0).intensity(2) == 2.0


# ---------------------------------------------------------------------------
# poisson
# ---------------------------------------------------------------------------


def test_ppp_zero_intensity_empty(rng):
    cfg = sample_ppp(0.0, Window.cube(5.0, 2), rng)
    assert len(cfg) == 0


def test_ppp_negative_intensity_rejected(rng):
    with pytest.raises(ParameterError):
        sample_ppp(-1.0, Window.cube(1.0, 2), rng)


def test_ppp_mean_count():
    # mean count over replicas within a 3-sigma Monte Carlo band
    rng = child_rng(11)
    n_rep, lam = 4000, 2.0
    counts = [len(sample_ppp(lam, Window.cube(1.0, 2), rng)) for _ in range(n_rep)]
    se = math.sqrt(lam / n_rep)  # Poisson variance = mean
    assert abs(np.mean(counts) - lam) < 3 * se


def test_ppp_void_probability_closed_form():
    # P[count = 0] on [-1, 1]^2 with lam = 1 equals e^-4
    rng = child_rng(12)
    n_rep = 20000
    hits = sum(len(sample_ppp(1.0, Window.cube(2.0, 2), rng)) == 0 for _ in range(n_rep))
    p_exact = math.exp(-4.0)
    se = math.sqrt(p_exact * (1 - p_exact) / n_rep)
    assert abs(hits / n_rep - p_exact) < 3 * se


def test_samplers_simple_and_inside_window(rng):
    for spec in (ProcessSpec("ppp", 3.0),
                 ProcessSpec("mcp", 1.0, mu=4.0, R=0.5),
                 ProcessSpec("mhp1", 2.0, R=0.3),
                 ProcessSpec("mhp2", 2.0, R=0.3)):
        cfg = sample(spec, Window.cube(6.0, 2, margin=1.0), rng)
        assert cfg.is_simple()
        assert cfg.window.contains(cfg.points).all()


# ---------------------------------------------------------------------------
# matern cluster
# ---------------------------------------------------------------------------


def test_mcp_forced_parent_daughters_in_ball(rng):
    cfg = sample_mcp(1.0, 50.0, 0.4, Window.cube(4.0, 2), rng, force_parent=[0.0, 0.0])
    assert len(cfg) > 0
    assert np.all(np.linalg.norm(cfg.points, axis=1) <= 0.4 + 1e-12)


def test_mcp_intensity_matches_cluster_formula():
    # intensity = lam * mu * vol(ball(R)); lam=1, mu=4, R=0.5 gives pi per unit area
    rng = child_rng(13)
    lam, mu, R = 1.0, 4.0, 0.5
    window = Window.cube(10.0, 2)
    n_rep = 300
    counts = [len(sample_mcp(lam, mu, R, window, rng)) for _ in range(n_rep)]
    expected = lam * mu * ball_volume(2, R) * window.volume()
    se = np.std(counts, ddof=1) / math.sqrt(n_rep)
    assert abs(np.mean(counts) - expected) < 3.5 * se


def test_mcp_pair_density_far_separation():
    # pair counts in well-separated boxes estimate the constant cross-cluster
    # term of the second factorial moment density
    rng = child_rng(14)
    lam, mu, R = 1.0, 2.0, 0.5
    spec = ProcessSpec("mcp", lam, mu=mu, R=R)
    window = Window.cube(8.0, 2)
    side = 1.0
    a_lo, a_hi = np.array([-3.0, -3.0]), np.array([-2.0, -2.0])
    b_lo, b_hi = np.array([2.0, 2.0]), np.array([3.0, 3.0])
    n_rep = 2500
    prods = []
    for _ in range(n_rep):
        cfg = sample_mcp(lam, mu, R, window, rng)
        p = cfg.points
        na = int(np.sum(np.all((p >= a_lo) & (p <= a_hi), axis=1))) if len(p) else 0
        nb = int(np.sum(np.all((p >= b_lo) & (p <= b_hi), axis=1))) if len(p) else 0
        prods.append(na * nb)
    density = mcp_second_moment_density([-2.5, -2.5], [2.5, 2.5], spec)
    expected = density * side ** 2 * side ** 2
    se = np.std(prods, ddof=1) / math.sqrt(n_rep)
    assert abs(np.mean(prods) - expected) < 3 * se


def test_mcp_second_moment_density_values():
    spec = ProcessSpec("mcp", 1.0, mu=2.0, R=0.5)
    vol = math.pi * 0.25
    far = mcp_second_moment_density([0.0, 0.0], [1.5, 0.0], spec)
    assert far == pytest.approx(4.0 * vol ** 2, rel=1e-12)          # = pi^2 / 4
    near = mcp_second_moment_density([0.0, 0.0], [1e-12, 0.0], spec)
    assert near == pytest.approx(4.0 * (vol ** 2 + vol), rel=1e-6)  # full lens overlap
    with pytest.raises(ParameterError):
        mcp_second_moment_density([0, 0], [0, 0], spec)
    with pytest.raises(ParameterError):
        mcp_second_moment_density([0, 0], [1, 0], ProcessSpec("ppp", 1.0))


def test_ball_intersection_volume_3d_matches_closed_form():
    # two equal spheres: V = pi (4R + t)(2R - t)^2 / 12
    R = 0.8
    for t in (0.3, 0.9, 1.5):
        got = ball_intersection_volume([0, 0, 0], [t, 0, 0], R, qmc_nodes=200000)
        want = math.pi * (4 * R + t) * (2 * R - t) ** 2 / 12.0
        assert got == pytest.approx(want, rel=2e-3)
    assert ball_intersection_volume([0, 0, 0], [1.7, 0, 0], R) == 0.0


# ---------------------------------------------------------------------------
# matern hardcore
# ---------------------------------------------------------------------------


def test_mhp1_hardcore_property(rng):
    cfg = sample_mhp1(2.0, 0.3, Window.cube(8.0, 2), rng)
    d = np.linalg.norm(cfg.points[:, None, :] - cfg.points[None, :, :], axis=2)
    np.fill_diagonal(d, np.inf)
    assert d.min() > 0.3


def test_mhp2_hardcore_property(rng):
    cfg = sample_mhp2(2.0, 0.25, Window.cube(8.0, 2), rng)
    d = np.linalg.norm(cfg.points[:, None, :] - cfg.points[None, :, :], axis=2)
    np.fill_diagonal(d, np.inf)
    assert d.min() > 0.25


def test_mhp1_retention_matches_brute_force_oracle():
    # implementation vs an independent quadratic-loop thinning on fresh
    # samples drawn with a different seed (two-sided Monte Carlo comparison)
    lam, R = 1.0, 0.3
    window = Window.cube(10.0, 2, margin=R)
    kept_impl, base_impl = 0, 0
    rng = child_rng(21)
    for _ in range(60):
        cfg = sample_mhp1(lam, R, window, rng)
        kept_impl += len(cfg)
    rng2 = child_rng(22)
    kept_oracle = 0
    lo, hi = window.full_lo(R), window.full_hi(R)
    vol = float(np.prod(hi - lo))
    for _ in range(60):
        n = rng2.poisson(lam * vol)
        base = lo + rng2.random((n, 2)) * (hi - lo)
        keep = np.ones(n, dtype=bool)
        for i in range(n):
            for j in range(i + 1, n):
                if np.linalg.norm(base[i] - base[j]) <= R:
                    keep[i] = keep[j] = False
        pts = base[keep]
        inside = np.all((pts >= window.full_lo()) & (pts <= window.full_hi()), axis=1)
        kept_oracle += int(inside.sum())
    mean_area = window.full_volume()
    rate = lam * math.exp(-lam * ball_volume(2, R))
    se = math.sqrt(2 * rate * mean_area / 60) * 1.5  # generous band for both sides
    assert abs(kept_impl - kept_oracle) / 60 < 3 * se


def test_mhp1_retention_approaches_one_as_radius_shrinks():
    # exclusion balls vanish, so almost every base point survives
    rng = child_rng(25)
    window = Window.cube(10.0, 2)
    kept = sum(len(sample_mhp1(1.0, 1e-4, window, rng)) for _ in range(40))
    expected = 1.0 * window.volume() * 40
    assert kept > 0.99 * expected


def test_mhp2_contains_mhp1_on_shared_base(rng):
    for _ in range(20):
        base = rng.random((80, 2)) * 6
        marks = rng.random(80)
        k1 = _mhp1_thin(base, 0.4)
        k2 = _mhp2_thin(base, marks, 0.4)
        assert np.all(k2[k1])  # every MHP I survivor also survives MHP II


def test_mhp2_retention_matches_marks_oracle():
    lam, R = 2.0, 0.25
    window = Window.cube(8.0, 2, margin=R)
    rng = child_rng(23)
    kept_impl = sum(len(sample_mhp2(lam, R, window, rng)) for _ in range(60))
    rng2 = child_rng(24)
    lo, hi = window.full_lo(R), window.full_hi(R)
    vol = float(np.prod(hi - lo))
    kept_oracle = 0
    for _ in range(60):
        n = rng2.poisson(lam * vol)
        base = lo + rng2.random((n, 2)) * (hi - lo)
        marks = rng2.random(n)
        keep = np.ones(n, dtype=bool)
        for i in range(n):
            for j in range(n):
                if i != j and np.linalg.norm(base[i] - base[j]) <= R and marks[j] < marks[i]:
                    keep[i] = False
                    break
        pts = base[keep]
        inside = np.all((pts >= window.full_lo()) & (pts <= window.full_hi()), axis=1)
        kept_oracle += int(inside.sum())
    v = lam * ball_volume(2, R)
    rate = (1 - math.exp(-v)) / ball_volume(2, R)
    se = math.sqrt(2 * rate * window.full_volume() / 60) * 1.5
    assert abs(kept_impl - kept_oracle) / 60 < 3 * se


@given(st.integers(min_value=0, max_value=2 ** 31 - 1),
       st.floats(min_value=0.05, max_value=0.5))
@settings(max_examples=25, deadline=None)
def test_hardcore_property_random(seed, R):
    rng = np.random.default_rng(seed)
    cfg = sample_mhp1(1.5, R, Window.cube(5.0, 2), rng)
    if len(cfg) >= 2:
        d = np.linalg.norm(cfg.points[:, None, :] - cfg.points[None, :, :], axis=2)
        np.fill_diagonal(d, np.inf)
        assert d.min() > R


# ---------------------------------------------------------------------------
# palm versions
# ---------------------------------------------------------------------------


def test_palm_origin_first_all_processes(rng):
    for spec in (ProcessSpec("ppp", 1.0),
                 ProcessSpec("mcp", 1.0, mu=4.0, R=0.5),
                 ProcessSpec("mhp1", 2.0, R=0.2),
                 ProcessSpec("mhp2", 2.0, R=0.2)):
        cfg = palm_version(spec, Window.cube(6.0, 2, margin=0.5), rng)
        assert cfg.palm
        assert np.all(cfg.points[0] == 0.0)


def test_palm_requires_origin_in_window(rng):
    with pytest.raises(ParameterError):
        palm_version(ProcessSpec("ppp", 1.0), Window((1.0, 1.0), (2.0, 2.0)), rng)


def test_palm_ppp_slivnyak_mean_count():
    # non-origin points form a plain PPP: mean count in [0, 1]^2 equals lam
    rng = child_rng(31)
    n_rep, hits = 1500, 0
    for _ in range(n_rep):
        cfg = palm_version(ProcessSpec("ppp", 1.0), Window.cube(4.0, 2), rng)
        pts = cfg.points[1:]
        hits += int(np.sum(np.all((pts >= 0.0) & (pts <= 1.0), axis=1)))
    se = math.sqrt(1.0 / n_rep)
    assert abs(hits / n_rep - 1.0) < 3 * se


def test_palm_ppp_counts_poissonian_in_disjoint_cubes():
    # mean and variance of counts in two disjoint cubes match Poisson
    rng = child_rng(32)
    counts_a, counts_b = [], []
    for _ in range(1200):
        cfg = palm_version(ProcessSpec("ppp", 1.0), Window.cube(6.0, 2), rng)
        pts = cfg.points[1:]
        counts_a.append(int(np.sum(np.all((pts >= [1, 1]) & (pts <= [2, 2]), axis=1))))
        counts_b.append(int(np.sum(np.all((pts >= [-2, -2]) & (pts <= [-1, -1]), axis=1))))
    for counts in (counts_a, counts_b):
        m, v = np.mean(counts), np.var(counts, ddof=1)
        assert abs(m - 1.0) < 3 * math.sqrt(1.0 / len(counts))
        assert abs(v - 1.0) < 4 * math.sqrt(2.0 / len(counts))  # var(Poisson)=mean


def test_palm_ppp_delaunay_origin_degree_six():
    # planar Euler-formula consequence: mean Delaunay degree of the typical
    # vertex is 6
    rng = child_rng(33)
    degs = []
    for _ in range(250):
        cfg = palm_version(ProcessSpec("ppp", 1.0), Window.cube(8.0, 2, margin=4.0), rng)
        degs.append(delaunay(cfg).degree(0))
    se = np.std(degs, ddof=1) / math.sqrt(len(degs))
    assert abs(np.mean(degs) - 6.0) < 3 * se


# ---------------------------------------------------------------------------
# void / deviation estimators
# ---------------------------------------------------------------------------


def test_void_probability_ppp_closed_form():
    est, se = estimate_void_probability(ProcessSpec("ppp", 1.0), 2.0, 20000, child_rng(41))
    assert abs(est - math.exp(-4.0)) < 3 * max(se, 1e-4)


def test_void_probability_small_cube_is_one():
    est, _ = estimate_void_probability(ProcessSpec("ppp", 1.0), 1e-4, 500, child_rng(42))
    assert est == 1.0


def test_void_probability_mcp_self_consistent():
    spec = ProcessSpec("mcp", 1.0, mu=4.0, R=0.5)
    e1, s1 = estimate_void_probability(spec, 3.0, 1500, child_rng(43))
    e2, s2 = estimate_void_probability(spec, 3.0, 1500, child_rng(44))
    assert abs(e1 - e2) < 3 * math.sqrt(s1 ** 2 + s2 ** 2) + 1e-9


def test_deviation_probability_poisson_tail():
    lam, L, c2 = 1.0, 4.0, 2.0
    est, se = estimate_deviation_probability(ProcessSpec("ppp", lam), L, c2, 100000,
                                             child_rng(45))
    tail = float(stats.poisson.sf(c2 * L ** 2 - 1, lam * L ** 2))  # P[N >= 32]
    assert abs(est - tail) < 3 * max(se, math.sqrt(tail / 100000))


def test_deviation_probability_limits(rng):
    # c2 -> 0+: threshold drops below one point, so the estimate approaches
    # P[count >= 1] = 1 - e^{-4} (and -> 1 as L grows)
    est_low, se_low = estimate_deviation_probability(ProcessSpec("ppp", 1.0), 2.0, 1e-6, 2000, rng)
    assert abs(est_low - (1.0 - math.exp(-4.0))) < 3 * max(se_low, 1e-3)
    est_high, _ = estimate_deviation_probability(ProcessSpec("ppp", 1.0), 2.0, 1e6, 200, rng)
    assert est_high == 0.0


# ---------------------------------------------------------------------------
# stationarity diagnostics
# ---------------------------------------------------------------------------


def test_ergodic_concentration_matches_poisson_oracle():
    # fraction of replicas with |count/volume - lam| < 0.05 lam on a side-50
    # window; the exact Poisson value is the oracle (about 0.987)
    rng = child_rng(51)
    lam, side, n_rep = 1.0, 50.0, 400
    mean = lam * side * side
    lo_cnt = math.floor(0.95 * mean) + 1
    hi_cnt = math.ceil(1.05 * mean) - 1
    p_exact = float(stats.poisson.cdf(hi_cnt, mean) - stats.poisson.cdf(lo_cnt - 1, mean))
    hits = 0
    for _ in range(n_rep):
        n = len(sample_ppp(lam, Window.cube(side, 2), rng))
        hits += 1 if abs(n / mean - 1.0) < 0.05 else 0
    se = math.sqrt(p_exact * (1 - p_exact) / n_rep)
    assert abs(hits / n_rep - p_exact) < 3.5 * se
    assert hits / n_rep > 0.96


def test_campbell_formula_gabriel_degree():
    # E[sum over points in A of h(recentred config)] = lam vol(A) E0[h]
    # with h = Gabriel degree of the origin
    lam = 1.0
    window = Window.cube(10.0, 2, margin=2.0)
    a_lo, a_hi = np.array([-1.5, -1.5]), np.array([1.5, 1.5])
    rng = child_rng(52)
    lhs_samples = []
    for _ in range(120):
        cfg = sample_ppp(lam, window, rng)
        g = gabriel(cfg)
        in_a = np.flatnonzero(np.all((cfg.points >= a_lo) & (cfg.points <= a_hi), axis=1))
        lhs_samples.append(sum(g.degree(int(i)) for i in in_a))
    rng2 = child_rng(53)
    rhs_samples = []
    for _ in range(400):
        cfg = palm_version(ProcessSpec("ppp", lam), Window.cube(8.0, 2, margin=2.0), rng2)
        rhs_samples.append(gabriel(cfg).degree(0))
    vol_a = float(np.prod(a_hi - a_lo))
    lhs = np.mean(lhs_samples)
    rhs = lam * vol_a * np.mean(rhs_samples)
    se = math.sqrt(np.var(lhs_samples, ddof=1) / len(lhs_samples)
                   + (lam * vol_a) ** 2 * np.var(rhs_samples, ddof=1) / len(rhs_samples))
    assert abs(lhs - rhs) < 3 * se
