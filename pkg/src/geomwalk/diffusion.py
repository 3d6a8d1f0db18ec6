"""Annealed diffusion-constant estimation.

The estimand is the long-time slope of the mean squared displacement of the
variable-speed walk, averaged over both the random environment (point
configuration) and the walk.  The module also provides the isotropy,
Gaussianity and local drift/diffusivity diagnostics used to sanity-check the
invariance-principle picture.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import graphs as graph_mod
from .parallel import parallel_map
from .point_process import ParameterError, PointConfig, ProcessSpec, Window, palm_version
from .rng import child_rng
from .walk import EnsembleResult, run_displacement_ensemble


@dataclass(frozen=True)
class MsdCurve:
    """Mean squared displacement per axis on a time grid, with Monte Carlo
    standard errors, surviving-replica counts, and cross moments."""

    times: np.ndarray
    msd: np.ndarray        # (k, d) mean of (X_t . e_a)^2 over survivors
    stderr: np.ndarray     # (k, d)
    counts: np.ndarray     # (k,) survivors per grid time
    cross: np.ndarray      # (k, d(d-1)/2) mean of (X.e_a)(X.e_b), a < b
    cross_stderr: np.ndarray
    n_replicas: int = 0

    def __post_init__(self):
        if np.any(np.diff(self.counts) > 0):
            raise ParameterError("survivor counts must be non-increasing in t")
        if np.any(self.msd < 0) or np.any(self.stderr < 0):
            raise ParameterError("msd and stderr must be nonnegative")
        k = len(self.times)
        if not (len(self.msd) == len(self.stderr) == len(self.counts) == k):
            raise ParameterError("curve arrays must be congruent")

    @property
    def dim(self) -> int:
        return self.msd.shape[1]

    @property
    def censor_fraction(self) -> float:
        if self.n_replicas == 0:
            return 0.0
        return 1.0 - float(self.counts[-1]) / self.n_replicas


def curve_from_accumulators(acc: EnsembleResult) -> MsdCurve:
    """Reduce raw ensemble sums to a curve with standard errors."""
    n = np.maximum(acc.counts, 1).astype(float)[:, None]
    msd = acc.sum_sq / n
    var = np.maximum(acc.sum_quad / n - msd ** 2, 0.0)
    stderr = np.sqrt(var / n)
    cross = acc.sum_cross / n
    cross_var = np.maximum(acc.sum_cross_sq / n - cross ** 2, 0.0)
    cross_stderr = np.sqrt(cross_var / n)
    return MsdCurve(acc.times, msd, stderr, acc.counts.copy(), cross, cross_stderr,
                    n_replicas=acc.n_walkers)


def build_graph(config: PointConfig, graph_kind: str):
    kind = graph_kind.lower()
    if kind in ("dt", "delaunay"):
        return graph_mod.delaunay(config)
    if kind == "gabriel":
        return graph_mod.gabriel(config)
    if kind.startswith("creek"):
        n = int(kind.split(":")[1]) if ":" in kind else 2
        return graph_mod.creek_crossing(config, n)
    raise ParameterError(f"unknown graph kind {graph_kind!r}")


@dataclass(frozen=True)
class PalmEnvironmentFactory:
    """Samples a Palm configuration and builds its graph; walks start at the
    origin point (index 0)."""

    spec: ProcessSpec
    graph_kind: str
    window: Window

    def __call__(self, rng: np.random.Generator):
        for _ in range(20):
            config = palm_version(self.spec, self.window, rng)
            try:
                graph = build_graph(config, self.graph_kind)
            except graph_mod.DegenerateInputError:
                continue  # degenerate draw: resample
            if graph.degree(0) > 0:
                return config, graph, 0
        raise ParameterError("could not build a usable environment after retries")


def unit_grid_environment(half_extent: int, inner_side: float | None = None):
    """Deterministic unit-grid environment: vertices at the integer points of
    [-h, h]^2, edges between lattice nearest neighbors.

    inner_side is the side of the core (censoring) window; the band between
    it and the grid boundary plays the role of the sampling margin.  Returns
    (config, graph, index of the origin vertex).
    """
    h = int(half_extent)
    if inner_side is None:
        inner_side = 2 * h
    if inner_side > 2 * h:
        raise ParameterError("inner window cannot exceed the grid extent")
    coords = np.array([[i, j] for i in range(-h, h + 1) for j in range(-h, h + 1)],
                      dtype=float)
    window = Window.cube(float(inner_side), 2, margin=(2 * h - inner_side) / 2.0)
    cfg = PointConfig(window, coords)
    n_side = 2 * h + 1

    def idx(i, j):
        return (i + h) * n_side + (j + h)

    edges = []
    for i in range(-h, h + 1):
        for j in range(-h, h + 1):
            if i < h:
                edges.append((idx(i, j), idx(i + 1, j)))
            if j < h:
                edges.append((idx(i, j), idx(i, j + 1)))
    graph = graph_mod.Graph.from_edges(len(coords), edges, "GRID")
    return cfg, graph, idx(0, 0)


@dataclass(frozen=True)
class UnitGridEnvironmentFactory:
    """Deterministic environment: the unit grid, identical for every config
    index (the rng argument is unused)."""

    half_extent: int
    inner_side: float | None = None

    def __call__(self, rng: np.random.Generator):
        return unit_grid_environment(self.half_extent, self.inner_side)


def _one_config_task(args):
    (factory, times, n_walks, seed, cfg_index, inner_lo, inner_hi, record) = args
    rng = child_rng(seed, cfg_index)
    config, graph, start = factory(rng)
    return run_displacement_ensemble(graph, config, start, times, n_walks, rng,
                                     inner_lo=inner_lo, inner_hi=inner_hi,
                                     record_positions=record)


def annealed_msd(spec: ProcessSpec | None, graph_kind: str, times, n_configs: int,
                 n_walks: int, window: Window, rng_seed: int,
                 n_workers: int = 1, environment_factory=None,
                 record_positions: bool = False) -> tuple[MsdCurve, EnsembleResult]:
    """Annealed mean squared displacement.

    For each of n_configs environments (fresh Palm configuration + graph, or
    the output of environment_factory), runs n_walks walkers from the origin
    vertex and pools squared displacements over the double ensemble.  Walk
    statistics are censored at the first exit from the core window (the
    sampling margin lies outside it).  Replica streams are derived from
    (rng_seed, config index), so results are byte-identical for any worker
    count.
    """
    if n_configs < 1 or n_walks < 1:
        raise ParameterError("n_configs and n_walks must be >= 1")
    factory = environment_factory
    if factory is None:
        if spec is None:
            raise ParameterError("need a ProcessSpec or an environment_factory")
        factory = PalmEnvironmentFactory(spec, graph_kind, window)
    inner_lo = np.asarray(window.lo, dtype=float)
    inner_hi = np.asarray(window.hi, dtype=float)
    tasks = [(factory, np.asarray(times, float), n_walks, rng_seed, i,
              inner_lo, inner_hi, record_positions)
             for i in range(n_configs)]
    results = parallel_map(_one_config_task, tasks, n_workers)
    total = results[0]
    for r in results[1:]:
        total = total.merge(r)
    return curve_from_accumulators(total), total


@dataclass(frozen=True)
class SigmaFit:
    per_axis: tuple[float, ...]
    per_axis_stderr: tuple[float, ...]
    pooled: float
    stderr: float
    r2: float
    fit_window: tuple[float, float]
    low_counts: bool
    degenerate: bool


def fit_sigma2(curve: MsdCurve, fit_window: tuple[float, float] | None = None) -> SigmaFit:
    """Weighted least squares of msd against t through the origin.

    Each axis is fitted separately with weights 1/stderr^2; the pooled value
    is the inverse-variance average over axes.  r2 is computed on the pooled
    (weighted) residuals.  Output is flagged when survivor counts inside the
    window drop below 100 or when the curve is identically zero.
    """
    t = curve.times
    if fit_window is None:
        fit_window = (t[-1] / 10.0, t[-1] / 2.0)
    lo, hi = fit_window
    sel = (t >= lo) & (t <= hi)
    if int(sel.sum()) < 3:
        raise ParameterError("need at least 3 grid points inside fit_window")
    tt = t[sel]
    d = curve.dim
    slopes, errs = [], []
    ss_res = ss_tot = 0.0
    for a in range(d):
        m = curve.msd[sel, a]
        se = curve.stderr[sel, a]
        if np.all(se > 0):
            w = 1.0 / se ** 2
        else:
            w = np.ones_like(m)
        sw = np.sum(w * tt * m) / np.sum(w * tt * tt)
        slopes.append(float(sw))
        errs.append(float(math.sqrt(1.0 / np.sum(w * tt * tt))) if np.all(se > 0) else 0.0)
        mbar = np.sum(w * m) / np.sum(w)
        ss_res += float(np.sum(w * (m - sw * tt) ** 2))
        ss_tot += float(np.sum(w * (m - mbar) ** 2))
    degenerate = bool(np.all(curve.msd[sel] == 0.0))
    if degenerate:
        pooled, perr, r2 = 0.0, 0.0, 0.0
    else:
        if all(e > 0 for e in errs):
            iv = np.array([1.0 / e ** 2 for e in errs])
            pooled = float(np.sum(iv * np.array(slopes)) / np.sum(iv))
            perr = float(math.sqrt(1.0 / np.sum(iv)))
        else:
            pooled = float(np.mean(slopes))
            perr = 0.0
        r2 = 1.0 if ss_tot == 0.0 and ss_res == 0.0 else (1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0)
    low_counts = bool(np.any(curve.counts[sel] < 100))
    return SigmaFit(tuple(slopes), tuple(errs), pooled, perr, float(r2),
                    (float(lo), float(hi)), low_counts, degenerate)


@dataclass(frozen=True)
class IsotropyReport:
    slopes: tuple[float, ...]
    slope_stderr: tuple[float, ...]
    max_pair_statistic: float  # max |slope_a - slope_b| / combined stderr
    cross_over_t: tuple[float, ...]  # mean cross moment / t at the last grid time
    passed: bool
    threshold: float = 3.0


def isotropy_check(curve: MsdCurve, fit_window: tuple[float, float] | None = None,
                   threshold: float = 3.0) -> IsotropyReport:
    """Compare per-axis slopes pairwise in combined-standard-error units and
    report the normalized cross moments (both should vanish under isotropy)."""
    if curve.dim < 2:
        raise ParameterError("isotropy check needs dimension >= 2")
    fit = fit_sigma2(curve, fit_window)
    stat = 0.0
    d = curve.dim
    for a in range(d):
        for b in range(a + 1, d):
            denom = math.sqrt(fit.per_axis_stderr[a] ** 2 + fit.per_axis_stderr[b] ** 2)
            if denom == 0:
                gap = 0.0 if fit.per_axis[a] == fit.per_axis[b] else math.inf
            else:
                gap = abs(fit.per_axis[a] - fit.per_axis[b]) / denom
            stat = max(stat, gap)
    cross = tuple(float(c / curve.times[-1]) for c in curve.cross[-1])
    return IsotropyReport(fit.per_axis, fit.per_axis_stderr, float(stat), cross,
                          bool(stat < threshold), threshold)


@dataclass(frozen=True)
class KsReport:
    n: int
    ks_distance: float
    p_value: float
    passed: bool
    degenerate: bool
    level: float = 0.01


def ks_normal_report(samples: np.ndarray, level: float = 0.01) -> KsReport:
    """Kolmogorov-Smirnov distance between standardized samples and the
    standard normal CDF.

    Standardization uses the sample mean and standard deviation, which makes
    the p-value conservative (biased toward acceptance) under the null.
    """
    from scipy import stats

    x = np.asarray(samples, dtype=float)
    x = x[np.isfinite(x)]
    if len(x) < 3 or np.std(x) == 0.0:
        return KsReport(len(x), 1.0, 0.0, False, True, level)
    z = (x - np.mean(x)) / np.std(x)
    res = stats.kstest(z, "norm")
    return KsReport(len(x), float(res.statistic), float(res.pvalue),
                    bool(res.pvalue > level), False, level)


def gaussianity_check(spec: ProcessSpec | None, graph_kind: str, t: float,
                      n_samples: int, window: Window, rng_seed: int,
                      n_walks_per_config: int = 50, n_workers: int = 1,
                      environment_factory=None, level: float = 0.01) -> KsReport:
    """KS normality of the first displacement coordinate at time t over a
    fresh annealed ensemble."""
    n_configs = max(1, math.ceil(n_samples / n_walks_per_config))
    curve, acc = annealed_msd(spec, graph_kind, [t], n_configs, n_walks_per_config,
                              window, rng_seed, n_workers=n_workers,
                              environment_factory=environment_factory,
                              record_positions=True)
    samples = acc.positions[0][:, 0]
    return ks_normal_report(samples, level)


def local_drift_and_diffusivity(graph, config: PointConfig, v: int) -> tuple[np.ndarray, np.ndarray]:
    """Local diagnostics at vertex v: the mean forward velocity (sum of the
    neighbor offsets) and the infinitesimal squared-displacement matrix
    (sum of their outer products)."""
    offsets = config.points[graph.neighbors(v)] - config.points[v]
    phi = offsets.sum(axis=0) if len(offsets) else np.zeros(config.dim)
    psi = offsets.T @ offsets if len(offsets) else np.zeros((config.dim, config.dim))
    return phi, psi
