"""Sample statistics, histograms, density estimates and divergences.

Everything here is a pure function over immutable inputs. These routines
turn simulation logs into the quantities used for validation against
recorded incident data: summary moments, signed-predisposition histograms,
gamma fits of positive tolls, Gaussian KDE curves, KL divergence between
histograms, and a scalar polarization index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .roles import ValidationError, signed_predisposition


@dataclass(frozen=True)
class SummaryStats:
    count: int
    mean: float
    variance: float  # unbiased; 0.0 by convention for a single sample
    median: float
    max: float
    zero_fraction: float


@dataclass(frozen=True)
class Histogram:
    edges: tuple
    counts: tuple

    def __post_init__(self):
        if len(self.edges) != len(self.counts) + 1:
            raise ValidationError("histogram needs len(edges) == len(counts) + 1")
        if any(b <= a for a, b in zip(self.edges, self.edges[1:])):
            raise ValidationError("histogram edges must be strictly increasing")

    @property
    def total(self) -> int:
        return int(sum(self.counts))

    def masses(self) -> np.ndarray:
        counts = np.asarray(self.counts, dtype=np.float64)
        total = counts.sum()
        if total == 0:
            raise ValidationError("histogram has no mass")
        return counts / total

    def to_dict(self) -> dict:
        return {"edges": list(map(float, self.edges)), "counts": list(map(int, self.counts))}


@dataclass(frozen=True)
class GammaFit:
    shape: float
    scale: float
    fit_method: str


def summarize(samples) -> SummaryStats:
    """Exact sample moments of non-negative values.

    Median uses the lower of the two middle order statistics for even
    counts, so it is always an observed value.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValidationError("summarize needs at least one sample")
    if np.any(x < 0):
        raise ValidationError("summarize expects non-negative samples")
    # Sorting first makes the result exactly permutation-invariant (float
    # summation order is fixed) and gives the median for free.
    x = np.sort(x)
    n = x.size
    mean = float(x.mean())
    variance = float(x.var(ddof=1)) if n > 1 else 0.0
    return SummaryStats(
        count=int(n),
        mean=mean,
        variance=variance,
        median=float(x[(n - 1) // 2]),
        max=float(x[-1]),
        zero_fraction=float(np.count_nonzero(x == 0) / n),
    )


def uniform_edges(lo: float, hi: float, bins: int) -> tuple:
    if bins < 1:
        raise ValidationError("bins must be >= 1")
    if not hi > lo:
        raise ValidationError("uniform_edges needs hi > lo")
    return tuple(np.linspace(lo, hi, bins + 1))


def histogram(samples, edges) -> Histogram:
    """Count samples into the given bins (right-closed last bin)."""
    counts, _ = np.histogram(np.asarray(samples, dtype=np.float64), bins=np.asarray(edges))
    return Histogram(edges=tuple(float(e) for e in edges), counts=tuple(int(c) for c in counts))


def symmetric_histogram(values, bins: int) -> Histogram:
    """Histogram over a symmetric range auto-fitted to max |value|.

    An all-zero sample has no scale; the range falls back to [-1, 1] so the
    mass lands in the central bin.
    """
    if bins < 2:
        raise ValidationError("bins must be >= 2")
    x = np.asarray(values, dtype=np.float64)
    limit = float(np.max(np.abs(x))) if x.size else 0.0
    if limit == 0.0:
        limit = 1.0
    return histogram(x, uniform_edges(-limit, limit, bins))


def predisposition_histogram(snapshot, bins: int) -> Histogram:
    """Signed-predisposition histogram of a snapshot (its polarity axis)."""
    return symmetric_histogram(snapshot_signed_values(snapshot), bins)


def snapshot_signed_values(snapshot) -> np.ndarray:
    """Signed predisposition per agent, from a Snapshot or a trait matrix."""
    from .roles import COL_POLICE_PRED, COL_TERROR_PRED

    tau = getattr(snapshot, "tau", None)
    if tau is None:
        return np.array([signed_predisposition(t) for t in snapshot], dtype=np.float64)
    tau = np.asarray(tau, dtype=np.float64)
    return tau[:, COL_POLICE_PRED] - tau[:, COL_TERROR_PRED]


def fit_gamma_moments(samples) -> GammaFit:
    """Method-of-moments gamma fit: shape = mean^2/var, scale = var/mean.

    Callers exclude zero tolls first; the gamma support is (0, inf) and the
    zero mass is reported separately as a zero fraction.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 2:
        raise ValidationError("gamma fit needs at least 2 samples")
    if np.any(x <= 0):
        raise ValidationError("gamma fit needs strictly positive samples")
    mean = float(x.mean())
    variance = float(x.var(ddof=1))
    if variance <= 0:
        raise ValidationError("gamma fit needs positive sample variance")
    return GammaFit(shape=mean * mean / variance, scale=variance / mean, fit_method="moments")


def fit_gamma_mle(samples) -> GammaFit:
    """Maximum-likelihood alternative (location pinned at zero)."""
    from scipy import stats as sps

    x = np.asarray(samples, dtype=np.float64)
    if x.size < 2:
        raise ValidationError("gamma fit needs at least 2 samples")
    if np.any(x <= 0):
        raise ValidationError("gamma fit needs strictly positive samples")
    if float(x.var(ddof=1)) <= 0:
        raise ValidationError("gamma fit needs positive sample variance")
    shape, _, scale = sps.gamma.fit(x, floc=0.0)
    return GammaFit(shape=float(shape), scale=float(scale), fit_method="mle")


def silverman_bandwidth(samples) -> float:
    x = np.asarray(samples, dtype=np.float64)
    n = x.size
    if n < 2:
        raise ValidationError("bandwidth rule needs at least 2 samples")
    sd = float(x.std(ddof=1))
    if sd == 0.0:
        raise ValidationError("bandwidth rule needs non-degenerate samples")
    return 1.06 * sd * n ** (-0.2)


def kde(samples, bandwidth: float, eval_points) -> np.ndarray:
    """Gaussian-kernel density estimate evaluated at the given points."""
    if not bandwidth > 0:
        raise ValidationError("bandwidth must be > 0")
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValidationError("kde needs at least one sample")
    grid = np.asarray(eval_points, dtype=np.float64)
    z = (grid[:, None] - x[None, :]) / bandwidth
    dens = np.exp(-0.5 * z * z).sum(axis=1)
    return dens / (x.size * bandwidth * math.sqrt(2.0 * math.pi))


def kde_grid(samples, bandwidth: float | None = None, points: int = 512, pad_bandwidths: float = 5.0):
    """Convenience wrapper: KDE on a padded uniform grid, returns (x, y)."""
    x = np.asarray(samples, dtype=np.float64)
    if bandwidth is None:
        bandwidth = silverman_bandwidth(x)
    lo = float(x.min()) - pad_bandwidths * bandwidth
    hi = float(x.max()) + pad_bandwidths * bandwidth
    grid = np.linspace(lo, hi, points)
    return grid, kde(x, bandwidth, grid)


def kl_divergence(p: Histogram, q: Histogram, epsilon: float = 1e-12) -> float:
    """Kullback-Leibler divergence between two histograms on identical bins.

    Epsilon smoothing is applied symmetrically to every bin of both sides
    before normalising, so identical histograms give exactly zero and empty
    bins of q stay finite.
    """
    if not epsilon > 0:
        raise ValidationError("epsilon must be > 0")
    if tuple(p.edges) != tuple(q.edges):
        raise ValidationError("kl_divergence needs identical bin edges")
    pm = np.asarray(p.counts, dtype=np.float64)
    qm = np.asarray(q.counts, dtype=np.float64)
    if pm.sum() == 0 or qm.sum() == 0:
        raise ValidationError("kl_divergence needs non-empty histograms")
    pm = pm / pm.sum() + epsilon
    qm = qm / qm.sum() + epsilon
    pm = pm / pm.sum()
    qm = qm / qm.sum()
    return float(np.sum(pm * np.log(pm / qm)))


def comparison_plot_series(synthetic_deaths, recorded_deaths, bins: int = 30) -> dict:
    """x/y series for external plotting of a synthetic-vs-recorded comparison.

    Histograms share binning (normalized mass per bin center); KDE curves
    cover the positive tolls when there are enough of them to estimate a
    bandwidth.
    """
    hi = float(max(max(synthetic_deaths), max(recorded_deaths)))
    edges = uniform_edges(0.0, hi if hi > 0 else 1.0, bins)
    centers = [(a + b) / 2 for a, b in zip(edges, edges[1:])]
    series: dict = {}
    for label, sample in (("synthetic", synthetic_deaths), ("recorded", recorded_deaths)):
        hist = histogram(sample, edges)
        series[f"{label}_histogram"] = (centers, list(hist.masses()))
        positive = np.asarray([x for x in sample if x > 0], dtype=np.float64)
        if positive.size >= 2 and positive.std(ddof=1) > 0:
            grid, density = kde_grid(positive)
            series[f"{label}_kde"] = (list(grid), list(density))
    return series


def write_plot_series(series: dict, out_dir) -> dict:
    """Write each (x, y) series as a two-column CSV; returns name -> path."""
    from pathlib import Path

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = {}
    for name, (xs, ys) in series.items():
        path = out_dir / f"{name}.csv"
        lines = ["x,y"] + [f"{float(x)!r},{float(y)!r}" for x, y in zip(xs, ys)]
        path.write_text("\n".join(lines) + "\n")
        written[name] = path
    return written


POLARIZATION_BINS = 5


def polarization_index(snapshot) -> float:
    """How divided the signed-predisposition distribution is, in [0, 1].

    One minus the central-bin mass of a five-bin symmetric histogram:
    0 for an all-neutral population, 1 when everyone sits at the extremes.
    """
    values = snapshot_signed_values(snapshot)
    if values.size < 2:
        raise ValidationError("polarization_index needs at least 2 agents")
    hist = symmetric_histogram(values, POLARIZATION_BINS)
    central = hist.counts[POLARIZATION_BINS // 2]
    return 1.0 - central / hist.total
