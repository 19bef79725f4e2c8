"""Empirical covariance and variogram estimators over point pairs.

Pairs are binned by geodesic separation into equal-width bins on
``(0, max_dist]``.  The covariance curve carries an extra leading bin: bin 0
holds the zero-lag variance estimate (the sample variance over all points),
so ``bins=10`` yields 11 values.  The variogram estimator is the classical

    gamma(h) = (1 / (2 N_h)) * sum over pairs at lag h of (Y1 - Y2)^2

and reports only the positive-lag bins.  The covariance subtracts the
global sample mean.  Above ``pair_budget`` enumerated pairs, a seeded
uniform subsample of pairs (with replacement) stands in and bin counts are
rescaled to the full pair population.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, FormatError
from ..rng import numpy_generator

PAIR_BUDGET = 50_000_000


@dataclass
class EmpiricalCurve:
    """Binned lag estimates: bin-center lags, values, pair counts."""

    lags: np.ndarray
    values: np.ndarray
    counts: np.ndarray
    max_dist: float
    bins: int

    def __post_init__(self):
        self.lags = np.asarray(self.lags, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        self.counts = np.asarray(self.counts, dtype=np.float64)
        if not 0 < self.max_dist <= math.pi + 1e-12:
            raise DomainError("max_dist must be in (0, pi]")
        if np.any(np.diff(self.lags) <= 0):
            raise DomainError("lags must be strictly increasing")
        if self.lags.size and self.lags.max() > self.max_dist + 1e-12:
            raise DomainError("lags must not exceed max_dist")
        if np.any(self.counts < 0):
            raise DomainError("counts must be >= 0")
        populated = self.counts > 0
        if not np.all(np.isfinite(self.values[populated])):
            raise DomainError("populated bins must hold finite values")

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["lag", "value", "count"])
            for lag, value, count in zip(self.lags, self.values, self.counts):
                writer.writerow([repr(float(lag)), repr(float(value)),
                                 repr(float(count))])

    @classmethod
    def read_csv(cls, path):
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != ["lag", "value", "count"]:
                raise FormatError("curve CSV must have lag,value,count header")
            rows = [(float(a), float(b), float(c)) for a, b, c in reader]
        lags = np.array([r[0] for r in rows])
        values = np.array([r[1] for r in rows])
        counts = np.array([r[2] for r in rows])
        positive = lags > 0
        bins = int(positive.sum())
        return cls(lags, values, counts, float(lags.max()), bins)


def _pair_bins(frame, column, max_dist, bins, pair_budget, seed, mode):
    """Accumulate per-bin pair sums; mode 'cov' sums a_i*a_j of centered
    values, mode 'vario' sums squared differences."""
    if not 0 < max_dist <= math.pi:
        raise DomainError("max_dist must be in (0, pi]")
    if bins < 1:
        raise DomainError("bins must be >= 1")
    values = np.asarray(frame.column(column), dtype=np.float64)
    n = len(values)
    if n < 2:
        raise DomainError("need at least two rows")
    xyz = frame.positions()
    width = max_dist / bins
    centered = values - values.mean()

    sums = np.zeros(bins)
    counts = np.zeros(bins, dtype=np.float64)

    def accumulate(d, prod_or_sq):
        inside = (d > 0) & (d <= max_dist)
        idx = np.ceil(d[inside] / width).astype(np.int64) - 1
        idx = np.clip(idx, 0, bins - 1)
        np.add.at(sums, idx, prod_or_sq[inside])
        np.add.at(counts, idx, 1.0)

    total_pairs = n * (n - 1) // 2
    if total_pairs <= pair_budget:
        block = max(1, int(2e7) // max(n, 1))
        for lo in range(0, n, block):
            hi = min(lo + block, n)
            dots = np.clip(xyz[lo:hi] @ xyz.T, -1.0, 1.0)
            d = np.arccos(dots)
            # keep strict upper triangle of the global pair matrix
            rows = np.arange(lo, hi)[:, None]
            cols = np.arange(n)[None, :]
            upper = cols > rows
            d = np.where(upper, d, np.nan)
            if mode == "cov":
                prod = centered[lo:hi, None] * centered[None, :]
            else:
                prod = (values[lo:hi, None] - values[None, :]) ** 2
            flat = ~np.isnan(d.ravel())
            accumulate(d.ravel()[flat], prod.ravel()[flat])
        scale = 1.0
    else:
        rng = numpy_generator(seed)
        m = int(pair_budget)
        i = rng.integers(0, n, size=m)
        j = rng.integers(0, n, size=m)
        keep = i < j
        i, j = i[keep], j[keep]
        d = np.arccos(np.clip(np.einsum("ij,ij->i", xyz[i], xyz[j]), -1, 1))
        if mode == "cov":
            prod = centered[i] * centered[j]
        else:
            prod = (values[i] - values[j]) ** 2
        accumulate(d, prod)
        scale = total_pairs / len(i)
    return values, centered, sums, counts * scale, counts, width


def empirical_covariance(frame, column, max_dist, bins, pair_budget=PAIR_BUDGET,
                         seed=0):
    """Binned covariance estimate; ``bins + 1`` values, bin 0 at lag zero."""
    values, centered, sums, counts, raw_counts, width = _pair_bins(
        frame, column, max_dist, bins, pair_budget, seed, "cov")
    with np.errstate(invalid="ignore"):
        est = np.where(raw_counts > 0, sums / np.maximum(raw_counts, 1), np.nan)
    var0 = float(np.mean(centered ** 2))
    lags = np.concatenate([[0.0], (np.arange(1, bins + 1) - 0.5) * width])
    out_values = np.concatenate([[var0], est])
    out_counts = np.concatenate([[len(values)], counts])
    return EmpiricalCurve(lags, out_values, out_counts, max_dist, bins)


def empirical_variogram(frame, column, max_dist, bins, pair_budget=PAIR_BUDGET,
                        seed=0):
    """Classical variogram estimate over the positive-lag bins."""
    _, _, sums, counts, raw_counts, width = _pair_bins(
        frame, column, max_dist, bins, pair_budget, seed, "vario")
    with np.errstate(invalid="ignore"):
        est = np.where(raw_counts > 0,
                       sums / (2.0 * np.maximum(raw_counts, 1)), np.nan)
    lags = (np.arange(1, bins + 1) - 0.5) * width
    return EmpiricalCurve(lags, est, counts, max_dist, bins)
