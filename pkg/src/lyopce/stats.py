"""Empirical distributions shared by the PCE and Monte Carlo paths."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "EmpiricalDistribution",
    "confidence_interval",
    "ks_distance",
]


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """Sorted sample of one scalar output.

    Probabilities always come from the empirical CDF; the histogram (with
    Freedman-Diaconis bins) is only for plotting densities.
    """

    samples: np.ndarray

    @classmethod
    def from_samples(cls, x) -> "EmpiricalDistribution":
        x = np.sort(np.asarray(x, dtype=np.float64).ravel())
        if x.size == 0:
            raise ValueError("empty sample")
        if not np.all(np.isfinite(x)):
            raise ValueError("non-finite values in sample")
        x.setflags(write=False)
        return cls(x)

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def mean(self) -> float:
        return float(np.mean(self.samples))

    @property
    def variance(self) -> float:
        return float(np.var(self.samples))

    def cdf(self, x):
        """P(X <= x)."""
        k = np.searchsorted(self.samples, x, side="right")
        return k / self.n

    def quantile(self, q):
        return np.quantile(self.samples, q, method="linear")

    @cached_property
    def histogram(self) -> tuple[np.ndarray, np.ndarray]:
        """``(density, edges)``; a degenerate sample gets a single bin."""
        lo, hi = self.samples[0], self.samples[-1]
        if lo == hi:
            return np.array([np.inf]), np.array([lo, hi])
        return np.histogram(self.samples, bins="fd", density=True)

    def __eq__(self, other):
        if not isinstance(other, EmpiricalDistribution):
            return NotImplemented
        return np.array_equal(self.samples, other.samples)

    __hash__ = None


def confidence_interval(dist: EmpiricalDistribution, level: float = 0.95):
    """Equal-tail interval from linearly interpolated order statistics."""
    if not 0 < level < 1:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    tail = 0.5 * (1.0 - level)
    lo, hi = dist.quantile([tail, 1.0 - tail])
    return float(lo), float(hi)


def ks_distance(a: EmpiricalDistribution, b: EmpiricalDistribution) -> float:
    """Sup-norm distance between two empirical CDFs."""
    grid = np.concatenate([a.samples, b.samples])
    return float(np.max(np.abs(a.cdf(grid) - b.cdf(grid))))
