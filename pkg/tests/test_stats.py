import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lyopce.stats import EmpiricalDistribution, confidence_interval, ks_distance

floats = st.floats(-1e6, 1e6, allow_nan=False)


def test_cdf_steps():
    d = EmpiricalDistribution.from_samples([3.0, 1.0, 2.0, 2.0])
    assert d.cdf(0.5) == 0.0
    assert d.cdf(2.0) == 0.75
    assert d.cdf(10.0) == 1.0
    assert list(d.samples) == [1.0, 2.0, 2.0, 3.0]


def test_samples_read_only():
    d = EmpiricalDistribution.from_samples([1.0, 2.0])
    with pytest.raises(ValueError):
        d.samples[0] = 5.0


@pytest.mark.parametrize("bad", [[], [1.0, np.nan]])
def test_rejects_bad_samples(bad):
    with pytest.raises(ValueError):
        EmpiricalDistribution.from_samples(bad)


@given(st.lists(floats, min_size=1, max_size=100), floats, floats)
def test_cdf_non_decreasing(xs, a, b):
    d = EmpiricalDistribution.from_samples(xs)
    lo, hi = sorted((a, b))
    assert d.cdf(lo) <= d.cdf(hi)


def test_confidence_interval_uniform_grid():
    d = EmpiricalDistribution.from_samples(np.linspace(0.0, 1.0, 1001))
    lo, hi = confidence_interval(d, 0.95)
    assert lo == pytest.approx(0.025) and hi == pytest.approx(0.975)
    with pytest.raises(ValueError):
        confidence_interval(d, 1.0)


def test_histogram_density_integrates_to_one(rng):
    d = EmpiricalDistribution.from_samples(rng.normal(size=5000))
    dens, edges = d.histogram
    assert np.sum(dens * np.diff(edges)) == pytest.approx(1.0)


def test_ks_identical_and_disjoint():
    a = EmpiricalDistribution.from_samples([1.0, 2.0, 3.0])
    b = EmpiricalDistribution.from_samples([10.0, 11.0])
    assert ks_distance(a, a) == 0.0
    assert ks_distance(a, b) == 1.0


@given(st.lists(floats, min_size=1, max_size=50), st.lists(floats, min_size=1, max_size=50))
def test_ks_symmetric_and_bounded(xs, ys):
    a = EmpiricalDistribution.from_samples(xs)
    b = EmpiricalDistribution.from_samples(ys)
    assert ks_distance(a, b) == ks_distance(b, a)
    assert 0.0 <= ks_distance(a, b) <= 1.0


def test_ks_against_scipy(rng):
    from scipy.stats import ks_2samp

    x, y = rng.normal(size=300), rng.normal(0.2, 1.0, size=500)
    ours = ks_distance(EmpiricalDistribution.from_samples(x), EmpiricalDistribution.from_samples(y))
    assert ours == pytest.approx(ks_2samp(x, y).statistic, abs=1e-12)


def test_equality_by_samples():
    assert EmpiricalDistribution.from_samples([2, 1]) == EmpiricalDistribution.from_samples([1, 2])
