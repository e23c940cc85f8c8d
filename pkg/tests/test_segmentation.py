import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from behavior_mining import segmentation as sg
from behavior_mining.errors import BadThresholds, DegenerateData, TooFewSequences


def test_filter_outliers_window():
    lengths = [10] * 20 + [1000]
    kept, removed, b = sg.filter_outliers(lengths)
    assert removed == [20] and len(kept) == 20
    assert math.isclose(b.mean, np.mean(lengths))
    assert math.isclose(b.sd, np.std(lengths))
    assert math.isclose(b.upper, b.mean + 2 * b.sd)


def test_filter_outliers_sample_sd_and_disable():
    x = [1, 2, 3, 4, 100]
    assert sg.filter_outliers(x, sample_sd=True)[2].sd == pytest.approx(np.std(x, ddof=1))
    kept, removed, _ = sg.filter_outliers(x, k=math.inf)
    assert removed == [] and kept == list(range(5))
    with pytest.raises(TooFewSequences):
        sg.filter_outliers([3])


def test_silverman_bandwidth_formula():
    x = np.arange(1, 101, dtype=float)
    sd = x.std(ddof=1)
    iqr = np.percentile(x, 75) - np.percentile(x, 25)
    assert sg.silverman_bandwidth(x) == pytest.approx(0.9 * min(sd, iqr / 1.34) * 100 ** -0.2)
    with pytest.raises(DegenerateData):
        sg.kde([5, 5, 5])


def test_kde_integrates_to_one():
    rng = np.random.default_rng(3)
    d = sg.kde(rng.normal(50, 10, 300))
    assert len(d.grid) == 512
    assert np.trapezoid(d.density, d.grid) == pytest.approx(1.0, abs=2e-3)
    assert d.grid[0] == pytest.approx(d.data.min() - 3 * d.bandwidth)


def test_cutpoints_at_two_valleys():
    grid = np.linspace(0, 10, 11)
    dens = np.array([0, 3, 2.5, 3, 0.5, 4, 4, 0.2, 0.2, 3, 0], dtype=float)
    cp = sg.find_cutpoints(sg.DensityEstimate(grid, dens, 1.0, grid))
    # the flat valley at 7-8 reports its midpoint (index 7 of the pair)
    assert cp.cuts == [4.0, 7.0] and not cp.fallback


def test_cutpoints_rank_by_depth_not_height():
    # a tiny dip between two small tail bumps is lower but much shallower
    grid = np.arange(9, dtype=float)
    dens = np.array([0, 10, 1, 9, 2, 8, 0.02, 0.03, 0], dtype=float)
    cp = sg.find_cutpoints(sg.DensityEstimate(grid, dens, 1.0, grid))
    assert cp.cuts == [2.0, 4.0]


def test_cutpoints_quantile_fallback():
    x = np.array([1.0, 2, 3, 4, 5, 6])
    d = sg.DensityEstimate(np.linspace(0, 7, 50), np.exp(-(np.linspace(0, 7, 50) - 3.5) ** 2), 1.0, x)
    cp = sg.find_cutpoints(d)
    assert cp.fallback and cp.cuts == pytest.approx(list(np.quantile(x, [1 / 3, 2 / 3])))


def test_segment_boundaries():
    seg = sg.segment([5, 10, 11, 20, 25], [10, 20])
    assert seg.groups == [0, 1, 1, 2, 2]
    assert seg.counts == [1, 2, 2]
    assert seg.names == ["short", "medium", "long"]
    with pytest.raises(BadThresholds):
        sg.segment([1], [5, 5])


@given(st.lists(st.integers(1, 300), min_size=1, max_size=60),
       st.lists(st.floats(0.5, 300), min_size=1, max_size=4, unique=True))
def test_segment_partitions(lengths, cuts):
    cuts = sorted(cuts)
    seg = sg.segment(lengths, cuts)
    assert sum(seg.counts) == len(lengths)
    for v, g in zip(lengths, seg.groups):
        lo = cuts[g - 1] if g > 0 else -np.inf
        hi = cuts[g] if g < len(cuts) else np.inf
        assert lo <= v < hi


@given(st.lists(st.integers(1, 500), min_size=2, max_size=80), st.floats(0.5, 4))
def test_outlier_split_is_partition(lengths, k):
    kept, removed, b = sg.filter_outliers(lengths, k)
    assert sorted(kept + removed) == list(range(len(lengths)))
    assert all(b.lower <= lengths[i] <= b.upper for i in kept)
