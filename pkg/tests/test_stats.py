import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from behavior_mining import stats
from behavior_mining.errors import DegenerateVariance, TooFewValues, ZeroExpected

REFS = json.loads((Path(__file__).parent / "data" / "tail_references.json").read_text())


def test_tail_closed_forms():
    assert stats.chi2_sf(0, 3) == 1.0
    assert stats.chi2_sf(2, 2) == pytest.approx(math.exp(-1), abs=1e-15)
    assert stats.t_sf_two_tailed(1, 1) == pytest.approx(0.5, abs=1e-15)
    assert stats.t_sf_two_tailed(0, 5) == 1.0
    assert stats.f_sf(0, 2, 3) == 1.0


@pytest.mark.parametrize("name, fn", [("chi2_sf", stats.chi2_sf), ("f_sf", stats.f_sf),
                                      ("t_sf_two_tailed", stats.t_sf_two_tailed)])
def test_tails_against_references(name, fn):
    for *args, ref in REFS[name]:
        assert abs(fn(*args) - float(ref)) < 1e-10, (name, args)


@given(st.floats(0, 200), st.floats(0, 200), st.floats(0.5, 60))
def test_tails_monotone(x, y, df):
    lo, hi = sorted((x, y))
    for fn in (lambda v: stats.chi2_sf(v, df), lambda v: stats.f_sf(v, df, df + 1),
               lambda v: stats.t_sf_two_tailed(v, df)):
        a, b = fn(lo), fn(hi)
        assert 0 <= b <= a + 1e-15 <= 1 + 1e-15


def test_gamma_and_beta_edges():
    assert stats.gamma_q(2.0, 0) == 1.0 and stats.gamma_q(2.0, math.inf) == 0.0
    assert stats.betainc(2, 3, 0) == 0.0 and stats.betainc(2, 3, 1) == 1.0
    assert stats.betainc(1, 1, 0.3) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        stats.chi2_sf(1, 0)


def test_chi_square_examples():
    r = stats.chi_square_independence([[10, 20], [20, 10]])
    assert r.statistic == pytest.approx(20 / 3, abs=1e-12) and r.df == (1,)
    assert r.p_value == pytest.approx(stats.chi2_sf(20 / 3, 1))
    r = stats.chi_square_independence([[1, 2, 3], [2, 4, 6]])
    assert r.statistic < 1e-12 and r.p_value == pytest.approx(1.0)
    with pytest.raises(ZeroExpected):
        stats.chi_square_independence([[1, 0], [2, 0]])


def test_chi_square_yates():
    r = stats.chi_square_independence([[10, 20], [20, 10]], yates=True)
    assert r.statistic == pytest.approx(4 * 4.5 ** 2 / 15)
    with pytest.raises(ValueError):
        stats.chi_square_independence([[1, 2, 3], [3, 2, 1]], yates=True)


@given(st.lists(st.lists(st.integers(1, 50), min_size=3, max_size=3), min_size=2, max_size=4),
       st.permutations(range(3)))
def test_chi_square_permutation_invariant(table, perm):
    t = np.array(table)
    a = stats.chi_square_independence(t).statistic
    b = stats.chi_square_independence(t[::-1][:, list(perm)]).statistic
    assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


def test_anova_examples():
    r = stats.one_way_anova([[1, 2], [5, 6]])
    # SSB = 16 with df 1, SSW = 1 with df 2
    assert r.statistic == pytest.approx(32) and r.df == (1, 2)
    assert stats.one_way_anova([[1, 2, 3], [1, 2, 3]]).statistic == 0
    with pytest.raises(DegenerateVariance):
        stats.one_way_anova([[1, 1], [2, 2]])
    with pytest.raises(TooFewValues):
        stats.one_way_anova([[1, 2]])


def test_t_test_examples():
    r = stats.t_test([1, 2, 3], [3, 4, 5])
    assert r.statistic == pytest.approx(-math.sqrt(6)) and r.df == (4.0,)
    same = stats.t_test([1, 2, 3], [1, 2, 3])
    assert same.statistic == 0 and same.p_value == 1.0
    w = stats.t_test([1, 2, 3], [3, 4, 5], "welch")
    assert w.statistic == pytest.approx(r.statistic) and w.df[0] == pytest.approx(4.0)
    with pytest.raises(TooFewValues):
        stats.t_test([1], [1, 2])
    with pytest.raises(DegenerateVariance):
        stats.t_test([1, 1], [2, 2])


@settings(max_examples=50)
@given(st.lists(st.floats(-100, 100), min_size=2, max_size=15),
       st.lists(st.floats(-100, 100), min_size=2, max_size=15))
def test_t_antisymmetry_and_anova_relation(a, b):
    if np.var(a) + np.var(b) < 1e-6:
        return
    ab, ba = stats.t_test(a, b), stats.t_test(b, a)
    assert ab.statistic == pytest.approx(-ba.statistic) and ab.p_value == pytest.approx(ba.p_value)
    f = stats.one_way_anova([a, b]).statistic
    assert f == pytest.approx(ab.statistic ** 2, rel=1e-9, abs=1e-9)


def test_pairwise_bonferroni():
    samples = {"x": [1, 2, 3, 4], "y": [2, 3, 4, 6], "z": [9, 8, 7, 9]}
    plain = stats.pairwise_t_tests(samples)
    adj = stats.pairwise_t_tests(samples, bonferroni=True)
    assert list(plain) == [("x", "y"), ("x", "z"), ("y", "z")]
    for key in plain:
        assert adj[key].p_value == pytest.approx(min(1, 3 * plain[key].p_value))
