"""Chi-square, one-way ANOVA and two-sample t tests.

Tail probabilities come from the regularized incomplete gamma and beta
functions evaluated here directly (power series plus modified-Lentz
continued fractions), so p-values do not depend on an external stats
package.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVariance, NumericalFailure, TooFewValues, ZeroExpected

EPS = 1e-16
TINY = 1e-300
MAX_ITER = 100_000


@dataclass(frozen=True)
class TestResult:
    kind: str
    statistic: float
    df: tuple
    p_value: float

    __test__ = False  # not a pytest class


# -- special functions ------------------------------------------------------------

def _gamma_series(a, x):
    """Lower regularized incomplete gamma P(a, x) by its power series."""
    term = total = 1.0 / a
    ap = a
    for _ in range(MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * EPS:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise NumericalFailure(f"incomplete gamma series did not converge (a={a}, x={x})")


def _gamma_cf(a, x):
    """Upper regularized incomplete gamma Q(a, x) by continued fraction."""
    b = x + 1.0 - a
    c = 1.0 / TINY
    d = 1.0 / b
    h = d
    for i in range(1, MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < TINY:
            d = TINY
        c = b + an / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h
    raise NumericalFailure(f"incomplete gamma fraction did not converge (a={a}, x={x})")


def gamma_q(a, x):
    """Upper regularized incomplete gamma function Q(a, x)."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x <= 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_cf(a, x)


def _beta_cf(a, b, x):
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < TINY:
        d = TINY
    d = 1.0 / d
    h = d
    for m in range(1, MAX_ITER):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < TINY:
            d = TINY
        c = 1.0 + aa / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < TINY:
            d = TINY
        c = 1.0 + aa / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            return h
    raise NumericalFailure(f"incomplete beta fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a, b, x):
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x <= 0:
        return 0.0
    if x >= 1:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def chi2_sf(x, df):
    """Upper-tail probability of the chi-square distribution."""
    if df <= 0:
        raise ValueError("df must be positive")
    return gamma_q(df / 2.0, x / 2.0) if x > 0 else 1.0


def f_sf(x, df1, df2):
    """Upper-tail probability of the F distribution."""
    if df1 <= 0 or df2 <= 0:
        raise ValueError("degrees of freedom must be positive")
    if x <= 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    return betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * x))


def t_sf_two_tailed(t, df):
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("df must be positive")
    if math.isinf(t):
        return 0.0
    t2 = t * t
    if t2 == 0:
        return 1.0
    return betainc(df / 2.0, 0.5, df / (df + t2))


def _clip01(p):
    return min(1.0, max(0.0, p))


# -- tests ------------------------------------------------------------------------

def chi_square_independence(table, yates=False) -> TestResult:
    """Pearson chi-square test of independence on an r x c count table.

    ``yates`` applies the continuity correction and is only defined for 2 x 2.
    """
    obs = np.asarray(table, dtype=float)
    if obs.ndim != 2 or min(obs.shape) < 1:
        raise ValueError("table must be two-dimensional")
    if (obs < 0).any():
        raise ValueError("counts must be nonnegative")
    rows, cols = obs.sum(axis=1), obs.sum(axis=0)
    total = obs.sum()
    if total <= 0 or (rows == 0).any() or (cols == 0).any():
        raise ZeroExpected("table has an all-zero row or column")
    expected = np.outer(rows, cols) / total
    if yates:
        if obs.shape != (2, 2):
            raise ValueError("Yates correction applies to 2 x 2 tables only")
        dev = np.maximum(np.abs(obs - expected) - 0.5, 0.0)
    else:
        dev = obs - expected
    stat = float((dev ** 2 / expected).sum())
    df = (obs.shape[0] - 1) * (obs.shape[1] - 1)
    p = _clip01(chi2_sf(stat, df)) if df > 0 else 1.0
    return TestResult("chi2", stat, (df,), p)


def one_way_anova(groups) -> TestResult:
    samples = [np.asarray(g, dtype=float) for g in groups]
    if len(samples) < 2:
        raise TooFewValues("ANOVA needs at least 2 groups")
    if any(s.size == 0 for s in samples):
        raise TooFewValues("every group needs at least one value")
    k = len(samples)
    n = sum(s.size for s in samples)
    if n <= k:
        raise TooFewValues("total sample size must exceed the number of groups")
    grand = np.concatenate(samples).mean()
    ssb = sum(s.size * (s.mean() - grand) ** 2 for s in samples)
    ssw = sum(((s - s.mean()) ** 2).sum() for s in samples)
    if ssw <= 0:
        raise DegenerateVariance("within-group variance is zero")
    f = float((ssb / (k - 1)) / (ssw / (n - k)))
    return TestResult("anova", f, (k - 1, n - k), _clip01(f_sf(f, k - 1, n - k)))


def t_test(a, b, mode="pooled") -> TestResult:
    """Two-sided two-sample t test, Student (``pooled``) or ``welch``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise TooFewValues("each sample needs at least 2 values")
    na, nb = a.size, b.size
    va, vb = a.var(ddof=1), b.var(ddof=1)
    diff = a.mean() - b.mean()
    if mode == "pooled":
        df = na + nb - 2
        sp2 = ((na - 1) * va + (nb - 1) * vb) / df
        if sp2 <= 0:
            raise DegenerateVariance("pooled variance is zero")
        t = diff / math.sqrt(sp2 * (1.0 / na + 1.0 / nb))
    elif mode == "welch":
        qa, qb = va / na, vb / nb
        if qa + qb <= 0:
            raise DegenerateVariance("both samples have zero variance")
        t = diff / math.sqrt(qa + qb)
        df = (qa + qb) ** 2 / (qa * qa / (na - 1) + qb * qb / (nb - 1))
    else:
        raise ValueError(f"unknown t-test mode {mode!r}")
    t = float(t)
    return TestResult(f"t_{mode}", t, (float(df),), _clip01(t_sf_two_tailed(t, df)))


def pairwise_t_tests(samples: dict, mode="pooled", bonferroni=False) -> dict:
    """t tests for every pair of named samples, keyed by ``(name_a, name_b)``.

    With ``bonferroni`` the p-values are multiplied by the number of pairs.
    """
    pairs = list(itertools.combinations(samples, 2))
    out = {}
    for x, y in pairs:
        res = t_test(samples[x], samples[y], mode)
        if bonferroni:
            res = TestResult(res.kind, res.statistic, res.df, min(1.0, res.p_value * len(pairs)))
        out[(x, y)] = res
    return out
