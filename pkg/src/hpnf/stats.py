"""Descriptive statistics, two-sample t-tests and box-plot summaries."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .features import FEATURE_NAMES

DEFAULT_ALPHA = 0.05


class DegenerateSample(ValueError):
    pass


class EmptySample(ValueError):
    pass


# -- special functions -----------------------------------------------------

def _betacf(a, b, x, max_iter=500, eps=1e-15):
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return h


def betainc(a, b, x):
    """Regularized incomplete beta function I_x(a, b)."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    # the continued fraction converges fast only on this side of the mean
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_sf2(t, df):
    """Two-sided tail probability P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if math.isnan(t):
        return float("nan")
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return min(1.0, max(0.0, betainc(0.5 * df, 0.5, x)))


# -- t-test ----------------------------------------------------------------

@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p_two_sided: float
    significant: bool


def _moments(x):
    n = len(x)
    m = math.fsum(x) / n
    var = math.fsum((v - m) ** 2 for v in x) / (n - 1)
    return n, m, var


def welch_t_test(a, b, alpha=DEFAULT_ALPHA, pooled=False):
    """Two-sample t-test, Welch's unequal-variance form unless ``pooled``.

    Two constant samples give t = 0, p = 1 when their means agree and an
    infinite t with p = 0 otherwise; df is then reported as n_a + n_b - 2.
    """
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    if len(a) < 2 or len(b) < 2:
        raise DegenerateSample("each sample needs at least two values")
    na, ma, va = _moments(a)
    nb, mb, vb = _moments(b)
    diff = ma - mb

    if pooled:
        df = na + nb - 2.0
        sp = ((na - 1) * va + (nb - 1) * vb) / df
        se2 = sp * (1.0 / na + 1.0 / nb)
    else:
        qa, qb = va / na, vb / nb
        se2 = qa + qb
        if se2 > 0:
            # rescale so tiny variances cannot underflow when squared
            m = max(qa, qb)
            ra, rb = qa / m, qb / m
            df = (ra + rb) ** 2 / (ra * ra / (na - 1) + rb * rb / (nb - 1))
        else:
            df = na + nb - 2.0

    if se2 == 0.0:
        if diff == 0.0:
            return TTestResult(0.0, df, 1.0, False)
        t = math.copysign(math.inf, diff)
        return TTestResult(t, df, 0.0, 0.0 < alpha)

    t = diff / math.sqrt(se2)
    p = student_t_sf2(t, df)
    return TTestResult(t, df, p, p < alpha)


# -- descriptives ----------------------------------------------------------

@dataclass(frozen=True)
class Description:
    n: int
    min: float | None = None
    max: float | None = None
    mean: float | None = None

    def as_dict(self):
        return {"min": self.min, "max": self.max, "mean": self.mean, "n": self.n}


def describe(sample):
    xs = [float(v) for v in sample]
    if not xs:
        return Description(0)
    # fsum keeps the mean exact to rounding, which also keeps min <= mean <= max
    mean = math.fsum(xs) / len(xs)
    lo, hi = min(xs), max(xs)
    return Description(len(xs), lo, hi, min(max(mean, lo), hi))


@dataclass(frozen=True)
class BoxSummary:
    q1: float
    median: float
    q3: float
    whisker_low: float
    whisker_high: float
    n_outliers: int

    def as_dict(self):
        return {
            "q1": self.q1, "median": self.median, "q3": self.q3,
            "whisker_low": self.whisker_low, "whisker_high": self.whisker_high,
            "outliers": self.n_outliers,
        }


def _median_sorted(xs):
    n = len(xs)
    mid = n // 2
    if n % 2:
        return xs[mid]
    return 0.5 * (xs[mid - 1] + xs[mid])


def boxplot_summary(sample):
    """Tukey box: hinge quartiles and 1.5 IQR whiskers.

    Quartiles are medians of the lower and upper halves, each half including
    the overall median when n is odd; even-length medians average the two
    middle values.
    """
    xs = sorted(float(v) for v in sample)
    n = len(xs)
    if n == 0:
        raise EmptySample("boxplot of an empty sample")
    half = (n + 1) // 2
    q1 = _median_sorted(xs[:half])
    q3 = _median_sorted(xs[n - half:])
    med = _median_sorted(xs)
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = [v for v in xs if lo_fence <= v <= hi_fence]
    return BoxSummary(q1, med, q3, inside[0], inside[-1], n - len(inside))


# -- group comparison ------------------------------------------------------

@dataclass(frozen=True)
class FeatureComparison:
    feature: str
    fake: Description
    real: Description
    ttest: TTestResult | None

    def as_dict(self):
        t = self.ttest
        return {
            "feature": self.feature,
            "fake": self.fake.as_dict(),
            "real": self.real.as_dict(),
            "t": None if t is None else t.t,
            "df": None if t is None else t.df,
            "p": None if t is None else t.p_two_sided,
            "significant": None if t is None else t.significant,
        }


@dataclass(frozen=True)
class ComparisonReport:
    features: list[FeatureComparison]
    alpha: float
    pooled: bool = False

    def __getitem__(self, name):
        for fc in self.features:
            if fc.feature == name:
                return fc
        raise KeyError(name)

    def significant(self):
        return [fc.feature for fc in self.features if fc.ttest is not None and fc.ttest.significant]

    def as_list(self):
        return [fc.as_dict() for fc in self.features]


def compare_groups(X, mask, y, alpha=DEFAULT_ALPHA, pooled=False, names=None):
    """Per-feature fake vs. real descriptives and t-tests.

    ``y`` is 1 for fake, 0 for real. Only entries with ``mask`` set enter a
    sample; features with fewer than two defined values in either group are
    reported without a test.
    """
    X = np.asarray(X, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    y = np.asarray(y)
    names = FEATURE_NAMES if names is None else names
    out = []
    for j, name in enumerate(names):
        fake = X[(y == 1) & mask[:, j], j]
        real = X[(y == 0) & mask[:, j], j]
        test = None
        if len(fake) >= 2 and len(real) >= 2:
            test = welch_t_test(fake, real, alpha, pooled)
        out.append(FeatureComparison(name, describe(fake), describe(real), test))
    return ComparisonReport(out, alpha, pooled)


def boxplot_report(X, mask, y, names=None):
    """{feature: {"fake": box or None, "real": box or None}}."""
    X = np.asarray(X, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    y = np.asarray(y)
    names = FEATURE_NAMES if names is None else names
    out = {}
    for j, name in enumerate(names):
        entry = {}
        for label, code in (("fake", 1), ("real", 0)):
            vals = X[(y == code) & mask[:, j], j]
            entry[label] = boxplot_summary(vals).as_dict() if len(vals) else None
        out[name] = entry
    return out
