"""Statistical tests and estimators used by the verification experiments.

Kolmogorov-Smirnov machinery is implemented from first principles: the
asymptotic p-value comes from the Kolmogorov distribution series
2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2) truncated at 100 terms.
"""

import numpy as np

from .errors import BadScale, TooFewSamples
from .rng import stream

DEFAULT_LEVEL = 0.01
_KOLMOGOROV_TERMS = 100
_BOOTSTRAP_RESAMPLES = 500


class TestReport:
    """Outcome of one statistical test at a configured level."""

    __slots__ = ("name", "statistic", "p_value", "sample_sizes", "level", "passed")

    def __init__(self, name, statistic, p_value, sample_sizes, level=DEFAULT_LEVEL):
        self.name = name
        self.statistic = float(statistic)
        self.p_value = float(min(max(p_value, 0.0), 1.0))
        self.sample_sizes = tuple(int(s) for s in sample_sizes)
        self.level = float(level)
        self.passed = self.p_value > self.level

    def to_dict(self):
        return {
            "name": self.name,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "sample_sizes": list(self.sample_sizes),
            "level": self.level,
            "passed": bool(self.passed),
        }

    def __repr__(self):
        return "TestReport(%s: D=%.4g, p=%.4g, %s)" % (
            self.name, self.statistic, self.p_value,
            "pass" if self.passed else "reject")


def kolmogorov_sf(x):
    """Survival function of the Kolmogorov distribution."""
    x = float(x)
    if x <= 0.0:
        return 1.0
    ks = np.arange(1, _KOLMOGOROV_TERMS + 1)
    terms = 2.0 * (-1.0) ** (ks - 1) * np.exp(-2.0 * ks ** 2 * x * x)
    return float(min(max(np.sum(terms), 0.0), 1.0))


def _normal_cdf(z):
    from math import erf
    z = np.asarray(z, dtype=float)
    return 0.5 * (1.0 + np.vectorize(erf)(z / np.sqrt(2.0)))


def ks_normal(samples, mean=0.0, sd=1.0, level=DEFAULT_LEVEL, name="ks_normal"):
    """One-sample KS test of the data against Normal(mean, sd^2)."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n < 20:
        raise TooFewSamples("ks_normal needs >= 20 samples, got %d" % n)
    if not sd > 0.0:
        raise BadScale("sd must be > 0, got %r" % (sd,))
    cdf = _normal_cdf((x - mean) / sd)
    up = np.arange(1, n + 1) / n
    lo = np.arange(0, n) / n
    d = max(np.max(up - cdf), np.max(cdf - lo))
    p = kolmogorov_sf(np.sqrt(n) * d)
    return TestReport(name, d, p, (n,), level)


def ks_two_sample(a, b, level=DEFAULT_LEVEL, name="ks_two_sample"):
    """Two-sample KS test with the asymptotic p-value."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    n, m = a.size, b.size
    if n < 20 or m < 20:
        raise TooFewSamples("ks_two_sample needs >= 20 samples per side")
    allv = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, allv, side="right") / n
    cdf_b = np.searchsorted(b, allv, side="right") / m
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    en = np.sqrt(n * m / (n + m))
    p = kolmogorov_sf(en * d)
    return TestReport(name, d, p, (n, m), level)


class CovarianceEstimate:
    """Sample covariance with bootstrap standard errors."""

    __slots__ = ("cov", "se", "n")

    def __init__(self, cov, se, n):
        self.cov = cov
        self.se = se
        self.n = n


def estimate_covariance(samples, seed=0, resamples=_BOOTSTRAP_RESAMPLES):
    """Unbiased covariance of replica rows plus bootstrap SEs."""
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if n < 2:
        raise TooFewSamples("covariance needs >= 2 replicas, got %d" % n)
    cov = np.cov(x, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    rng = stream(seed, 0)
    boots = np.empty((resamples,) + cov.shape)
    for r in range(resamples):
        idx = rng.integers(0, n, n)
        boots[r] = np.atleast_2d(np.cov(x[idx], rowvar=False, ddof=1))
    se = boots.std(axis=0, ddof=1)
    return CovarianceEstimate(cov, se, n)


def variance_check(samples, target, label, n_se=3.0, seed=0):
    """TestReport-style pass/fail for |sample var - target| <= n_se * SE."""
    est = estimate_covariance(np.asarray(samples, dtype=float)[:, None], seed=seed)
    v = est.cov[0, 0]
    se = max(est.se[0, 0], 1e-300)
    z = abs(v - target) / se
    rep = TestReport(label, z, 1.0 if z <= n_se else 0.0, (est.n,), level=0.5)
    return rep, v, se


def mean_check(samples, target, label, n_se=3.0):
    """Pass/fail for |sample mean - target| <= n_se Monte Carlo SEs."""
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n < 2:
        raise TooFewSamples("mean check needs >= 2 samples")
    se = max(x.std(ddof=1) / np.sqrt(n), 1e-300)
    z = abs(x.mean() - target) / se
    return TestReport(label, z, 1.0 if z <= n_se else 0.0, (n,), level=0.5), \
        float(x.mean()), float(se)
