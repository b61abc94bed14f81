"""Deterministic moment curves of the limiting spectral measure.

For polynomial drift b(x) = b0 + b1 x and interaction kernel
G(x, y) = alpha + beta (x + y) the limit-measure equation closes on the
moments m_k(t) = <x^k, mu_t>:

    dm_k/dt = k (b0 m_{k-1} + b1 m_k)
              + (k/2) sum_{j=0}^{k-2} [alpha m_j m_{k-2-j}
              + beta (m_{j+1} m_{k-2-j} + m_j m_{k-1-j})]

which this module integrates with a classical 4th-order scheme, and which
admits semicircle (Catalan) and Marchenko-Pastur (Narayana) closed forms
for the Dyson and Wishart flows from zero initial data.
"""

import math

import numpy as np

from .errors import DegreeMissing, DegreeOverflow, InvalidParams

MAX_DEGREE = 12


class MomentCurve:
    """m_k(t) for k = 0..K on a uniform time grid."""

    __slots__ = ("grid", "values", "provenance")

    def __init__(self, grid, values, provenance):
        self.grid = np.asarray(grid, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.provenance = provenance

    @property
    def max_degree(self):
        return self.values.shape[1] - 1

    def at(self, t, degree):
        """m_degree(t) with linear interpolation between grid stamps."""
        if degree > self.max_degree:
            raise DegreeMissing("curve holds degrees <= %d, asked %d"
                                % (self.max_degree, degree))
        return float(np.interp(t, self.grid, self.values[:, degree]))

    def series(self, times, degree):
        if degree > self.max_degree:
            raise DegreeMissing("curve holds degrees <= %d, asked %d"
                                % (self.max_degree, degree))
        return np.interp(times, self.grid, self.values[:, degree])

    def to_csv(self, path):
        """Write rows `t,m0,...,mK` at full precision."""
        K = self.max_degree
        with open(path, "w") as fh:
            fh.write("t," + ",".join("m%d" % k for k in range(K + 1)) + "\n")
            for i in range(self.grid.size):
                fh.write(repr(float(self.grid[i])) + ","
                         + ",".join(repr(float(v)) for v in self.values[i]) + "\n")


def _rhs(kernels, m, K):
    """Right-hand side of the closed moment hierarchy up to degree K."""
    b0, b1 = kernels.b0, kernels.b1
    # the second-order Ito terms carry a 1/N and drop out in the limit, so
    # the hierarchy sees only the drift and the divided-difference term
    al = kernels.alpha
    be = kernels.beta
    out = np.zeros(K + 1)
    for k in range(1, K + 1):
        acc = b1 * m[k]
        if k >= 1:
            acc += b0 * m[k - 1]
        s = 0.0
        for j in range(k - 1):
            s += al * m[j] * m[k - 2 - j] \
                + be * (m[j + 1] * m[k - 2 - j] + m[j] * m[k - 1 - j])
        out[k] = k * acc + 0.5 * k * s
    return out


def evolve_moments(kernels, init, horizon, resolution=1e-3, K=8):
    """Integrate the hierarchy with RK4 from the supplied init moments.

    ``init`` must cover degrees 0..K+1 (the hierarchy for degree K reads
    degree K-1 and lower only, but the +1 margin guards callers that
    later need one extra degree in covariance integrands).
    """
    if K > MAX_DEGREE:
        raise DegreeOverflow("degree cap is %d, asked %d" % (MAX_DEGREE, K))
    init = np.asarray(init, dtype=float)
    if init.size < K + 2:
        raise DegreeOverflow("init must supply moments 0..%d, got %d values"
                             % (K + 1, init.size))
    if abs(init[0] - 1.0) > 1e-12:
        raise InvalidParams("m_0 must equal 1")
    Ki = K + 1
    m = init[:Ki + 1].copy()
    T = float(horizon)
    n_steps = max(1, int(round(T / resolution))) if T > 0 else 0
    h = T / n_steps if n_steps else 0.0
    grid = np.arange(n_steps + 1) * h if n_steps else np.zeros(1)
    vals = np.zeros((n_steps + 1, K + 1))
    vals[0] = m[:K + 1]
    for i in range(n_steps):
        k1 = _rhs(kernels, m, Ki)
        k2 = _rhs(kernels, m + 0.5 * h * k1, Ki)
        k3 = _rhs(kernels, m + 0.5 * h * k2, Ki)
        k4 = _rhs(kernels, m + h * k3, Ki)
        m = m + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        vals[i + 1] = m[:K + 1]
    return MomentCurve(grid, vals, "HierarchyODE")


def semicircle_moments(K, t=1.0):
    """Moments of the semicircle law with variance t: Catalan numbers."""
    if t < 0.0:
        raise InvalidParams("variance scale must be >= 0")
    out = np.zeros(K + 1)
    out[0] = 1.0
    cat = 1
    for j in range(1, K // 2 + 1):
        cat = cat * 2 * (2 * j - 1) // (j + 1)
        out[2 * j] = cat * t ** j
    return out


def mp_moments(K, c, t=1.0):
    """Marchenko-Pastur moments m_k = t^k sum_r binom(k,r) binom(k-1,r) c^{r+1}/(r+1)."""
    if c < 1.0:
        raise InvalidParams("ratio c must be >= 1")
    if t < 0.0:
        raise InvalidParams("scale must be >= 0")
    out = np.zeros(K + 1)
    out[0] = 1.0
    for k in range(1, K + 1):
        s = 0.0
        for r in range(k):
            s += math.comb(k, r) * math.comb(k - 1, r) * c ** (r + 1) / (r + 1)
        out[k] = t ** k * s
    return out


def closed_form_curve(kind, K, horizon, resolution=1e-3, c=None):
    """Closed-form moment curve for Dyson or Wishart from zero init."""
    n_steps = max(1, int(round(horizon / resolution)))
    h = horizon / n_steps
    grid = np.arange(n_steps + 1) * h
    vals = np.zeros((n_steps + 1, K + 1))
    if kind == "Dyson":
        for i, t in enumerate(grid):
            vals[i] = semicircle_moments(K, t)
    elif kind == "Wishart":
        if c is None:
            raise InvalidParams("Wishart closed form needs the ratio c")
        for i, t in enumerate(grid):
            vals[i] = mp_moments(K, c, t)
    else:
        raise InvalidParams("no closed form for kind %r" % (kind,))
    return MomentCurve(grid, vals, "ClosedForm")
