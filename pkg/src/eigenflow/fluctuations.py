"""Fluctuation observables, Gaussian covariance kernels, and the limit
recursions that characterize the fluctuation laws.

Everything works with monomial test functions f = x^n; polynomial
statements follow by linearity.  Time integrals use the trapezoid rule on
whatever grid the inputs carry.
"""

import numpy as np

from .errors import (DegreeMissing, MissingInput, NoNoiseRecorded, NotPSD,
                     TooFewSamples)

JITTER = 1e-10


def empirical_moments(traj, degrees):
    """<x^k, L_N(t)> for each stamp and requested degree."""
    degrees = list(degrees)
    if degrees and max(degrees) > 12:
        raise DegreeMissing("degrees above 12 are not supported")
    out = np.empty((traj.grid.size, len(degrees)))
    for j, k in enumerate(degrees):
        out[:, j] = np.mean(traj.positions ** k, axis=1)
    return out


class FluctuationSample:
    """Per-replica series L_t^N(x^n), optional Q_t^N and N M^N parts."""

    __slots__ = ("degrees", "grid", "L", "Q", "M")

    def __init__(self, degrees, grid, L, Q=None, M=None):
        self.degrees = list(degrees)
        self.grid = np.asarray(grid, dtype=float)
        self.L = L
        self.Q = Q or {}
        self.M = M or {}

    def series(self, degree):
        try:
            j = self.degrees.index(degree)
        except ValueError:
            raise DegreeMissing("degree %d not in sample" % degree)
        return self.L[:, j]

    def to_csv(self, path, replica=0):
        with open(path, "w") as fh:
            fh.write("replica,degree,t,L,Q,M\n")
            for j, n in enumerate(self.degrees):
                q = self.Q.get(n)
                m = self.M.get(n)
                for k, t in enumerate(self.grid):
                    fh.write("%d,%d,%r,%r,%r,%r\n" % (
                        replica, n, float(t), float(self.L[k, j]),
                        float(q[k]) if q is not None else float("nan"),
                        float(m[k]) if m is not None else float("nan")))


def fluctuation(traj, moment_curve, degrees):
    """L_t^N(x^n) = N (<x^n, L_N(t)> - m_n(t)) on the trajectory grid."""
    degrees = list(degrees)
    emp = empirical_moments(traj, degrees)
    N = traj.n_particles
    L = np.empty_like(emp)
    for j, n in enumerate(degrees):
        L[:, j] = N * (emp[:, j] - moment_curve.series(traj.grid, n))
    return FluctuationSample(degrees, traj.grid, L)


def _trapz_cumulative(y, x):
    """Cumulative trapezoid integral of y over x, starting at 0."""
    out = np.zeros_like(y)
    if y.ndim == 1:
        out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))
    else:
        w = np.diff(x)[:, None]
        out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * w, axis=0)
    return out


def centered_process(traj, moment_curve, kernels, degree):
    """Q_t^N(x^n): the fluctuation with all drift and interaction
    corrections of its semimartingale decomposition removed.

    The quadratic (L_N - mu) x (L_N - mu) term is expanded into products
    of fluctuations divided by N, avoiding any O(N^2) double sum.  All
    integrals are anchored at the first trajectory stamp.
    """
    n = int(degree)
    if n < 0:
        raise DegreeMissing("degree must be >= 0")
    grid = traj.grid
    if n == 0:
        return np.zeros(grid.size)
    N = traj.n_particles
    al, be = kernels.alpha, kernels.beta
    b0, b1 = kernels.b0, kernels.b1
    need = list(range(0, n + 1))
    fl = fluctuation(traj, moment_curve, need)
    Ls = {k: fl.L[:, i] for i, k in enumerate(need)}
    m = {k: moment_curve.series(grid, k) for k in range(0, n + 1)}

    q = Ls[n] - Ls[n][0]
    # drift term: f'b = n b0 x^{n-1} + n b1 x^n
    integrand = n * (b0 * Ls[n - 1] + b1 * Ls[n])
    q -= _trapz_cumulative(integrand, grid)
    if n >= 2:
        # (1/2) <f'' G(x,x), mu_s>, f'' = n(n-1) x^{n-2}, G(x,x) = al + 2 be x
        integrand = 0.5 * n * (n - 1) * (al * m[n - 2] + 2.0 * be * m[n - 1])
        q -= _trapz_cumulative(integrand, grid)
        # mixed term: L_s of y -> int divided-difference * G dmu
        mix = np.zeros(grid.size)
        for k in range(n - 1):
            mix += (al * m[k] + be * m[k + 1]) * Ls[n - 2 - k] \
                + be * m[k] * Ls[n - 1 - k]
        q -= _trapz_cumulative(n * mix, grid)
        # (N/2) double integral as an L-product expansion
        dbl = np.zeros(grid.size)
        for k in range(n - 1):
            dbl += al * Ls[k] * Ls[n - 2 - k] \
                + be * (Ls[k + 1] * Ls[n - 2 - k] + Ls[k] * Ls[n - 1 - k])
        q -= _trapz_cumulative(0.5 * n * dbl / N, grid)
    return q


def martingale_part(traj, spec, degree):
    """N M^N_{x^n}(t): the discrete stochastic integral
    sum_i int f'(lambda_i) sigma(lambda_i) dW_i at left endpoints."""
    if traj.noise is None:
        raise NoNoiseRecorded("trajectory carries no noise record")
    n = int(degree)
    grid = traj.grid
    out = np.zeros(grid.size)
    if n == 0:
        return out
    x = traj.positions[:-1]
    from . import kernels as _k
    incr = np.zeros(grid.size - 1)
    for r in range(x.shape[0]):
        sig = _k.diffusion_vector(spec.code, spec.kp, x[r], grid[r])
        incr[r] = np.sum(n * x[r] ** (n - 1) * sig * traj.noise[r])
    out[1:] = np.cumsum(incr)
    return out


class CovarianceKernel:
    """Gaussian covariance of the limit family over (degree, time) pairs.

    E[G_t(x^m) G_s(x^n)] = mult * m * n *
        int_0^{t^s} (alpha m_{m+n-2}(u) + 2 beta m_{m+n-1}(u)) du.
    """

    __slots__ = ("kernels", "curve")

    def __init__(self, kernels, curve):
        self.kernels = kernels
        self.curve = curve

    def __call__(self, m, n, t, s):
        m, n = int(m), int(n)
        if m == 0 or n == 0:
            return 0.0
        deg = m + n - 1
        if deg > self.curve.max_degree:
            raise DegreeMissing("covariance needs moment degree %d" % deg)
        u = min(t, s)
        grid = self.curve.grid
        mask = grid <= u + 1e-15
        g = grid[mask]
        if g.size == 0 or g[-1] < u - 1e-12:
            g = np.append(g, u)
        al, be = self.kernels.alpha, self.kernels.beta
        y = al * self.curve.series(g, m + n - 2) + \
            2.0 * be * self.curve.series(g, m + n - 1)
        return self.kernels.cov_multiplier * m * n * float(np.trapezoid(y, g))


def covariance_kernel(kernels, moment_curve):
    return CovarianceKernel(kernels, moment_curve)


def synthesize_gaussian_family(kernel, degrees, grid, replicas, seed=0):
    """Joint draws of {G_t(x^n)} over the (degree, time) index set.

    Returns a dict degree -> array of shape (len(grid), replicas).  Uses
    a Cholesky square root after adding 1e-10 jitter on the diagonal.
    """
    from .rng import stream
    degrees = [int(d) for d in degrees]
    grid = np.asarray(grid, dtype=float)
    idx = [(n, k) for n in degrees for k in range(grid.size)]
    dim = len(idx)
    cov = np.empty((dim, dim))
    for a, (m, ka) in enumerate(idx):
        for b, (n, kb) in enumerate(idx):
            if b < a:
                cov[a, b] = cov[b, a]
            else:
                cov[a, b] = kernel(m, n, grid[ka], grid[kb])
    scale = max(1.0, float(np.max(np.abs(np.diag(cov)))))
    try:
        root = np.linalg.cholesky(cov + JITTER * scale * np.eye(dim))
    except np.linalg.LinAlgError:
        raise NotPSD("covariance matrix is not PSD within jitter tolerance")
    z = stream(seed, 0).standard_normal((dim, int(replicas)))
    draws = root @ z
    out = {}
    for j, n in enumerate(degrees):
        out[n] = draws[j * grid.size:(j + 1) * grid.size, :]
    return out


def limit_fluctuation_recursion(kind, L0, gaussian, moment_curve, max_degree,
                                c=None):
    """Limit fluctuation series 𝓛_t(x^n) built degree-by-degree.

    ``gaussian`` maps degree -> (n_times, replicas) samples of the
    Gaussian family on the grid implied by ``grid``; ``L0`` maps degree ->
    initial values (scalar or per-replica).  The Wishart and Dyson flows
    integrate their recursions directly; the Ornstein-Uhlenbeck flow uses
    the variation-of-constants form with its remainder R_t(n), for degree
    one as well.
    """
    if 1 not in gaussian:
        raise MissingInput("gaussian sample must cover degree 1")
    grid = np.asarray(moment_curve.grid, dtype=float)
    some = gaussian[1]
    if some.shape[0] != grid.size:
        raise MissingInput("gaussian sample grid does not match moment grid")
    M = some.shape[1]

    def l0(n):
        v = L0.get(n, 0.0) if isinstance(L0, dict) else 0.0
        arr = np.asarray(v, dtype=float)
        return np.broadcast_to(arr, (M,)).astype(float)

    m = {k: moment_curve.series(grid, k) for k in range(max_degree + 1)}
    out = {0: np.zeros((grid.size, M))}
    if max_degree < 1:
        return out
    G1 = gaussian[1]
    if kind in ("Wishart", "Dyson"):
        out[1] = l0(1)[None, :] + G1
    elif kind == "OrnsteinUhlenbeck":
        ef = np.exp(-0.5 * grid)[:, None]
        inner = _trapz_cumulative(np.exp(0.5 * grid)[:, None] * G1, grid)
        out[1] = ef * l0(1)[None, :] + G1 - 0.5 * ef * inner
    else:
        raise MissingInput("no fluctuation recursion for kind %r" % (kind,))

    for deg in range(2, max_degree + 1):
        n = deg - 2
        if deg not in gaussian:
            raise MissingInput("gaussian sample missing degree %d" % deg)
        Gd = gaussian[deg]
        if kind == "Wishart":
            acc = l0(deg)[None, :] + Gd
            cval = _wishart_c(moment_curve) if c is None else float(c)
            acc = acc + cval * deg * _trapz_cumulative(out[deg - 1], grid)
            acc = acc + deg * (deg - 1) * _trapz_cumulative(
                np.repeat(m[deg - 1][:, None], M, axis=1), grid)
            s = np.zeros((grid.size, M))
            for k in range(n + 1):
                s += m[k + 1][:, None] * out[n - k] + m[k][:, None] * out[n + 1 - k]
            acc = acc + deg * _trapz_cumulative(s, grid)
            out[deg] = acc
        elif kind == "Dyson":
            acc = l0(deg)[None, :] + Gd
            acc = acc + 0.5 * deg * (deg - 1) * _trapz_cumulative(
                np.repeat(m[n][:, None], M, axis=1), grid)
            s = np.zeros((grid.size, M))
            for k in range(n + 1):
                s += m[k][:, None] * out[n - k]
            acc = acc + deg * _trapz_cumulative(s, grid)
            out[deg] = acc
        else:  # OrnsteinUhlenbeck
            R = 0.25 * deg * (deg - 1) * _trapz_cumulative(
                np.repeat(m[n][:, None], M, axis=1), grid)
            s = np.zeros((grid.size, M))
            for k in range(n + 1):
                s += m[k][:, None] * out[n - k]
            R = R + 0.5 * deg * _trapz_cumulative(s, grid)
            ef = np.exp(-0.5 * deg * grid)[:, None]
            inner = _trapz_cumulative(
                np.exp(0.5 * deg * grid)[:, None] * (R + Gd), grid)
            out[deg] = ef * l0(deg)[None, :] + R + Gd - 0.5 * deg * ef * inner
    return out


def _wishart_c(moment_curve):
    """Limit drift constant of the Wishart flow, read off dm_1/dt = c."""
    g = moment_curve.grid
    if g.size < 2:
        raise MissingInput("moment curve too short to recover c")
    v = moment_curve.values[:, 1]
    return float((v[-1] - v[0]) / (g[-1] - g[0]))


def pooled_mean(values):
    """Order-independent mean via pairwise summation (numpy default)."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise TooFewSamples("no values to aggregate")
    return float(np.mean(arr))
