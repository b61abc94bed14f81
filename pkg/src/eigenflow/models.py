"""Particle system definitions: coefficients at finite N and their limits.

A model is a diffusion for N ordered particles

    dx_i = sigma(x_i) dW_i + (b_N(x_i) + sum_{j != i} K_N(x_i, x_j) / (x_i - x_j)) dt

where K_N is a symmetric interaction kernel.  Built-in kinds cover the
Wishart, Dyson and Ornstein-Uhlenbeck eigenvalue flows, their drift-perturbed
variants, a generalized Wishart family and a generic particle system.
"""

import numpy as np

from . import kernels
from .errors import CollidingState, InvalidParams, UnknownKind

KINDS = (
    "GeneralizedWishart",
    "ParticleSystem",
    "Wishart",
    "WishartDrifted",
    "Dyson",
    "DysonDrifted",
    "OrnsteinUhlenbeck",
    "OUDrifted",
)

# time-dependent wrappers used by the stationarity experiments
SCALED_KINDS = ("ScaledWishart", "ScaledDyson")

WISHART_KINDS = ("Wishart", "WishartDrifted", "GeneralizedWishart", "ScaledWishart")

_CODE = {
    "GeneralizedWishart": kernels.GENERALIZED,
    "Wishart": kernels.WISHART,
    "WishartDrifted": kernels.WISHART_DRIFTED,
    "Dyson": kernels.DYSON,
    "DysonDrifted": kernels.DYSON_DRIFTED,
    "OrnsteinUhlenbeck": kernels.OU,
    "OUDrifted": kernels.OU_DRIFTED,
    "ParticleSystem": kernels.PARTICLE,
    "ScaledWishart": kernels.SCALED_WISHART,
    "ScaledDyson": kernels.SCALED_DYSON,
}


class ModelSpec:
    """Immutable description of one particle system.

    Holds the kind, particle count, raw parameters, and a packed
    (code, kp) pair consumed by the compiled integrator loops.
    """

    __slots__ = ("kind", "n_particles", "params", "code", "kp", "clamp")

    def __init__(self, kind, n_particles, params, code, kp, clamp):
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "n_particles", n_particles)
        object.__setattr__(self, "params", dict(params))
        object.__setattr__(self, "code", code)
        object.__setattr__(self, "kp", kp)
        object.__setattr__(self, "clamp", clamp)

    def __setattr__(self, name, value):
        raise AttributeError("ModelSpec is immutable")

    def diffusion_per_particle(self, x, t=0.0):
        """sigma(x) = 2 g_N(x) h_N(x), or sigma^N(x) for particle systems."""
        return kernels._diffusion(self.code, self.kp, float(x), float(t))

    def drift_b(self, x, t=0.0):
        return kernels._drift_b(self.code, self.kp, float(x), float(t))

    def interaction_kernel(self, x, y, t=0.0):
        return kernels._pair_kernel(self.code, self.kp, float(x), float(y), float(t))

    def __repr__(self):
        return "ModelSpec(kind=%r, N=%d, params=%r)" % (
            self.kind, self.n_particles, self.params)


class LimitKernels:
    """High-dimensional limits of a model's coefficients.

    ``G(x, y)`` is the limit of N times the interaction kernel, ``b`` the
    limit drift.  ``cov_multiplier`` is 2 for eigenvalue systems and 1 for
    particle systems.  The quadratic member (alpha, beta) with
    G(x,y) = alpha + beta (x + y) covers every built-in kind and is what
    the moment hierarchy and covariance code consume.
    """

    __slots__ = ("b0", "b1", "alpha", "beta", "sigma_tilde0", "cov_multiplier")

    def __init__(self, b0, b1, alpha, beta, sigma_tilde0, cov_multiplier):
        self.b0 = b0
        self.b1 = b1
        self.alpha = alpha
        self.beta = beta
        self.sigma_tilde0 = sigma_tilde0
        self.cov_multiplier = cov_multiplier

    def b(self, x):
        return self.b0 + self.b1 * x

    def G(self, x, y):
        return self.alpha + self.beta * (x + y)

    def sigma_tilde(self, x):
        return self.sigma_tilde0


def _positive_int(params, key, label):
    v = params.get(key)
    if v is None or int(v) != v or int(v) <= 0:
        raise InvalidParams("%s must be a positive integer, got %r" % (label, v))
    return int(v)


def build_model(kind, n_particles, params=None):
    """Construct a ModelSpec with validated parameters.

    Drifted kinds perturb their target drift by eps * sin(x) / N^{3/2}
    so that N * sup|b_N - target| vanishes as N grows.
    """
    params = dict(params or {})
    N = int(n_particles)
    if N < 1:
        raise InvalidParams("n_particles must be >= 1, got %r" % (n_particles,))
    if kind not in KINDS and kind not in SCALED_KINDS:
        raise UnknownKind("unknown model kind %r" % (kind,))

    kp = np.zeros(kernels.NPARAMS)
    clamp = kind in WISHART_KINDS
    if kind == "Wishart":
        P = _positive_int(params, "P", "Wishart P")
        if P <= N - 1:
            raise InvalidParams("Wishart requires P > N-1, got P=%d, N=%d" % (P, N))
        kp[0] = P / N
        kp[1] = 1.0 / N
        kp[2] = 2.0 / np.sqrt(N)
    elif kind == "WishartDrifted":
        c = float(params.get("c", 1.0))
        if c < 1.0:
            raise InvalidParams("WishartDrifted requires c >= 1, got %r" % (c,))
        eps = float(params.get("eps", 1.0))
        kp[0] = c
        kp[1] = 1.0 / N
        kp[2] = 2.0 / np.sqrt(N)
        kp[3] = eps / N ** 1.5
    elif kind == "Dyson":
        kp[0] = np.sqrt(2.0 / N)
        kp[1] = 1.0 / N
    elif kind == "DysonDrifted":
        kp[0] = np.sqrt(2.0 / N)
        kp[1] = 1.0 / N
        kp[2] = float(params.get("c", 0.0))
        kp[3] = float(params.get("eps", 1.0)) / N ** 1.5
    elif kind == "OrnsteinUhlenbeck":
        kp[0] = 1.0 / np.sqrt(N)
        kp[1] = 0.5 / N
    elif kind == "OUDrifted":
        kp[0] = 1.0 / np.sqrt(N)
        kp[1] = 0.5 / N
        kp[2] = float(params.get("c", 0.0))
        kp[3] = float(params.get("eps", 1.0)) / N ** 1.5
    elif kind == "GeneralizedWishart":
        fam = params.get("g_family", "sqrt")
        if fam not in ("sqrt", "const"):
            raise InvalidParams("g_family must be 'sqrt' or 'const', got %r" % (fam,))
        s0 = float(params.get("g_scale", 1.0))
        if s0 <= 0.0:
            raise InvalidParams("g_scale must be > 0, got %r" % (s0,))
        kp[0] = 1.0 if fam == "sqrt" else 0.0
        kp[1] = s0 / np.sqrt(N)
        kp[2] = float(params.get("b0", 0.0))
        kp[3] = float(params.get("b1", 0.0))
        clamp = fam == "sqrt"
    elif kind == "ParticleSystem":
        s0 = float(params.get("sigma0", 1.0))
        h0 = float(params.get("h0", 1.0))
        if s0 < 0.0:
            raise InvalidParams("sigma0 must be >= 0, got %r" % (s0,))
        kp[0] = s0 / np.sqrt(N)
        kp[1] = float(params.get("b0", 0.0))
        kp[2] = float(params.get("b1", 0.0))
        kp[3] = h0 / N
        clamp = False
    elif kind == "ScaledWishart":
        P = _positive_int(params, "P", "ScaledWishart P")
        if P <= N - 1:
            raise InvalidParams("ScaledWishart requires P > N-1, got P=%d, N=%d" % (P, N))
        a = float(params.get("a", 1.0))
        if a <= 0.0:
            raise InvalidParams("ScaledWishart requires a > 0, got %r" % (a,))
        kp[0] = P / N
        kp[1] = 1.0 / N
        kp[2] = 2.0 / np.sqrt(N)
        kp[3] = a
    elif kind == "ScaledDyson":
        a = float(params.get("a", 1.0))
        if a <= 0.0:
            raise InvalidParams("ScaledDyson requires a > 0, got %r" % (a,))
        kp[0] = np.sqrt(2.0 / N)
        kp[1] = 1.0 / N
        kp[2] = a

    return ModelSpec(kind, N, params, _CODE[kind], kp, clamp)


def limit_kernels(spec):
    """Analytic N -> infinity kernels for the model kind."""
    kind = spec.kind
    p = spec.params
    if kind in ("Wishart", "ScaledWishart"):
        c = p["P"] / spec.n_particles
        return LimitKernels(c, 0.0, 0.0, 1.0, 0.0, 2.0)
    if kind == "WishartDrifted":
        return LimitKernels(float(p.get("c", 1.0)), 0.0, 0.0, 1.0, 0.0, 2.0)
    if kind in ("Dyson", "ScaledDyson"):
        return LimitKernels(0.0, 0.0, 1.0, 0.0, 0.0, 2.0)
    if kind == "DysonDrifted":
        return LimitKernels(float(p.get("c", 0.0)), 0.0, 1.0, 0.0, 0.0, 2.0)
    if kind == "OrnsteinUhlenbeck":
        return LimitKernels(0.0, -0.5, 0.5, 0.0, 0.0, 2.0)
    if kind == "OUDrifted":
        return LimitKernels(float(p.get("c", 0.0)), -0.5, 0.5, 0.0, 0.0, 2.0)
    if kind == "GeneralizedWishart":
        s0 = float(p.get("g_scale", 1.0))
        if p.get("g_family", "sqrt") == "sqrt":
            return LimitKernels(float(p.get("b0", 0.0)), float(p.get("b1", 0.0)),
                                0.0, s0 * s0, 0.0, 2.0)
        return LimitKernels(float(p.get("b0", 0.0)), float(p.get("b1", 0.0)),
                            2.0 * s0 * s0, 0.0, 0.0, 2.0)
    if kind == "ParticleSystem":
        return LimitKernels(float(p.get("b0", 0.0)), float(p.get("b1", 0.0)),
                            float(p.get("h0", 1.0)), 0.0,
                            float(p.get("sigma0", 1.0)), 1.0)
    raise UnknownKind("unknown model kind %r" % (kind,))


def eval_drift(spec, positions, t=0.0):
    """Exact drift vector b_N(x_i) + sum_j K_N(x_i, x_j) / (x_i - x_j)."""
    x = np.asarray(positions, dtype=float)
    if x.size > 1 and np.min(np.diff(x)) <= 0.0:
        raise CollidingState("positions must be strictly increasing")
    with np.errstate(divide="ignore", invalid="ignore"):
        return kernels._drift_numpy(spec.code, spec.kp, x, float(t), 0.0)
