"""Exact samplers for the stationary spectral ensembles.

Scaled Laguerre is the spectrum of G^T G / N with G a P x N standard
Gaussian matrix; scaled GOE is the spectrum of a symmetric Gaussian
matrix with diagonal variance 2/N and off-diagonal variance 1/N.  These
are the invariant laws of the time-changed Wishart and Dyson flows, and
they also give exact-in-law warm starts for zero initial conditions.
"""

import numpy as np

from .errors import InvalidParams
from .models import build_model
from .oracle import jacobi_eigenvalues
from .rng import STREAM_ENSEMBLE, STREAM_INIT, stream


class EnsembleSample:
    """Sorted spectrum drawn from one of the built-in ensembles."""

    __slots__ = ("positions", "kind")

    def __init__(self, positions, kind):
        self.positions = np.asarray(positions, dtype=float)
        self.kind = kind

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write(",".join(repr(float(v)) for v in self.positions) + "\n")


def sample_scaled_laguerre(N, P, seed=0):
    """Spectrum of G^T G / N, G a P x N standard normal matrix."""
    N = int(N)
    if N < 1:
        raise InvalidParams("N must be >= 1")
    if int(P) != P or P <= N - 1:
        raise InvalidParams("scaled Laguerre requires integer P > N-1, got %r" % (P,))
    g = stream(seed, STREAM_ENSEMBLE).standard_normal((int(P), N))
    vals = jacobi_eigenvalues(g.T @ g / N)
    return EnsembleSample(np.maximum(vals, 0.0), "ScaledLaguerre")


def sample_scaled_goe(N, seed=0):
    """Spectrum of a symmetric Gaussian matrix, diag var 2/N, offdiag 1/N."""
    N = int(N)
    if N < 1:
        raise InvalidParams("N must be >= 1")
    z = stream(seed, STREAM_ENSEMBLE).standard_normal((N, N))
    m = np.triu(z, 1) / np.sqrt(N)
    m = m + m.T
    np.fill_diagonal(m, np.sqrt(2.0 / N) * np.diag(z))
    return EnsembleSample(jacobi_eigenvalues(m), "ScaledGOE")


def make_initial(kind, N, params=None, seed=0, model_kind="Dyson"):
    """Initial condition builders used by the experiment harness.

    Zero: all zeros.  Ensemble: a fresh ensemble sample (Laguerre for
    Wishart-type models, GOE otherwise).  DominatedEnsemble(a, b):
    sqrt(a) * xi + u with u uniform on [-b, b] for Dyson/OU, or
    a * xi * u with u uniform on [0, 1] for Wishart, so the domination
    hypotheses hold by construction.  Explicit: the given vector sorted.
    """
    params = dict(params or {})
    N = int(N)
    if N < 1:
        raise InvalidParams("N must be >= 1")
    wishart_like = model_kind in ("Wishart", "WishartDrifted", "GeneralizedWishart",
                                  "ScaledWishart")
    if kind == "Zero":
        return np.zeros(N)
    if kind == "Explicit":
        vec = params.get("positions")
        if vec is None or len(vec) != N:
            raise InvalidParams("Explicit initial condition needs %d positions" % N)
        return np.sort(np.asarray(vec, dtype=float))
    if kind == "Ensemble":
        if wishart_like:
            return sample_scaled_laguerre(N, params.get("P", 2 * N), seed).positions
        return sample_scaled_goe(N, seed).positions
    if kind == "DominatedEnsemble":
        a = float(params.get("a", 1.0))
        b = float(params.get("b", 0.0))
        if a < 0.0 or b < 0.0:
            raise InvalidParams("DominatedEnsemble requires a >= 0 and b >= 0")
        rng = stream(seed, STREAM_INIT)
        if wishart_like:
            xi = sample_scaled_laguerre(N, params.get("P", 2 * N), seed).positions
            return np.sort(a * xi * rng.uniform(0.0, 1.0, N))
        xi = sample_scaled_goe(N, seed).positions
        return np.sort(np.sqrt(a) * xi + rng.uniform(-b, b, N))
    raise InvalidParams("unknown initial-condition kind %r" % (kind,))


def warm_start(spec, t0, seed):
    """Exact-in-law state at a small time t0 for a zero initial condition.

    From zero initial data the three eigenvalue flows have known marginal
    laws: Dyson at t0 is sqrt(t0) times a scaled GOE spectrum, Wishart at
    t0 is t0 times a scaled Laguerre spectrum, and OU at t0 is
    e^{-t0/2} sqrt(e^{t0} - 1) / sqrt(2) times a scaled GOE spectrum.
    Sampling this state sidesteps integrating away from the fully
    collided zero configuration.
    """
    N = spec.n_particles
    if spec.kind in ("Wishart", "WishartDrifted"):
        P = spec.params.get("P")
        if P is None:
            # drifted variants target the constant c; use the matched P
            P = int(round(spec.params.get("c", 1.0) * N))
        return t0 * sample_scaled_laguerre(N, P, seed).positions
    if spec.kind in ("Dyson", "DysonDrifted"):
        x = np.sqrt(t0) * sample_scaled_goe(N, seed).positions
        return np.sort(x + spec.params.get("c", 0.0) * t0) if \
            spec.kind == "DysonDrifted" else x
    if spec.kind in ("OrnsteinUhlenbeck", "OUDrifted"):
        scale = np.exp(-0.5 * t0) * np.sqrt(np.expm1(t0)) / np.sqrt(2.0)
        return scale * sample_scaled_goe(N, seed).positions
    raise InvalidParams("no warm start law for kind %r" % (spec.kind,))


def scaled_model(base_kind, N, params=None):
    """Time-changed stationary SDE wrapper for the scaling lemmas.

    base_kind "Wishart" -> du = 2 sqrt(u / (N (t+a))) dW + drift/(t+a) dt;
    base_kind "Dyson" -> du = sqrt(2 / (N (t+a))) dW + drift/(t+a) dt.
    Both leave their ensemble law invariant in t.
    """
    params = dict(params or {})
    if base_kind == "Wishart":
        return build_model("ScaledWishart", N, params)
    if base_kind == "Dyson":
        return build_model("ScaledDyson", N, params)
    raise InvalidParams("no scaled wrapper for kind %r" % (base_kind,))
