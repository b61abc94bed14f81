"""Matrix-valued ground truth for the eigenvalue particle systems.

Simulates the full symmetric matrix processes entrywise (Brownian and
Wishart entries by Gaussian increments, Ornstein-Uhlenbeck entries by
their exact transition) and diagonalizes with an in-repo Jacobi solver,
so particle-SDE output can be checked against an independent pipeline.
"""

import numpy as np

from . import kernels
from .engine import Trajectory
from .errors import InvalidParams, NoConvergence, TooLarge
from .rng import stream

MAX_N = 512

_JACOBI_TOL = 1e-12
_JACOBI_SWEEPS = 100


def jacobi_eigenvalues(matrix):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Iterates until the off-diagonal Frobenius norm is below
    1e-12 * ||matrix||_F; returns them sorted ascending.
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidParams("matrix must be square")
    if not np.all(np.isfinite(a)):
        raise InvalidParams("matrix has non-finite entries")
    if not np.array_equal(a, a.T):
        a = 0.5 * (a + a.T)
    sweeps = kernels.jacobi_loop(a, _JACOBI_TOL, _JACOBI_SWEEPS)
    if sweeps < 0:
        raise NoConvergence("Jacobi did not converge in %d sweeps" % _JACOBI_SWEEPS)
    return np.sort(np.diag(a))


def _symmetrize_increment(z, diag_scale, off_scale):
    """Symmetric Gaussian increment with given entry scales."""
    m = off_scale * np.triu(z, 1)
    m = m + m.T
    np.fill_diagonal(m, diag_scale * np.diag(z))
    return m


def simulate_matrix(kind, N, P=None, horizon=1.0, dt=1e-2, seed=0,
                    init_spectrum=None):
    """Eigenvalue trajectory of a matrix process on a uniform grid.

    kinds: "SymmetricBM" (entries of (B + B^T)/sqrt(2N)), "Wishart"
    (B^T B / N with B of shape P x N), "OU" (symmetric matrix of OU
    entries, stationary variance (1 + delta_ij) / (2N), advanced by the
    exact Gaussian transition).  The initial condition is the diagonal
    matrix of ``init_spectrum`` (zero matrix if omitted).
    """
    N = int(N)
    if N < 1:
        raise InvalidParams("N must be >= 1")
    if N > MAX_N:
        raise TooLarge("N=%d exceeds the eigensolver budget %d" % (N, MAX_N))
    if kind not in ("SymmetricBM", "Wishart", "OU"):
        raise InvalidParams("unknown matrix kind %r" % (kind,))
    T = float(horizon)
    n_steps = max(0, int(round(T / dt)))
    grid = np.arange(n_steps + 1) * dt
    rng = stream(seed, 0)
    out = np.zeros((n_steps + 1, N))

    if kind == "Wishart":
        if P is None or int(P) != P or P <= N - 1:
            raise InvalidParams("Wishart requires integer P > N-1, got %r" % (P,))
        P = int(P)
        # B^T B / N started from diag(spectrum): embed as B(0) with
        # orthogonal rows scaled by sqrt(N * lambda_i)
        B = np.zeros((P, N))
        if init_spectrum is not None:
            s = np.asarray(init_spectrum, dtype=float)
            if np.any(s < 0.0):
                raise InvalidParams("Wishart spectrum must be nonnegative")
            B[:N, :] = np.diag(np.sqrt(N * s))
        out[0] = jacobi_eigenvalues(B.T @ B / N)
        for k in range(n_steps):
            B = B + np.sqrt(dt) * rng.standard_normal((P, N))
            out[k + 1] = jacobi_eigenvalues(B.T @ B / N)
        return Trajectory(grid, out, None, seed)

    if kind == "SymmetricBM":
        X = np.diag(np.asarray(init_spectrum, dtype=float)) if \
            init_spectrum is not None else np.zeros((N, N))
        out[0] = jacobi_eigenvalues(X)
        # (B + B^T)/sqrt(2N): diagonal variance 2/N per unit time,
        # off-diagonal 1/N
        dscale = np.sqrt(2.0 / N)
        oscale = np.sqrt(1.0 / N)
        for k in range(n_steps):
            z = rng.standard_normal((N, N))
            X = X + np.sqrt(dt) * _symmetrize_increment(z, dscale, oscale)
            out[k + 1] = jacobi_eigenvalues(X)
        return Trajectory(grid, out, None, seed)

    # OU: exact transition X(t+dt) = e^{-dt/2} X(t) + sigma_ij sqrt(1-e^{-dt}) Z
    X = np.diag(np.asarray(init_spectrum, dtype=float)) if \
        init_spectrum is not None else np.zeros((N, N))
    out[0] = jacobi_eigenvalues(X)
    decay = np.exp(-0.5 * dt)
    amp = np.sqrt(1.0 - np.exp(-dt))
    dscale = amp * 2.0 / (2.0 * np.sqrt(N))
    oscale = amp * np.sqrt(2.0) / (2.0 * np.sqrt(N))
    for k in range(n_steps):
        z = rng.standard_normal((N, N))
        X = decay * X + _symmetrize_increment(z, dscale, oscale)
        out[k + 1] = jacobi_eigenvalues(X)
    return Trajectory(grid, out, None, seed)
