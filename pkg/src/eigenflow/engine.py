"""Collision-safe Euler-Maruyama integration of the particle SDEs.

The integrator advances all particles jointly; whenever a proposed step
would push the minimum inter-particle gap below the guard it restarts the
base step at half the step size, up to a cap, after which the interaction
drift is saturated at the guard.  Trajectories record every realized
(sub)step so time integrals can use the exact grid.
"""

import numpy as np

from . import kernels
from .errors import (CollidingState, GridMismatch, InvalidInit,
                     MaxSubstepsExceeded, MismatchedModels, NonFinite)
from .rng import STREAM_BASE, STREAM_POOL, stream


class StepControl:
    """Discretization parameters for one simulation run."""

    __slots__ = ("dt", "min_gap", "max_substeps", "clamp_nonnegative", "saturate")

    def __init__(self, dt=1e-3, min_gap=None, max_substeps=8,
                 clamp_nonnegative=None, saturate=True):
        if dt <= 0.0:
            raise InvalidInit("dt must be > 0, got %r" % (dt,))
        if min_gap is not None and min_gap <= 0.0:
            raise InvalidInit("min_gap must be > 0, got %r" % (min_gap,))
        if max_substeps < 1:
            raise InvalidInit("max_substeps must be >= 1, got %r" % (max_substeps,))
        self.dt = float(dt)
        self.min_gap = None if min_gap is None else float(min_gap)
        self.max_substeps = int(max_substeps)
        self.clamp_nonnegative = clamp_nonnegative
        self.saturate = bool(saturate)

    def resolved_min_gap(self, init):
        """Default guard 1e-8 * (1 + spread of the initial condition)."""
        if self.min_gap is not None:
            return self.min_gap
        x = np.asarray(init, dtype=float)
        spread = float(x.max() - x.min()) if x.size else 0.0
        return 1e-8 * (1.0 + spread)


class ParticleState:
    """Positions of the N particles at one time, sorted ascending."""

    __slots__ = ("time", "positions")

    def __init__(self, time, positions):
        self.time = float(time)
        self.positions = np.asarray(positions, dtype=float)


class Trajectory:
    """Realized grid, per-stamp sorted positions, optional noise record."""

    __slots__ = ("grid", "positions", "noise", "seed")

    def __init__(self, grid, positions, noise=None, seed=0):
        self.grid = np.asarray(grid, dtype=float)
        self.positions = np.asarray(positions, dtype=float)
        self.noise = noise
        self.seed = seed

    @property
    def n_particles(self):
        return self.positions.shape[1]

    def state(self, k):
        return ParticleState(self.grid[k], self.positions[k])

    def to_csv(self, path):
        """Write rows `t,x1,...,xN` at full precision."""
        n = self.n_particles
        with open(path, "w") as fh:
            fh.write("t," + ",".join("x%d" % (i + 1) for i in range(n)) + "\n")
            for k in range(self.grid.size):
                fh.write(repr(float(self.grid[k])) + ","
                         + ",".join(repr(float(v)) for v in self.positions[k]) + "\n")


def step(spec, state, dt, noise):
    """One explicit Euler-Maruyama update with clamp and re-sort."""
    x = np.asarray(state.positions, dtype=float)
    noise = np.asarray(noise, dtype=float)
    if x.size > 1 and np.min(np.diff(x)) <= 0.0:
        raise CollidingState("input state has a zero gap")
    t = state.time
    drift = kernels.drift_vector(spec.code, spec.kp, x, t, 0.0) if x.size == 1 \
        else _exact_drift(spec, x, t)
    sigma = kernels.diffusion_vector(spec.code, spec.kp, x, t)
    y = x + drift * dt + sigma * noise
    if not np.all(np.isfinite(y)):
        raise NonFinite("update produced a non-finite coordinate")
    if spec.clamp:
        np.maximum(y, 0.0, out=y)
    return ParticleState(t + dt, np.sort(y))


def _exact_drift(spec, x, t):
    with np.errstate(divide="ignore", invalid="ignore"):
        return kernels._drift_numpy(spec.code, spec.kp, x, t, 0.0)


def _validate_init(spec, init, saturate=True):
    x = np.asarray(init, dtype=float).copy()
    if x.ndim != 1 or x.size != spec.n_particles:
        raise InvalidInit("init must be a vector of length %d" % spec.n_particles)
    if not np.all(np.isfinite(x)):
        raise InvalidInit("init has non-finite entries")
    if x.size > 1:
        gaps = np.diff(x)
        if np.min(gaps) < 0.0:
            raise InvalidInit("init must be sorted ascending")
        # Coinciding positions (e.g. the all-zero start) are allowed when
        # drift saturation is on: the gap guard bounds the singular term.
        if np.min(gaps) <= 0.0 and not saturate:
            raise InvalidInit("init has a zero gap; strict ordering is "
                              "required when saturation is disabled")
    if spec.clamp and x.size and x[0] < 0.0:
        raise InvalidInit("nonnegative model requires init >= 0")
    return x


def _run_loop(loop, n_particles, seed, pool0=4096):
    """Run a trajectory loop, growing the substep noise pool on demand.

    Pool draws are prefix-stable in the pool stream, so regenerating a
    larger pool and rerunning reproduces the identical path up to the
    point of exhaustion and then continues it.
    """
    pool_size = pool0
    while True:
        zpool = stream(seed, STREAM_POOL).standard_normal((pool_size, n_particles))
        result = loop(zpool)
        if result[-1] != kernels.POOL_EXHAUSTED:
            return result
        pool_size *= 2
        if pool_size > 1 << 22:
            raise MaxSubstepsExceeded("substep noise demand exceeded 2^22 draws")


def simulate(spec, init, horizon, control=None, seed=0, record_noise=False,
             pool0=4096):
    """Integrate the system on [0, horizon]; bit-reproducible in the seed."""
    control = control or StepControl()
    x0 = _validate_init(spec, init, control.saturate)
    T = float(horizon)
    if T < 0.0:
        raise InvalidInit("horizon must be >= 0")
    n_steps = int(round(T / control.dt))
    if T > 0.0 and n_steps == 0:
        n_steps = 1
    if n_steps == 0:
        return Trajectory(np.zeros(1), x0[None, :].copy(),
                          np.zeros((0, x0.size)) if record_noise else None, seed)
    N = x0.size
    min_gap = control.resolved_min_gap(x0)
    clamp = spec.clamp if control.clamp_nonnegative is None else bool(control.clamp_nonnegative)
    zbase = stream(seed, STREAM_BASE).standard_normal((n_steps, N))

    def runner(zpool):
        cap = n_steps + zpool.shape[0] + 1
        grid = np.zeros(cap)
        states = np.zeros((cap, N))
        dnoise = np.zeros((cap - 1, N)) if record_noise else np.zeros((1, N))
        rows, used, status = kernels.trajectory_loop(
            spec.code, spec.kp, x0, n_steps, control.dt, min_gap,
            control.max_substeps, control.saturate, clamp, zbase, zpool,
            grid, states, dnoise, record_noise)
        return grid, states, dnoise, rows, used, status

    grid, states, dnoise, rows, used, status = _run_loop(runner, N, seed,
                                                        pool0)
    if status == kernels.MAX_SUBSTEPS:
        raise MaxSubstepsExceeded("gap guard violated at max substeps with "
                                  "saturation disabled")
    if status == kernels.NON_FINITE:
        raise NonFinite("integration produced a non-finite state")
    noise = dnoise[:rows].copy() if record_noise else None
    return Trajectory(grid[:rows + 1].copy(), states[:rows + 1].copy(), noise, seed)


def _signature(spec):
    """Diffusion and interaction fingerprint used by coupled_simulate."""
    kp = spec.kp
    code = spec.code
    if code in (kernels.WISHART, kernels.WISHART_DRIFTED):
        return ("wishart", kp[1], kp[2])
    if code in (kernels.DYSON, kernels.DYSON_DRIFTED):
        return ("dyson", kp[0], kp[1])
    if code in (kernels.OU, kernels.OU_DRIFTED):
        return ("ou", kp[0], kp[1])
    if code == kernels.GENERALIZED:
        return ("generalized", kp[0], kp[1])
    if code == kernels.PARTICLE:
        return ("particle", kp[0], kp[3])
    return ("scaled", code) + tuple(kp)


def coupled_simulate(spec_low, spec_high, init_low, init_high, horizon,
                     control=None, seed=0, pool0=4096):
    """Advance two ordered systems on one Brownian source and one grid."""
    control = control or StepControl()
    if spec_low.n_particles != spec_high.n_particles:
        raise MismatchedModels("particle counts differ")
    if _signature(spec_low) != _signature(spec_high):
        raise MismatchedModels("diffusion or interaction kernels differ")
    xlo = _validate_init(spec_low, init_low, control.saturate)
    xhi = _validate_init(spec_high, init_high, control.saturate)
    T = float(horizon)
    n_steps = max(1, int(round(T / control.dt)))
    N = xlo.size
    min_gap = control.resolved_min_gap(np.concatenate([xlo, xhi]))
    clamp = spec_low.clamp or spec_high.clamp
    if control.clamp_nonnegative is not None:
        clamp = bool(control.clamp_nonnegative)
    zbase = stream(seed, STREAM_BASE).standard_normal((n_steps, N))

    def runner(zpool):
        cap = n_steps + zpool.shape[0] + 1
        grid = np.zeros(cap)
        states_lo = np.zeros((cap, N))
        states_hi = np.zeros((cap, N))
        rows, used, status = kernels.coupled_loop(
            spec_low.code, spec_low.kp, spec_high.code, spec_high.kp,
            xlo, xhi, n_steps, control.dt, min_gap, control.max_substeps,
            control.saturate, clamp, zbase, zpool, grid, states_lo, states_hi)
        return grid, states_lo, states_hi, rows, used, status

    grid, states_lo, states_hi, rows, used, status = _run_loop(
        runner, N, seed, pool0)
    if status == kernels.MAX_SUBSTEPS:
        raise MaxSubstepsExceeded("gap guard violated at max substeps with "
                                  "saturation disabled")
    if status == kernels.NON_FINITE:
        raise NonFinite("coupled integration produced a non-finite state")
    g = grid[:rows + 1].copy()
    return (Trajectory(g, states_lo[:rows + 1].copy(), None, seed),
            Trajectory(g.copy(), states_hi[:rows + 1].copy(), None, seed))


class OrderingReport:
    """Elementwise comparison of two trajectories on a shared grid."""

    __slots__ = ("fraction", "first_violation", "n_pairs")

    def __init__(self, fraction, first_violation, n_pairs):
        self.fraction = fraction
        self.first_violation = first_violation
        self.n_pairs = n_pairs


def check_ordering(traj_low, traj_high):
    """Fraction of (time, index) pairs with low <= high, first violation."""
    if traj_low.grid.shape != traj_high.grid.shape or \
            not np.array_equal(traj_low.grid, traj_high.grid):
        raise GridMismatch("trajectories have different grids")
    ok = traj_low.positions <= traj_high.positions
    n_pairs = ok.size
    frac = float(np.count_nonzero(ok)) / n_pairs
    first = None
    if frac < 1.0:
        k, i = np.argwhere(~ok)[0]
        first = (float(traj_low.grid[k]), int(i))
    return OrderingReport(frac, first, n_pairs)
