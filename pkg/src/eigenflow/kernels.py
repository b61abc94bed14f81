"""Hot numeric kernels: pairwise drift, trajectory loops, Jacobi eigensolver.

Each kernel has a numba-compiled loop implementation and a vectorized
numpy fallback; :mod:`eigenflow.backend` decides which one the engine
uses.  Model coefficients are dispatched on an integer code with a small
float parameter vector ``kp`` prepared by :mod:`eigenflow.models`, so the
compiled loops never touch Python objects.
"""

import numpy as np

from .backend import HAVE_NUMBA, njit

# model codes
GENERALIZED = 0
WISHART = 1
WISHART_DRIFTED = 2
DYSON = 3
DYSON_DRIFTED = 4
OU = 5
OU_DRIFTED = 6
PARTICLE = 7
SCALED_WISHART = 8
SCALED_DYSON = 9

NPARAMS = 6

# trajectory loop status codes
OK = 0
POOL_EXHAUSTED = 1
MAX_SUBSTEPS = 2
NON_FINITE = 3


# ---------------------------------------------------------------------------
# scalar coefficients (compiled into the loops)
# ---------------------------------------------------------------------------

def _drift_b(code, kp, x, t):
    if code == GENERALIZED:
        return kp[2] + kp[3] * x
    if code == WISHART:
        return kp[0]
    if code == WISHART_DRIFTED:
        return kp[0] + kp[3] * np.sin(x)
    if code == DYSON:
        return 0.0
    if code == DYSON_DRIFTED:
        return kp[2] + kp[3] * np.sin(x)
    if code == OU:
        return -0.5 * x
    if code == OU_DRIFTED:
        return -0.5 * x + kp[2] + kp[3] * np.sin(x)
    if code == PARTICLE:
        return kp[1] + kp[2] * x
    if code == SCALED_WISHART:
        return (kp[0] - x) / (t + kp[3])
    # SCALED_DYSON
    return -0.5 * x / (t + kp[2])


def _diffusion(code, kp, x, t):
    if code == GENERALIZED:
        if kp[0] > 0.5:
            return 2.0 * kp[1] * np.sqrt(max(x, 0.0))
        return 2.0 * kp[1]
    if code == WISHART or code == WISHART_DRIFTED:
        return kp[2] * np.sqrt(max(x, 0.0))
    if code == DYSON or code == DYSON_DRIFTED:
        return kp[0]
    if code == OU or code == OU_DRIFTED:
        return kp[0]
    if code == PARTICLE:
        return kp[0]
    if code == SCALED_WISHART:
        return kp[2] * np.sqrt(max(x, 0.0) / (t + kp[3]))
    # SCALED_DYSON
    return kp[0] / np.sqrt(t + kp[2])


def _pair_kernel(code, kp, x, y, t):
    """G_N(x, y) including its 1/N scale (the full interaction numerator)."""
    if code == GENERALIZED:
        if kp[0] > 0.5:
            gx = kp[1] * np.sqrt(max(x, 0.0))
            gy = kp[1] * np.sqrt(max(y, 0.0))
        else:
            gx = kp[1]
            gy = kp[1]
        return gx * gx + gy * gy
    if code == WISHART or code == WISHART_DRIFTED:
        return (x + y) * kp[1]
    if code == DYSON or code == DYSON_DRIFTED:
        return kp[1]
    if code == OU or code == OU_DRIFTED:
        return kp[1]
    if code == PARTICLE:
        return kp[3]
    if code == SCALED_WISHART:
        return (x + y) * kp[1] / (t + kp[3])
    # SCALED_DYSON
    return kp[1] / (t + kp[2])


def _drift_into(code, kp, x, t, min_gap, out):
    """Full drift vector for a sorted state; gaps below min_gap saturate."""
    n = x.size
    for i in range(n):
        out[i] = _drift_b(code, kp, x[i], t)
    for i in range(n - 1):
        xi = x[i]
        for j in range(i + 1, n):
            gap = x[j] - xi
            if gap < min_gap:
                gap = min_gap
            w = _pair_kernel(code, kp, xi, x[j], t) / gap
            out[i] -= w
            out[j] += w


def _trajectory_loop(code, kp, x0, n_steps, dt, min_gap, max_substeps,
                     saturate, clamp, zbase, zpool, grid, states, dnoise,
                     record_noise):
    """Euler-Maruyama loop with joint step-halving near collisions.

    Row 0 of ``states`` is the (sorted) initial state.  Returns
    (rows_written, pool_draws_consumed, status).  A base step that would
    push the minimum gap below ``min_gap`` is retried from its start at
    half the step size (fresh pool noise) up to ``max_substeps`` times,
    then taken with the saturated interaction drift.
    """
    n = x0.size
    for i in range(n):
        states[0, i] = x0[i]
    grid[0] = 0.0
    row = 0
    pool_used = 0
    drift = np.empty(n)
    prop = np.empty(n)
    xs = np.empty(n)
    for k in range(n_steps):
        t0 = grid[row]
        level = 0
        start_row = row
        while True:
            nsub = 1 << level
            sub = dt / nsub
            sq = np.sqrt(sub)
            ok = True
            for i in range(n):
                xs[i] = states[start_row, i]
            row = start_row
            for ssub in range(nsub):
                tcur = t0 + ssub * sub
                if level == 0:
                    zoff = -1  # use zbase[k]
                else:
                    if pool_used >= zpool.shape[0]:
                        return row, pool_used, POOL_EXHAUSTED
                    zoff = pool_used
                    pool_used += 1
                _drift_into(code, kp, xs, tcur, min_gap, drift)
                bad = False
                for i in range(n):
                    z = zbase[k, i] if zoff < 0 else zpool[zoff, i]
                    v = xs[i] + drift[i] * sub + _diffusion(code, kp, xs[i], tcur) * sq * z
                    if not np.isfinite(v):
                        bad = True
                    prop[i] = v
                if bad:
                    if level >= max_substeps:
                        return row, pool_used, NON_FINITE
                    ok = False
                    break
                if clamp:
                    for i in range(n):
                        if prop[i] < 0.0:
                            prop[i] = 0.0
                y = np.sort(prop)
                viol = False
                for i in range(n - 1):
                    if y[i + 1] - y[i] < min_gap:
                        viol = True
                        break
                if viol and level < max_substeps:
                    ok = False
                    break
                if viol and not saturate:
                    return row, pool_used, MAX_SUBSTEPS
                row += 1
                if ssub == nsub - 1:
                    grid[row] = (k + 1) * dt
                else:
                    grid[row] = t0 + (ssub + 1) * sub
                for i in range(n):
                    states[row, i] = y[i]
                    if record_noise:
                        dnoise[row - 1, i] = sq * (zbase[k, i] if zoff < 0 else zpool[zoff, i])
                    xs[i] = y[i]
            if ok:
                break
            level += 1
    return row, pool_used, OK


def _coupled_loop(code_lo, kp_lo, code_hi, kp_hi, x0_lo, x0_hi, n_steps, dt,
                  min_gap, max_substeps, saturate, clamp, zbase, zpool,
                  grid, states_lo, states_hi):
    """Advance two systems on identical Brownian increments and grid.

    Substep decisions are made jointly: a violation in either system
    halves the step for both, so the realized grids coincide exactly.
    """
    n = x0_lo.size
    for i in range(n):
        states_lo[0, i] = x0_lo[i]
        states_hi[0, i] = x0_hi[i]
    grid[0] = 0.0
    row = 0
    pool_used = 0
    drift = np.empty(n)
    prop_lo = np.empty(n)
    prop_hi = np.empty(n)
    xlo = np.empty(n)
    xhi = np.empty(n)
    for k in range(n_steps):
        t0 = grid[row]
        level = 0
        start_row = row
        while True:
            nsub = 1 << level
            sub = dt / nsub
            sq = np.sqrt(sub)
            ok = True
            for i in range(n):
                xlo[i] = states_lo[start_row, i]
                xhi[i] = states_hi[start_row, i]
            row = start_row
            for ssub in range(nsub):
                tcur = t0 + ssub * sub
                if level == 0:
                    zoff = -1
                else:
                    if pool_used >= zpool.shape[0]:
                        return row, pool_used, POOL_EXHAUSTED
                    zoff = pool_used
                    pool_used += 1
                bad = False
                _drift_into(code_lo, kp_lo, xlo, tcur, min_gap, drift)
                for i in range(n):
                    z = zbase[k, i] if zoff < 0 else zpool[zoff, i]
                    v = xlo[i] + drift[i] * sub + _diffusion(code_lo, kp_lo, xlo[i], tcur) * sq * z
                    if not np.isfinite(v):
                        bad = True
                    prop_lo[i] = v
                _drift_into(code_hi, kp_hi, xhi, tcur, min_gap, drift)
                for i in range(n):
                    z = zbase[k, i] if zoff < 0 else zpool[zoff, i]
                    v = xhi[i] + drift[i] * sub + _diffusion(code_hi, kp_hi, xhi[i], tcur) * sq * z
                    if not np.isfinite(v):
                        bad = True
                    prop_hi[i] = v
                if bad:
                    if level >= max_substeps:
                        return row, pool_used, NON_FINITE
                    ok = False
                    break
                if clamp:
                    for i in range(n):
                        if prop_lo[i] < 0.0:
                            prop_lo[i] = 0.0
                        if prop_hi[i] < 0.0:
                            prop_hi[i] = 0.0
                ylo = np.sort(prop_lo)
                yhi = np.sort(prop_hi)
                viol = False
                for i in range(n - 1):
                    if ylo[i + 1] - ylo[i] < min_gap or yhi[i + 1] - yhi[i] < min_gap:
                        viol = True
                        break
                if viol and level < max_substeps:
                    ok = False
                    break
                if viol and not saturate:
                    return row, pool_used, MAX_SUBSTEPS
                row += 1
                if ssub == nsub - 1:
                    grid[row] = (k + 1) * dt
                else:
                    grid[row] = t0 + (ssub + 1) * sub
                for i in range(n):
                    states_lo[row, i] = ylo[i]
                    states_hi[row, i] = yhi[i]
                    xlo[i] = ylo[i]
                    xhi[i] = yhi[i]
            if ok:
                break
            level += 1
    return row, pool_used, OK


def _jacobi_loop(a, tol_rel, max_sweeps):
    """Cyclic Jacobi on a symmetric matrix (in place); returns sweep count.

    Stops when the off-diagonal Frobenius norm drops below
    ``tol_rel * ||a||_F``.  Returns -1 if that never happens.
    """
    n = a.shape[0]
    norm = 0.0
    for i in range(n):
        for j in range(n):
            norm += a[i, j] * a[i, j]
    norm = np.sqrt(norm)
    if norm == 0.0:
        return 0
    thresh = tol_rel * norm
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                off += 2.0 * a[i, j] * a[i, j]
        if np.sqrt(off) < thresh:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for i in range(n):
                    aip = a[i, p]
                    aiq = a[i, q]
                    a[i, p] = c * aip - s * aiq
                    a[i, q] = s * aip + c * aiq
                for i in range(n):
                    api = a[p, i]
                    aqi = a[q, i]
                    a[p, i] = c * api - s * aqi
                    a[q, i] = s * api + c * aqi
    # converged late?
    off = 0.0
    for i in range(n - 1):
        for j in range(i + 1, n):
            off += 2.0 * a[i, j] * a[i, j]
    if np.sqrt(off) < thresh:
        return max_sweeps
    return -1


# ---------------------------------------------------------------------------
# numpy fallback implementations
# ---------------------------------------------------------------------------

def _drift_numpy(code, kp, x, t, min_gap):
    """Vectorized drift for a sorted state (numpy backend)."""
    n = x.size
    b = np.array([_drift_b(code, kp, xi, t) for xi in x]) if code in (
        GENERALIZED, WISHART_DRIFTED, DYSON_DRIFTED, OU_DRIFTED) else None
    if b is None:
        if code == WISHART:
            b = np.full(n, kp[0])
        elif code == DYSON:
            b = np.zeros(n)
        elif code == OU:
            b = -0.5 * x
        elif code == PARTICLE:
            b = kp[1] + kp[2] * x
        elif code == SCALED_WISHART:
            b = (kp[0] - x) / (t + kp[3])
        elif code == SCALED_DYSON:
            b = -0.5 * x / (t + kp[2])
    if n == 1:
        return b
    d = x[:, None] - x[None, :]
    sign = np.sign(np.arange(n)[:, None] - np.arange(n)[None, :])
    small = np.abs(d) < min_gap
    d = np.where(small, min_gap * np.where(sign == 0, 1.0, sign), d)
    if code in (WISHART, WISHART_DRIFTED):
        g = (x[:, None] + x[None, :]) * kp[1]
    elif code in (DYSON, DYSON_DRIFTED, OU, OU_DRIFTED):
        g = np.full((n, n), kp[1])
    elif code == PARTICLE:
        g = np.full((n, n), kp[3])
    elif code == SCALED_WISHART:
        g = (x[:, None] + x[None, :]) * kp[1] / (t + kp[3])
    elif code == SCALED_DYSON:
        g = np.full((n, n), kp[1] / (t + kp[2]))
    else:  # GENERALIZED
        if kp[0] > 0.5:
            gs = (kp[1] ** 2) * np.maximum(x, 0.0)
        else:
            gs = np.full(n, kp[1] ** 2)
        g = gs[:, None] + gs[None, :]
    w = g / d
    np.fill_diagonal(w, 0.0)
    return b + w.sum(axis=1)


def _diffusion_numpy(code, kp, x, t):
    if code == GENERALIZED:
        if kp[0] > 0.5:
            return 2.0 * kp[1] * np.sqrt(np.maximum(x, 0.0))
        return np.full(x.size, 2.0 * kp[1])
    if code in (WISHART, WISHART_DRIFTED):
        return kp[2] * np.sqrt(np.maximum(x, 0.0))
    if code in (DYSON, DYSON_DRIFTED, OU, OU_DRIFTED, PARTICLE):
        return np.full(x.size, kp[0])
    if code == SCALED_WISHART:
        return kp[2] * np.sqrt(np.maximum(x, 0.0) / (t + kp[3]))
    return np.full(x.size, kp[0] / np.sqrt(t + kp[2]))


def _trajectory_loop_numpy(code, kp, x0, n_steps, dt, min_gap, max_substeps,
                           saturate, clamp, zbase, zpool, grid, states,
                           dnoise, record_noise):
    n = x0.size
    states[0, :] = x0
    grid[0] = 0.0
    row = 0
    pool_used = 0
    for k in range(n_steps):
        t0 = grid[row]
        level = 0
        start_row = row
        while True:
            nsub = 1 << level
            sub = dt / nsub
            sq = np.sqrt(sub)
            ok = True
            xs = states[start_row].copy()
            row = start_row
            for ssub in range(nsub):
                tcur = t0 + ssub * sub
                if level == 0:
                    z = zbase[k]
                else:
                    if pool_used >= zpool.shape[0]:
                        return row, pool_used, POOL_EXHAUSTED
                    z = zpool[pool_used]
                    pool_used += 1
                drift = _drift_numpy(code, kp, xs, tcur, min_gap)
                prop = xs + drift * sub + _diffusion_numpy(code, kp, xs, tcur) * sq * z
                if not np.all(np.isfinite(prop)):
                    if level >= max_substeps:
                        return row, pool_used, NON_FINITE
                    ok = False
                    break
                if clamp:
                    np.maximum(prop, 0.0, out=prop)
                y = np.sort(prop)
                viol = n > 1 and np.min(np.diff(y)) < min_gap
                if viol and level < max_substeps:
                    ok = False
                    break
                if viol and not saturate:
                    return row, pool_used, MAX_SUBSTEPS
                row += 1
                grid[row] = (k + 1) * dt if ssub == nsub - 1 else t0 + (ssub + 1) * sub
                states[row, :] = y
                if record_noise:
                    dnoise[row - 1, :] = sq * z
                xs = y
            if ok:
                break
            level += 1
    return row, pool_used, OK


def _coupled_loop_numpy(code_lo, kp_lo, code_hi, kp_hi, x0_lo, x0_hi,
                        n_steps, dt, min_gap, max_substeps, saturate, clamp,
                        zbase, zpool, grid, states_lo, states_hi):
    n = x0_lo.size
    states_lo[0, :] = x0_lo
    states_hi[0, :] = x0_hi
    grid[0] = 0.0
    row = 0
    pool_used = 0
    for k in range(n_steps):
        t0 = grid[row]
        level = 0
        start_row = row
        while True:
            nsub = 1 << level
            sub = dt / nsub
            sq = np.sqrt(sub)
            ok = True
            xlo = states_lo[start_row].copy()
            xhi = states_hi[start_row].copy()
            row = start_row
            for ssub in range(nsub):
                tcur = t0 + ssub * sub
                if level == 0:
                    z = zbase[k]
                else:
                    if pool_used >= zpool.shape[0]:
                        return row, pool_used, POOL_EXHAUSTED
                    z = zpool[pool_used]
                    pool_used += 1
                plo = xlo + _drift_numpy(code_lo, kp_lo, xlo, tcur, min_gap) * sub \
                    + _diffusion_numpy(code_lo, kp_lo, xlo, tcur) * sq * z
                phi = xhi + _drift_numpy(code_hi, kp_hi, xhi, tcur, min_gap) * sub \
                    + _diffusion_numpy(code_hi, kp_hi, xhi, tcur) * sq * z
                if not (np.all(np.isfinite(plo)) and np.all(np.isfinite(phi))):
                    if level >= max_substeps:
                        return row, pool_used, NON_FINITE
                    ok = False
                    break
                if clamp:
                    np.maximum(plo, 0.0, out=plo)
                    np.maximum(phi, 0.0, out=phi)
                ylo = np.sort(plo)
                yhi = np.sort(phi)
                viol = n > 1 and (np.min(np.diff(ylo)) < min_gap or np.min(np.diff(yhi)) < min_gap)
                if viol and level < max_substeps:
                    ok = False
                    break
                if viol and not saturate:
                    return row, pool_used, MAX_SUBSTEPS
                row += 1
                grid[row] = (k + 1) * dt if ssub == nsub - 1 else t0 + (ssub + 1) * sub
                states_lo[row, :] = ylo
                states_hi[row, :] = yhi
                xlo, xhi = ylo, yhi
            if ok:
                break
            level += 1
    return row, pool_used, OK


def _jacobi_numpy(a, tol_rel, max_sweeps):
    n = a.shape[0]
    norm = np.sqrt((a * a).sum())
    if norm == 0.0:
        return 0
    thresh = tol_rel * norm
    for sweep in range(max_sweeps):
        off = np.sqrt(2.0 * (np.triu(a, 1) ** 2).sum())
        if off < thresh:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta if theta != 0 else 1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
    off = np.sqrt(2.0 * (np.triu(a, 1) ** 2).sum())
    if off < thresh:
        return max_sweeps
    return -1


# ---------------------------------------------------------------------------
# backend dispatch
# ---------------------------------------------------------------------------

if HAVE_NUMBA:
    _drift_b = njit(cache=True, inline="always")(_drift_b)
    _diffusion = njit(cache=True, inline="always")(_diffusion)
    _pair_kernel = njit(cache=True, inline="always")(_pair_kernel)
    _drift_into = njit(cache=True, nogil=True)(_drift_into)
    trajectory_loop = njit(cache=True, nogil=True)(_trajectory_loop)
    coupled_loop = njit(cache=True, nogil=True)(_coupled_loop)
    jacobi_loop = njit(cache=True, nogil=True)(_jacobi_loop)
else:
    trajectory_loop = _trajectory_loop_numpy
    coupled_loop = _coupled_loop_numpy
    jacobi_loop = _jacobi_numpy

# both variants stay importable for the backend benchmark
trajectory_loop_numpy = _trajectory_loop_numpy
jacobi_loop_numpy = _jacobi_numpy


def drift_vector(code, kp, x, t, min_gap):
    """Drift of the full system at a sorted state (either backend)."""
    if HAVE_NUMBA:
        out = np.empty(x.size)
        _drift_into(code, kp, x, t, min_gap, out)
        return out
    return _drift_numpy(code, kp, x, t, min_gap)


def diffusion_vector(code, kp, x, t):
    return _diffusion_numpy(code, kp, np.asarray(x, dtype=float), t)
