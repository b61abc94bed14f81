"""Timing comparison between the compiled and pure numpy trajectory loops.

Run as ``python -m eigenflow.benchmark``.  Both backends are driven with
identical noise, so agreement is checked with allclose alongside timing.
"""

import time

import numpy as np

from . import kernels
from .backend import BACKEND, HAVE_NUMBA
from .engine import StepControl, simulate
from .ensembles import warm_start
from .models import build_model
from .rng import stream


def _run_once(loop, spec, x0, n_steps, dt, zbase, zpool):
    cap = n_steps + zpool.shape[0] + 1
    grid = np.zeros(cap)
    states = np.zeros((cap, spec.n_particles))
    dnoise = np.zeros((1, spec.n_particles))
    return loop(spec.code, spec.kp, x0, n_steps, dt, 3e-4, 2, True,
                spec.clamp, zbase, zpool, grid, states, dnoise, False), states


def run_benchmark(n_particles=200, n_steps=500, repeats=3, seed=1234):
    """Time both loop implementations on one Dyson trajectory workload."""
    spec = build_model("Dyson", n_particles)
    dt = 1e-3
    x0 = warm_start(spec, 0.5, seed)
    zbase = stream(seed, 0).standard_normal((n_steps, n_particles))
    zpool = stream(seed, 1).standard_normal((4096, n_particles))

    results = {}
    outputs = {}
    variants = [("numba", kernels.trajectory_loop)] if HAVE_NUMBA else []
    variants.append(("numpy", kernels.trajectory_loop_numpy))
    for name, loop in variants:
        _run_once(loop, spec, x0.copy(), 8, dt, zbase, zpool)
        best = float("inf")
        for _ in range(repeats):
            t = time.perf_counter()
            (_, _, status), states = _run_once(loop, spec, x0.copy(), n_steps,
                                               dt, zbase, zpool)
            best = min(best, time.perf_counter() - t)
            if status != kernels.OK:
                raise RuntimeError("%s loop failed with status %d" % (name, status))
        results[name] = best
        outputs[name] = states

    # Agreement is checked on a short horizon: over long runs the two
    # backends' rounding differences flip gap-guard decisions and the
    # paths diverge even though each is individually correct.
    agree = True
    if HAVE_NUMBA:
        short = {}
        for name, loop in variants:
            (sr, _, _), st = _run_once(loop, spec, x0.copy(), 50, dt,
                                       zbase, zpool)
            short[name] = st[:sr]
        agree = bool(np.allclose(short["numba"], short["numpy"],
                                 rtol=1e-10, atol=1e-12))
    return {"timings_s": results, "agree": agree, "backend": BACKEND,
            "n_particles": n_particles, "n_steps": n_steps}


def main():
    rep = run_benchmark()
    for name, t in sorted(rep["timings_s"].items()):
        print("%-8s %8.4f s  (%d particles, %d steps)"
              % (name, t, rep["n_particles"], rep["n_steps"]))
    if len(rep["timings_s"]) == 2:
        ratio = rep["timings_s"]["numpy"] / rep["timings_s"]["numba"]
        print("speedup: %.1fx, outputs agree: %s" % (ratio, rep["agree"]))
    else:
        print("single backend available (%s)" % rep["backend"])


if __name__ == "__main__":
    main()
