"""Experiment orchestration: config parsing, replica execution, reports.

Each experiment reproduces one theorem-level check.  All randomness is
derived from the config seed and the replica index through the
counter-based generator, so reports are identical across thread counts.
"""

import concurrent.futures
import hashlib
import json
import os
import time

import numpy as np

from . import fluctuations as fl
from . import limits, stats
from .engine import StepControl, check_ordering, coupled_simulate, simulate
from .ensembles import make_initial, sample_scaled_goe, sample_scaled_laguerre, \
    scaled_model, warm_start
from .errors import ConfigError, EigenflowError
from .models import build_model, limit_kernels
from .oracle import simulate_matrix
from .rng import replica_seed

EXPERIMENTS = ("Simulate", "Moments", "CLT", "Compare", "Stationarity",
               "Identity", "OracleMatch")

_TIMING_KEYS = ("wall_clock_s", "replicas_per_s")


class ExperimentConfig:
    """Validated experiment description (one JSON document per run)."""

    __slots__ = ("experiment", "model", "initial", "numerics", "replicas",
                 "seed", "output_dir", "raw")

    def __init__(self, experiment, model, initial, numerics, replicas, seed,
                 output_dir, raw):
        self.experiment = experiment
        self.model = model
        self.initial = initial
        self.numerics = numerics
        self.replicas = replicas
        self.seed = seed
        self.output_dir = output_dir
        self.raw = raw


def _req(d, key, path):
    if key not in d:
        raise ConfigError(path + key if path.endswith(".") or not path else key,
                          "missing required key")
    return d[key]


def parse_config(text):
    """Parse and validate a JSON experiment config."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("", "invalid JSON: %s" % e)
    if not isinstance(doc, dict):
        raise ConfigError("", "config must be a JSON object")
    exp = doc.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError("experiment", "must be one of %s" % (EXPERIMENTS,))
    if "seed" not in doc:
        raise ConfigError("seed", "seed is required; there is no entropy default")
    seed = doc["seed"]
    if not isinstance(seed, int):
        raise ConfigError("seed", "must be an integer")

    model = dict(doc.get("model") or {})
    if exp not in ("Moments",):
        if model:
            n = model.get("n_particles")
            if not isinstance(n, int) or n < 1:
                raise ConfigError("model.n_particles", "must be a positive integer")
    if model:
        kind = model.get("kind")
        n = model.get("n_particles", 1)
        try:
            build_model(kind, n, model.get("params") or {})
        except EigenflowError as e:
            raise ConfigError("model", str(e))

    numerics = dict(doc.get("numerics") or {})
    numerics.setdefault("T", 1.0)
    numerics.setdefault("dt", 1e-3)
    numerics.setdefault("max_substeps", 2)
    numerics.setdefault("K", 3)
    numerics.setdefault("resolution", 1e-3)
    if numerics["T"] < 0:
        raise ConfigError("numerics.T", "must be >= 0")
    if numerics["dt"] <= 0:
        raise ConfigError("numerics.dt", "must be > 0")
    if not (0 <= int(numerics["K"]) <= 12):
        raise ConfigError("numerics.K", "degrees must be between 0 and 12")

    replicas = doc.get("replicas", 1)
    if not isinstance(replicas, int) or replicas < 1:
        raise ConfigError("replicas", "must be an integer >= 1")

    initial = dict(doc.get("initial") or {"kind": "WarmStart"})
    out = doc.get("output", {}).get("dir", ".")
    return ExperimentConfig(exp, model, initial, numerics, replicas, seed, out, doc)


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def _control(cfg):
    num = cfg.numerics
    return StepControl(dt=num["dt"], min_gap=num.get("min_gap"),
                       max_substeps=int(num["max_substeps"]))


def _spec(cfg):
    m = cfg.model
    return build_model(m["kind"], m["n_particles"], m.get("params") or {})


def _initial_for(cfg, spec, rep_seed):
    ini = cfg.initial
    kind = ini.get("kind", "WarmStart")
    if kind == "WarmStart":
        t0 = float(ini.get("t0", 0.5))
        return warm_start(spec, t0, rep_seed), t0
    vec = make_initial(kind, spec.n_particles, ini.get("params") or {},
                       rep_seed, spec.kind)
    return vec, 0.0


def _map_replicas(fn, n, threads):
    """Replica map that is deterministic regardless of thread count."""
    if threads <= 1:
        return [fn(r) for r in range(n)]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, range(n)))


def _zero_init_moments(K):
    m = np.zeros(K + 2)
    m[0] = 1.0
    return m


def _moment_curve(cfg, spec, K):
    kern = limit_kernels(spec)
    init = _zero_init_moments(K)
    return limits.evolve_moments(kern, init, cfg.numerics["T"],
                                 cfg.numerics["resolution"], K)


def report_checksum(report):
    """SHA-256 of the canonical report JSON with timing fields removed."""
    trimmed = {k: v for k, v in report.items() if k not in _TIMING_KEYS}
    blob = json.dumps(trimmed, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _finish(report, out_dir, started):
    report["wall_clock_s"] = time.time() - started
    report["checksum"] = report_checksum(report)
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "report.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return report


def run_experiment(cfg, threads=1):
    """Dispatch one parsed experiment config; returns the report dict."""
    started = time.time()
    runner = {
        "Simulate": _run_simulate,
        "Moments": _run_moments,
        "CLT": _run_clt,
        "Compare": _run_compare,
        "Stationarity": _run_stationarity,
        "Identity": _run_identity,
        "OracleMatch": _run_oracle_match,
    }[cfg.experiment]
    report = runner(cfg, threads)
    report["experiment"] = cfg.experiment
    report["seed"] = cfg.seed
    report["summary_pass"] = all(c.get("passed", True) for c in report.get("checks", []))
    return _finish(report, cfg.output_dir, started)


# ---------------------------------------------------------------------------
# experiment bodies
# ---------------------------------------------------------------------------

def _run_simulate(cfg, threads):
    spec = _spec(cfg)
    ctl = _control(cfg)
    T = cfg.numerics["T"]
    os.makedirs(cfg.output_dir, exist_ok=True)

    def one(r):
        s = replica_seed(cfg.seed, r)
        x0, t0 = _initial_for(cfg, spec, s)
        traj = simulate(spec, x0, max(T - t0, 0.0), ctl, seed=s)
        path = os.path.join(cfg.output_dir, "trajectory_%d.csv" % r)
        traj.to_csv(path)
        return {"replica": r, "rows": int(traj.grid.size),
                "terminal_mean": float(traj.positions[-1].mean())}

    rows = _map_replicas(one, cfg.replicas, threads)
    return {"checks": [], "replicas": rows}


def _run_moments(cfg, threads):
    kind = cfg.model.get("kind", "Dyson") if cfg.model else "Dyson"
    spec = build_model(kind, cfg.model.get("n_particles", 8),
                       cfg.model.get("params") or {})
    K = int(cfg.numerics["K"])
    curve = _moment_curve(cfg, spec, max(K, 2) + 1)
    os.makedirs(cfg.output_dir, exist_ok=True)
    curve.to_csv(os.path.join(cfg.output_dir, "moments.csv"))
    checks = [{"name": "mass_conservation",
               "passed": bool(np.allclose(curve.values[:, 0], 1.0, atol=1e-10))}]
    return {"checks": checks,
            "terminal_moments": [float(v) for v in curve.values[-1]]}


def _predicted_law(kind, kern, curve, degrees, T, c, n_draws, seed):
    """Joint draws of the limit fluctuations at time T via the recursion."""
    kern_grid = np.linspace(0.0, T, 81)
    sub = limits.MomentCurve(kern_grid,
                             np.stack([curve.series(kern_grid, k)
                                       for k in range(curve.max_degree + 1)], axis=1),
                             curve.provenance)
    ck = fl.covariance_kernel(kern, sub)
    gauss = fl.synthesize_gaussian_family(ck, list(range(1, max(degrees) + 1)),
                                          kern_grid, n_draws, seed)
    rec = fl.limit_fluctuation_recursion(kind, {}, gauss, sub, max(degrees), c=c)
    return {n: rec[n][-1, :] for n in degrees}


def _run_clt(cfg, threads):
    spec = _spec(cfg)
    kind = spec.kind
    kern = limit_kernels(spec)
    N = spec.n_particles
    T = cfg.numerics["T"]
    K = max(2, int(cfg.numerics["K"]))
    degrees = list(range(1, K + 1))
    curve = _moment_curve(cfg, spec, K + K)
    ctl = _control(cfg)

    def one(r):
        s = replica_seed(cfg.seed, r)
        x0, t0 = _initial_for(cfg, spec, s)
        traj = simulate(spec, x0, max(T - t0, 0.0), ctl, seed=s)
        xT = traj.positions[-1]
        return [N * (np.mean(xT ** n) - curve.at(T, n)) for n in degrees]

    samples = np.asarray(_map_replicas(one, cfg.replicas, threads))
    c = spec.params.get("P", 0) / N if kind == "Wishart" else \
        spec.params.get("c")
    base_kind = {"Wishart": "Wishart", "WishartDrifted": "Wishart",
                 "Dyson": "Dyson", "DysonDrifted": "Dyson",
                 "OrnsteinUhlenbeck": "OrnsteinUhlenbeck",
                 "OUDrifted": "OrnsteinUhlenbeck"}.get(kind, kind)
    pred = _predicted_law(base_kind, kern, curve, degrees, T, c, 10000,
                          cfg.seed + 1)

    checks = []
    details = {}
    for j, n in enumerate(degrees):
        target = float(np.var(pred[n], ddof=1))
        rep, v, se = stats.variance_check(samples[:, j], target,
                                          "variance_deg%d" % n, seed=cfg.seed + 2 + n)
        checks.append(rep.to_dict())
        details["variance_deg%d" % n] = {"sample": v, "target": target, "se": se}
        z = (samples[:, j] - samples[:, j].mean()) / samples[:, j].std(ddof=1)
        checks.append(stats.ks_normal(z, 0.0, 1.0,
                                      name="gaussian_deg%d" % n).to_dict())
        checks.append(stats.ks_two_sample(samples[:, j], pred[n],
                                          name="recursion_deg%d" % n).to_dict())
    cov = stats.estimate_covariance(samples, seed=cfg.seed + 17)
    details["covariance"] = {"sample": cov.cov.tolist(), "se": cov.se.tolist()}
    return {"checks": checks, "details": details}


def _run_compare(cfg, threads):
    spec_cfg = cfg.model
    kind = spec_cfg["kind"]
    N = spec_cfg["n_particles"]
    p = spec_cfg.get("params") or {}
    if kind in ("Dyson", "DysonDrifted"):
        lo = build_model("DysonDrifted", N, {"c": p.get("c_low", -1.0)})
        hi = build_model("DysonDrifted", N, {"c": p.get("c_high", 1.0)})
    elif kind in ("Wishart",):
        lo = build_model("Wishart", N, {"P": p.get("P_low", N + 1)})
        hi = build_model("Wishart", N, {"P": p.get("P_high", 2 * N)})
    else:
        raise ConfigError("model.kind", "Compare supports Dyson or Wishart pairs")
    ctl = _control(cfg)
    T = cfg.numerics["T"]
    degenerate = lo.params == hi.params

    def one(r):
        s = replica_seed(cfg.seed, r)
        if lo.kind == "Wishart":
            x0 = sample_scaled_laguerre(N, N + 1, s).positions
        else:
            x0 = sample_scaled_goe(N, s).positions
        tl, th = coupled_simulate(lo, hi, x0, x0, T, ctl, seed=s)
        rep = check_ordering(tl, th)
        return rep.fraction

    fracs = _map_replicas(one, cfg.replicas, threads)
    clean = sum(1 for f in fracs if f == 1.0)
    checks = [{"name": "ordering_fraction", "passed": clean >= 0.99 * len(fracs),
               "clean_seeds": clean, "total_seeds": len(fracs)}]
    rep = {"checks": checks, "fractions": [float(f) for f in fracs]}
    if degenerate:
        rep["note"] = "degenerate: equal drifts"
    return rep


def _run_stationarity(cfg, threads):
    base = cfg.model.get("kind", "Dyson")
    N = cfg.model["n_particles"]
    p = dict(cfg.model.get("params") or {})
    a = float(p.get("a", 1.0))
    spec = scaled_model("Wishart" if base in ("Wishart", "ScaledWishart")
                        else "Dyson", N, p)
    ctl = _control(cfg)
    T = cfg.numerics["T"]
    checkpoints = cfg.numerics.get("checkpoints", [0.5, 1.0])
    degrees = [1, 2, 3]

    def one(r):
        s = replica_seed(cfg.seed, r)
        if spec.kind == "ScaledWishart":
            x0 = sample_scaled_laguerre(N, p.get("P", 2 * N), s).positions
        else:
            x0 = sample_scaled_goe(N, s).positions
        traj = simulate(spec, x0, T, ctl, seed=s)
        rows = []
        for tc in [0.0] + list(checkpoints):
            idx = int(np.argmin(np.abs(traj.grid - tc)))
            rows.append([np.mean(traj.positions[idx] ** k) for k in degrees])
        return rows

    data = np.asarray(_map_replicas(one, cfg.replicas, threads))
    checks = []
    details = {}
    for ci, tc in enumerate(checkpoints):
        for ki, k in enumerate(degrees):
            diff = data[:, ci + 1, ki] - data[:, 0, ki]
            rep, mean, se = stats.mean_check(diff, 0.0,
                                             "moment%d_t%g_drift" % (k, tc))
            checks.append(rep.to_dict())
            details["moment%d_t%g" % (k, tc)] = {"mean_drift": mean, "se": se}
    return {"checks": checks, "details": details}


def _run_identity(cfg, threads):
    kind = cfg.model.get("kind", "Wishart")
    N = cfg.model["n_particles"]
    p = dict(cfg.model.get("params") or {})
    ctl = _control(cfg)
    M = cfg.replicas
    half = M // 2
    checks = []
    if kind == "Wishart":
        spec = build_model("Wishart", N, {"P": p.get("P", 2 * N)})
        t_ref = float(cfg.numerics.get("t_identity", 0.5))

        def sim_top(r):
            s = replica_seed(cfg.seed, r)
            x0 = warm_start(spec, t_ref, s)
            traj = simulate(spec, x0, t_ref, ctl, seed=s)
            return 0.5 * traj.positions[-1][-1]

        def exact_top(r):
            s = replica_seed(cfg.seed, half + r)
            return warm_start(spec, t_ref, s)[-1]

        a = np.asarray(_map_replicas(sim_top, half, threads))
        b = np.asarray(_map_replicas(exact_top, half, threads))
        checks.append(stats.ks_two_sample(a, b, name="wishart_self_similarity")
                      .to_dict())
    elif kind in ("OrnsteinUhlenbeck", "OUDrifted"):
        t_ref = float(cfg.numerics.get("t_identity", 0.7))
        ou = build_model("OrnsteinUhlenbeck", N)
        dy = build_model("Dyson", N)

        def ou_top(r):
            s = replica_seed(cfg.seed, r)
            t0 = 0.35
            x0 = warm_start(ou, t0, s)
            traj = simulate(ou, x0, t_ref - t0, ctl, seed=s)
            return np.sqrt(2.0) * np.exp(0.5 * t_ref) * traj.positions[-1][-1]

        def dy_top(r):
            s = replica_seed(cfg.seed, half + r)
            horizon = np.exp(t_ref) - 1.0
            t0 = 0.5 * horizon
            x0 = warm_start(dy, t0, s)
            traj = simulate(dy, x0, horizon - t0, ctl, seed=s)
            return traj.positions[-1][-1]

        a = np.asarray(_map_replicas(ou_top, half, threads))
        b = np.asarray(_map_replicas(dy_top, half, threads))
        checks.append(stats.ks_two_sample(a, b, name="ou_dyson_time_change")
                      .to_dict())
    else:
        raise ConfigError("model.kind", "Identity supports Wishart or OU")
    return {"checks": checks}


def _run_oracle_match(cfg, threads):
    kind = cfg.model["kind"]
    N = cfg.model["n_particles"]
    p = dict(cfg.model.get("params") or {})
    matrix_kind = {"Dyson": "SymmetricBM", "Wishart": "Wishart",
                   "OrnsteinUhlenbeck": "OU"}.get(kind)
    if matrix_kind is None:
        raise ConfigError("model.kind", "OracleMatch supports the three "
                          "eigenvalue models")
    spec = build_model(kind, N, p)
    ctl = _control(cfg)
    T = cfg.numerics["T"]
    dt_matrix = cfg.numerics.get("dt_matrix", T / 20.0)
    checkpoints = np.linspace(T / 5.0, T, 5)
    degrees = [1, 2, 3, 4]
    t0 = float(cfg.initial.get("t0", 0.25))
    M = cfg.replicas

    def particle(r):
        s = replica_seed(cfg.seed, r)
        x0 = warm_start(spec, t0, s)
        traj = simulate(spec, x0, T - t0, ctl, seed=s)
        rows = []
        for tc in checkpoints:
            idx = int(np.argmin(np.abs(traj.grid - (tc - t0))))
            rows.append([np.mean(traj.positions[idx] ** k) for k in degrees])
        return rows

    def matrix(r):
        s = replica_seed(cfg.seed, M + r)
        x0 = warm_start(spec, t0, s)
        traj = simulate_matrix(matrix_kind, N, p.get("P"), T - t0, dt_matrix,
                               seed=s, init_spectrum=x0)
        rows = []
        for tc in checkpoints:
            idx = int(np.argmin(np.abs(traj.grid - (tc - t0))))
            rows.append([np.mean(traj.positions[idx] ** k) for k in degrees])
        return rows

    pa = np.asarray(_map_replicas(particle, M, threads))
    ma = np.asarray(_map_replicas(matrix, M, threads))
    checks = []
    for ci, tc in enumerate(checkpoints):
        for ki, k in enumerate(degrees):
            d = pa[:, ci, ki].mean() - ma[:, ci, ki].mean()
            se = np.sqrt(pa[:, ci, ki].var(ddof=1) / M
                         + ma[:, ci, ki].var(ddof=1) / M)
            se = max(se, 1e-300)
            checks.append({"name": "moment%d_t%.2f" % (k, tc),
                           "statistic": abs(d) / se,
                           "passed": bool(abs(d) <= 3.0 * se)})
    return {"checks": checks}
