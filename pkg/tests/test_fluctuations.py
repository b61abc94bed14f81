import numpy as np
import pytest

from eigenflow.engine import StepControl, simulate
from eigenflow.ensembles import warm_start
from eigenflow.errors import NoNoiseRecorded, NotPSD
from eigenflow.fluctuations import centered_process, covariance_kernel, \
    empirical_moments, fluctuation, limit_fluctuation_recursion, \
    martingale_part, pooled_mean, synthesize_gaussian_family
from eigenflow.limits import MomentCurve, evolve_moments
from eigenflow.models import build_model, limit_kernels


def _curve(kind, K=6, T=1.0, c=2.0):
    n = 8
    params = {"P": int(c * n)} if kind == "Wishart" else {}
    kern = limit_kernels(build_model(kind, n, params))
    init = np.zeros(K + 2)
    init[0] = 1.0
    return kern, evolve_moments(kern, init, T, 1e-3, K)


def _traj(kind="Dyson", N=20, T=0.5, seed=1, record_noise=False, dt=2e-3):
    params = {"P": 2 * N} if kind == "Wishart" else {}
    spec = build_model(kind, N, params)
    return spec, simulate(spec, warm_start(spec, T, seed), T,
                          StepControl(dt=dt, min_gap=3e-4, max_substeps=2),
                          seed=seed, record_noise=record_noise)


def test_empirical_moments_basics():
    spec, traj = _traj(N=2)
    m0 = empirical_moments(traj, [0])
    assert np.all(m0 == 1.0)
    m2 = empirical_moments(traj, [2])
    assert m2[0, 0] == pytest.approx(np.mean(traj.positions[0] ** 2))


def test_fluctuation_definition():
    kern, curve = _curve("Dyson")
    spec, traj = _traj(N=4, T=0.25, dt=5e-3)
    sub = _shift_curve(curve, 0.25)
    sample = fluctuation(traj, sub, [0, 1, 2])
    assert np.all(sample.series(0) == 0.0)
    k = traj.grid.size // 2
    expect = 4 * (np.mean(traj.positions[k]) - sub.at(traj.grid[k], 1))
    assert sample.series(1)[k] == pytest.approx(expect, abs=1e-10)


def test_fluctuation_linearity():
    kern, curve = _curve("Dyson")
    spec, traj = _traj(N=6, T=0.25, dt=5e-3)
    sub = _shift_curve(curve, 0.25)
    s = fluctuation(traj, sub, [1, 2])
    combo = 3.0 * s.series(1) - 2.0 * s.series(2)
    # fluctuation of 3x - 2x^2 equals the same combination exactly
    direct = 6 * (3.0 * traj.positions.mean(axis=1)
                  - 2.0 * (traj.positions ** 2).mean(axis=1)
                  - (3.0 * sub.series(traj.grid, 1)
                     - 2.0 * sub.series(traj.grid, 2)))
    assert combo == pytest.approx(direct, abs=1e-9)


def test_centered_process_degree_zero():
    kern, curve = _curve("Dyson")
    spec, traj = _traj(N=5, T=0.25, dt=5e-3)
    q = centered_process(traj, curve, kern, 0)
    assert np.all(q == 0.0)


def test_centered_process_degree_one_cancellation():
    # for f = x with b constant all correction terms vanish:
    # Q_t = L_t(x) - L_0(x)
    for kind in ("Dyson", "Wishart"):
        kern, curve = _curve(kind)
        spec, traj = _traj(kind, N=10, T=0.25, dt=5e-3)
        sub = _shift_curve(curve, 0.25)
        q = centered_process(_rebase(traj), sub, kern, 1)
        s = fluctuation(_rebase(traj), sub, [1])
        expect = s.series(1) - s.series(1)[0]
        assert q == pytest.approx(expect, abs=1e-9)


def _rebase(traj):
    return traj


def _shift_curve(curve, t0):
    grid = curve.grid - t0
    keep = grid >= -1e-12
    return MomentCurve(grid[keep], curve.values[keep], curve.provenance)


def test_martingale_requires_noise():
    kern, curve = _curve("Dyson")
    spec, traj = _traj(N=5, T=0.25)
    with pytest.raises(NoNoiseRecorded):
        martingale_part(traj, spec, 1)


def test_martingale_degree_zero():
    spec, traj = _traj(N=5, T=0.25, record_noise=True)
    assert np.all(martingale_part(traj, spec, 0) == 0.0)


def test_martingale_degree_one_is_summed_brownian():
    spec, traj = _traj(N=8, T=0.25, record_noise=True)
    m = martingale_part(traj, spec, 1)
    expect = np.sqrt(2.0 / 8) * np.cumsum(traj.noise.sum(axis=1))
    assert m[1:] == pytest.approx(expect, abs=1e-12)


def test_martingale_quadratic_variation():
    # realized QV of N M_x for Dyson is 2 t within 5 percent at dt = 1e-3
    spec = build_model("Dyson", 50)
    qvs = []
    for seed in range(50):
        traj = simulate(spec, warm_start(spec, 0.5, seed), 0.5,
                        StepControl(dt=1e-3, min_gap=3e-4, max_substeps=2),
                        seed=seed, record_noise=True)
        m = martingale_part(traj, spec, 1)
        qvs.append(np.sum(np.diff(m) ** 2))
    assert np.mean(qvs) == pytest.approx(2.0 * 0.5, rel=0.05)


def test_covariance_kernel_frozen_values():
    kern, curve = _curve("Dyson")
    ck = covariance_kernel(kern, curve)
    assert ck(1, 1, 1.0, 1.0) == pytest.approx(2.0, abs=1e-6)
    assert ck(2, 2, 1.0, 1.0) == pytest.approx(4.0, abs=1e-6)
    kern, curve = _curve("OrnsteinUhlenbeck")
    ck = covariance_kernel(kern, curve)
    for t in (0.3, 1.0):
        assert ck(1, 1, t, t) == pytest.approx(t, abs=1e-6)
    kern, curve = _curve("Wishart", c=2.0)
    ck = covariance_kernel(kern, curve)
    assert ck(1, 1, 1.0, 1.0) == pytest.approx(4.0, abs=1e-6)


def test_covariance_kernel_symmetry_and_zero_time():
    kern, curve = _curve("Dyson")
    ck = covariance_kernel(kern, curve)
    assert ck(1, 2, 0.7, 0.4) == ck(2, 1, 0.4, 0.7)
    assert ck(1, 1, 0.0, 1.0) == 0.0


def test_covariance_increment_structure():
    kern, curve = _curve("Dyson")
    ck = covariance_kernel(kern, curve)
    assert ck(1, 1, 1.0, 0.4) == pytest.approx(ck(1, 1, 0.4, 0.4), abs=1e-12)


def test_synthesize_zero_kernel():
    out = synthesize_gaussian_family(lambda m, n, t, s: 0.0, [1],
                                     np.array([0.5, 1.0]), 100, seed=3)
    assert np.allclose(out[1], 0.0, atol=1e-4)


def test_synthesize_matches_kernel_variance():
    kern, curve = _curve("Dyson")
    ck = covariance_kernel(kern, curve)
    out = synthesize_gaussian_family(ck, [1], np.array([1.0]), 100000, seed=4)
    v = out[1][0].var(ddof=1)
    assert v == pytest.approx(2.0, rel=0.02)


def test_synthesize_not_psd():
    def bad(m, n, t, s):
        return -1.0 if (t == s and m == n) else 0.9
    with pytest.raises(NotPSD):
        synthesize_gaussian_family(bad, [1], np.array([0.5, 1.0]), 10, seed=0)


def test_recursion_degree_two_dyson():
    # zero init: recursion gives L_t(x^2) = t + G_t(x^2) exactly
    kern, curve = _curve("Dyson")
    grid = np.linspace(0, 1, 11)
    sub = MomentCurve(grid, np.stack([curve.series(grid, k)
                                      for k in range(curve.max_degree + 1)],
                                     axis=1), curve.provenance)
    ck = covariance_kernel(kern, sub)
    g = synthesize_gaussian_family(ck, [1, 2], grid, 50, seed=5)
    rec = limit_fluctuation_recursion("Dyson", {}, g, sub, 2)
    assert rec[2] == pytest.approx(grid[:, None] + g[2], abs=1e-9)
    assert np.all(rec[0] == 0.0)


def test_recursion_degree_two_wishart_law():
    # zero init at t=1, c=2: the recursion gives
    # L_1(x^2) = 2 + 6 int_0^1 G_s(x) ds + G_1(x^2), whose variance is
    # 36*(2/3) + 88 + 12*4 = 160 (hand integration of the kernel)
    kern, curve = _curve("Wishart", c=2.0)
    grid = np.linspace(0, 1, 101)
    sub = MomentCurve(grid, np.stack([curve.series(grid, k)
                                      for k in range(curve.max_degree + 1)],
                                     axis=1), curve.provenance)
    ck = covariance_kernel(kern, sub)
    g = synthesize_gaussian_family(ck, [1, 2], grid, 40000, seed=6)
    rec = limit_fluctuation_recursion("Wishart", {}, g, sub, 2, c=2.0)
    terminal = rec[2][-1]
    assert terminal.mean() == pytest.approx(2.0, abs=0.25)
    assert terminal.var(ddof=1) == pytest.approx(160.0, rel=0.05)


def test_recursion_ou_degree_one_at_zero():
    kern, curve = _curve("OrnsteinUhlenbeck")
    grid = np.linspace(0, 1, 11)
    sub = MomentCurve(grid, np.stack([curve.series(grid, k)
                                      for k in range(curve.max_degree + 1)],
                                     axis=1), curve.provenance)
    ck = covariance_kernel(kern, sub)
    g = synthesize_gaussian_family(ck, [1], grid, 40, seed=7)
    L0 = {1: np.full(40, 1.5)}
    rec = limit_fluctuation_recursion("OrnsteinUhlenbeck", L0, g, sub, 1)
    # variation of constants reduces to the initial value at t = 0, up to
    # the 1e-10 synthesis jitter (standard deviation about 1e-5)
    assert rec[1][0] == pytest.approx(np.full(40, 1.5), abs=1e-3)


def test_recursion_ou_degree_one_variance():
    # stationary-free solution: Var L_t(x) = e^{-t} Var L_0 + (1 - e^{-t})
    kern, curve = _curve("OrnsteinUhlenbeck")
    grid = np.linspace(0, 1, 401)
    sub = MomentCurve(grid, np.stack([curve.series(grid, k)
                                      for k in range(curve.max_degree + 1)],
                                     axis=1), curve.provenance)
    ck = covariance_kernel(kern, sub)
    g = synthesize_gaussian_family(ck, [1], grid, 40000, seed=8)
    rec = limit_fluctuation_recursion("OrnsteinUhlenbeck", {}, g, sub, 1)
    target = 1.0 - np.exp(-1.0)
    assert rec[1][-1].var(ddof=1) == pytest.approx(target, rel=0.03)


def test_pooled_mean_order_independent():
    vals = np.array([1.0, 2.0, 3.0, 4.0])
    assert pooled_mean(vals) == pooled_mean(vals[::-1])


def test_fluctuation_csv(tmp_path):
    kern, curve = _curve("Dyson")
    spec, traj = _traj(N=4, T=0.25, dt=5e-3)
    sample = fluctuation(traj, _shift_curve(curve, 0.25), [1])
    path = tmp_path / "f.csv"
    sample.to_csv(str(path))
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "replica,degree,t,L,Q,M"
    assert len(lines) == 1 + traj.grid.size
