import numpy as np
import pytest

from eigenflow.errors import DegreeOverflow
from eigenflow.limits import closed_form_curve, evolve_moments, mp_moments, \
    semicircle_moments
from eigenflow.models import build_model, limit_kernels


def _zero_init(K):
    init = np.zeros(K + 2)
    init[0] = 1.0
    return init


def _kern(kind, **params):
    n = 8
    if kind == "Wishart":
        params = {"P": int(params.get("c", 2) * n)}
    return limit_kernels(build_model(kind, n, params))


def test_semicircle_moments_catalan():
    assert np.array_equal(semicircle_moments(6, 1.0), [1, 0, 1, 0, 2, 0, 5])


def test_semicircle_point_mass_at_zero_time():
    assert np.array_equal(semicircle_moments(2, 0.0), [1, 0, 0])


def test_semicircle_scaling():
    m = semicircle_moments(4, 0.3)
    assert m[4] == pytest.approx(0.3 ** 2 * semicircle_moments(4, 1.0)[4])


def test_mp_moments_c1():
    assert mp_moments(2, 1.0, 1.0) == pytest.approx([1, 1, 2])


def test_mp_moments_c2_third():
    # c^3 + 3 c^2 + c at c=2
    assert mp_moments(3, 2.0, 1.0)[3] == pytest.approx(22.0)


def test_mp_zero_time():
    assert np.array_equal(mp_moments(4, 3.0, 0.0), [1, 0, 0, 0, 0])


def test_dyson_hierarchy_exact():
    curve = evolve_moments(_kern("Dyson"), _zero_init(6), 1.0, 1e-3, 6)
    assert curve.at(1.0, 2) == pytest.approx(1.0, abs=1e-8)
    assert curve.at(1.0, 4) == pytest.approx(2.0, abs=1e-8)
    assert curve.at(1.0, 6) == pytest.approx(5.0, abs=1e-8)


def test_wishart_hierarchy_exact():
    curve = evolve_moments(_kern("Wishart", c=2), _zero_init(3), 1.0, 1e-3, 3)
    assert curve.at(1.0, 1) == pytest.approx(2.0, abs=1e-8)
    assert curve.at(0.5, 2) == pytest.approx(6.0 * 0.25, abs=1e-8)
    assert curve.at(1.0, 3) == pytest.approx(22.0, abs=1e-8)


def test_mass_conservation():
    for kind in ("Dyson", "Wishart", "OrnsteinUhlenbeck"):
        curve = evolve_moments(_kern(kind), _zero_init(4), 1.0, 1e-2, 4)
        assert np.allclose(curve.values[:, 0], 1.0, atol=1e-12)


def test_degree_overflow():
    with pytest.raises(DegreeOverflow):
        evolve_moments(_kern("Dyson"), np.array([1.0, 0.0]), 1.0, 1e-2, 4)


def test_hierarchy_matches_closed_forms_on_grid():
    K = 8
    curve = evolve_moments(_kern("Dyson"), _zero_init(K), 1.0, 1e-3, K)
    for t in (0.1, 0.5, 1.0):
        ref = semicircle_moments(K, t)
        got = [curve.at(t, k) for k in range(K + 1)]
        assert got == pytest.approx(ref, abs=1e-6)
    curve = evolve_moments(_kern("Wishart", c=2), _zero_init(K), 1.0, 1e-3, K)
    for t in (0.1, 0.5, 1.0):
        ref = mp_moments(K, 2.0, t)
        got = [curve.at(t, k) for k in range(K + 1)]
        assert got == pytest.approx(ref, rel=1e-6, abs=1e-6)


def test_self_similarity_of_hierarchy():
    K = 6
    dy = evolve_moments(_kern("Dyson"), _zero_init(K), 1.0, 1e-3, K)
    wi = evolve_moments(_kern("Wishart", c=2), _zero_init(K), 1.0, 1e-3, K)
    for t in (0.25, 0.64):
        for k in range(1, K + 1):
            assert dy.at(t, k) == pytest.approx(t ** (k / 2.0) * dy.at(1.0, k),
                                                abs=1e-6)
            assert wi.at(t, k) == pytest.approx(t ** k * wi.at(1.0, k),
                                                rel=1e-6, abs=1e-6)


def test_ou_equilibrium_is_half_variance_semicircle():
    K = 6
    curve = evolve_moments(_kern("OrnsteinUhlenbeck"), _zero_init(K), 40.0,
                           1e-2, K)
    ref = semicircle_moments(K, 0.5)
    got = [curve.at(40.0, k) for k in range(K + 1)]
    assert got == pytest.approx(ref, abs=1e-6)
    # hierarchy residual vanishes at the fixed point
    late = np.array([curve.at(40.0, k) for k in range(K + 1)])
    earlier = np.array([curve.at(39.0, k) for k in range(K + 1)])
    assert np.max(np.abs(late - earlier)) < 1e-6


def test_ou_second_moment_closed_form():
    curve = evolve_moments(_kern("OrnsteinUhlenbeck"), _zero_init(2), 2.0,
                           1e-3, 2)
    for t in (0.5, 1.0, 2.0):
        assert curve.at(t, 2) == pytest.approx(0.5 * (1 - np.exp(-t)), abs=1e-8)


def test_closed_form_curve_matches_hierarchy():
    cf = closed_form_curve("Dyson", 4, 1.0, 1e-2)
    ode = evolve_moments(_kern("Dyson"), _zero_init(4), 1.0, 1e-3, 4)
    for t in (0.3, 1.0):
        for k in range(5):
            assert cf.at(t, k) == pytest.approx(ode.at(t, k), abs=1e-6)


def test_wishart_cauchy_schwarz():
    curve = evolve_moments(_kern("Wishart", c=2), _zero_init(4), 1.0, 1e-3, 4)
    m1 = curve.values[:, 1]
    m2 = curve.values[:, 2]
    assert np.all(m1 ** 2 <= m2 + 1e-12)


def test_moment_curve_csv(tmp_path):
    curve = evolve_moments(_kern("Dyson"), _zero_init(2), 0.1, 1e-2, 2)
    path = tmp_path / "m.csv"
    curve.to_csv(str(path))
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "t,m0,m1,m2"
    first = [float(v) for v in lines[1].split(",")]
    assert first == [0.0, 1.0, 0.0, 0.0]
