import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eigenflow.errors import CollidingState, InvalidParams, UnknownKind
from eigenflow.models import KINDS, build_model, eval_drift, limit_kernels


def test_dyson_diffusion_constant():
    spec = build_model("Dyson", 8)
    assert spec.diffusion_per_particle(0.0) == 0.5
    assert spec.diffusion_per_particle(3.7) == 0.5


def test_ou_drift():
    spec = build_model("OrnsteinUhlenbeck", 4)
    assert spec.drift_b(1.0) == -0.5
    assert spec.drift_b(-2.0) == 1.0


def test_wishart_requires_large_p():
    with pytest.raises(InvalidParams):
        build_model("Wishart", 4, {"P": 3})


def test_unknown_kind():
    with pytest.raises(UnknownKind):
        build_model("Ginibre", 4)


def test_wishart_drifted_requires_c_at_least_one():
    with pytest.raises(InvalidParams):
        build_model("WishartDrifted", 4, {"c": 0.5})


def test_limit_kernels_wishart():
    spec = build_model("Wishart", 4, {"P": 8})
    k = limit_kernels(spec)
    assert k.G(1.0, 3.0) == 4.0
    assert k.b(17.0) == 2.0


def test_limit_kernels_dyson():
    k = limit_kernels(build_model("Dyson", 4))
    assert k.G(0.3, -2.0) == 1.0
    assert k.b(5.0) == 0.0


def test_limit_kernels_ou():
    k = limit_kernels(build_model("OrnsteinUhlenbeck", 4))
    assert k.G(0.0, 9.0) == 0.5
    assert k.b(-2.0) == 1.0


def test_eval_drift_dyson_antisymmetry():
    spec = build_model("Dyson", 2)
    d = eval_drift(spec, np.array([-1.0, 1.0]))
    assert d[0] + d[1] == 0.0
    assert d[1] == 0.25


def test_eval_drift_wishart_hand_value():
    spec = build_model("Wishart", 2, {"P": 4})
    d = eval_drift(spec, np.array([1.0, 3.0]))
    assert d[1] == pytest.approx(3.0, abs=1e-14)


def test_eval_drift_rejects_collision():
    spec = build_model("Dyson", 3)
    with pytest.raises(CollidingState):
        eval_drift(spec, np.array([0.0, 1.0, 1.0]))


def test_wishart_kernel_value_and_positivity():
    spec = build_model("Wishart", 4, {"P": 8})
    assert spec.interaction_kernel(1.0, 3.0) == 1.0
    assert spec.interaction_kernel(0.5, 0.25) >= 0.0


@settings(max_examples=200, deadline=None)
@given(st.floats(-50, 50), st.floats(-50, 50),
       st.sampled_from(sorted(KINDS)))
def test_interaction_kernel_symmetry(x, y, kind):
    params = {"Wishart": {"P": 16}, "WishartDrifted": {"c": 2.0},
              "GeneralizedWishart": {"g_family": "sqrt", "g_scale": 1.0},
              "ParticleSystem": {"s0": 1.0, "b0": 0.0, "b1": 0.0, "h0": 1.0},
              }.get(kind, {})
    spec = build_model(kind, 8, params)
    assert spec.interaction_kernel(x, y) == spec.interaction_kernel(y, x)


@pytest.mark.parametrize("n", [2, 4, 8, 16, 32, 64])
def test_limit_consistency_exact_at_every_n(n):
    # N * G_N equals G exactly at power-of-two N: the 1/N scale divides out
    # without rounding.
    grid = [-2.0, -0.5, 0.25, 1.0, 3.0]
    for kind in ("Wishart", "Dyson", "OrnsteinUhlenbeck"):
        params = {"P": 2 * n} if kind == "Wishart" else {}
        spec = build_model(kind, n, params)
        k = limit_kernels(spec)
        for x in grid:
            for y in grid:
                if kind == "Wishart" and (x < 0 or y < 0):
                    continue
                assert n * spec.interaction_kernel(x, y) == k.G(x, y)


@pytest.mark.parametrize("kind,target", [
    ("DysonDrifted", lambda x: 1.5),
    ("OUDrifted", lambda x: -0.5 * x + 1.5),
    ("WishartDrifted", lambda x: 1.5),
])
def test_drifted_perturbation_vanishes(kind, target):
    grid = np.linspace(-5, 5, 101)
    if kind == "WishartDrifted":
        grid = np.linspace(0, 10, 101)
    sups = []
    for n in (10, 100, 1000):
        spec = build_model(kind, n, {"c": 1.5, "eps": 1.0})
        sup = max(abs(spec.drift_b(x) - target(x)) for x in grid)
        sups.append(n * sup)
    assert sups[0] > sups[1] > sups[2]
    assert sups[2] < 0.05


def test_model_spec_immutable():
    spec = build_model("Dyson", 4)
    with pytest.raises(AttributeError):
        spec.n_particles = 5
