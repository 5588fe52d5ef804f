import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgechaos import (TANH, SigmoidSpec, integrate, jacobian_at, sample_matrix, sigmoid_deriv,
                       sigmoid_eval, vector_field)
from edgechaos.exceptions import DimensionError, NumericalBlowUp

BASES = [SigmoidSpec(base=b) for b in ("tanh", "algebraic", "erf")]
reals = st.floats(-20, 20, allow_nan=False)


def test_sigmoid_examples():
    assert sigmoid_eval(TANH, 0.0) == 0.0
    assert sigmoid_eval(TANH, 0.5) == -sigmoid_eval(TANH, -0.5)
    assert sigmoid_deriv(TANH, 0.0) == 1.0
    assert 0 < sigmoid_deriv(TANH, 3.0) < 1
    # central difference (S(1+h) - S(1-h)) / 2h with h = 1e-6
    assert sigmoid_deriv(TANH, 1.0) == pytest.approx(0.41997434163665304, rel=1e-9)


@pytest.mark.parametrize("s", BASES, ids=lambda s: s.base)
@given(x=reals)
def test_base_sigmoid_axioms(s, x):
    assert s.value(-x) == pytest.approx(-s.value(x), abs=1e-15)
    assert abs(s.value(x)) <= s.saturation
    assert 0 <= s.deriv(x) <= 1.0
    assert s.deriv(-x) == pytest.approx(s.deriv(x), abs=1e-15)


@pytest.mark.parametrize("s", BASES, ids=lambda s: s.base)
def test_base_sigmoid_derivative_matches_fd_and_decreases(s):
    x = np.linspace(0, 6, 601)
    h = 1e-6
    fd = (s.value(x + h) - s.value(x - h)) / (2 * h)
    np.testing.assert_allclose(s.deriv(x), fd, atol=1e-8)
    assert s.deriv(0.0) == pytest.approx(1.0)
    assert np.all(np.diff(s.deriv(x)) <= 1e-15)


def test_vector_field_examples():
    J = sample_matrix(5, 1.3, seed=1)
    np.testing.assert_array_equal(vector_field(J, TANH, np.zeros(5)), np.zeros(5))
    x = np.arange(5.0)
    np.testing.assert_array_equal(vector_field(np.zeros((5, 5)), TANH, x), -x)
    assert vector_field([[2.0]], TANH, [1.0])[0] == pytest.approx(0.5231883119115297, rel=1e-12)
    with pytest.raises(DimensionError):
        vector_field(J, TANH, np.zeros(4))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32), n=st.integers(1, 50), sigma=st.floats(0.1, 4))
def test_vector_field_is_odd(seed, n, sigma):
    J = sample_matrix(n, sigma, seed)
    x = np.random.default_rng(seed).uniform(-3, 3, n)
    np.testing.assert_allclose(vector_field(J, TANH, -x), -vector_field(J, TANH, x), atol=1e-14)


def test_jacobian_examples():
    J = sample_matrix(4, 2.0, seed=3)
    np.testing.assert_allclose(jacobian_at(J, TANH, np.zeros(4)), J.entries - np.eye(4))
    np.testing.assert_array_equal(jacobian_at(np.zeros((3, 3)), TANH, np.ones(3)), -np.eye(3))
    with pytest.raises(DimensionError):
        jacobian_at(J, TANH, np.zeros(3))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32), n=st.integers(1, 50), sigma=st.floats(0.2, 3))
def test_jacobian_matches_finite_differences(seed, n, sigma):
    J = sample_matrix(n, sigma, seed)
    rng = np.random.default_rng(seed)
    x = rng.uniform(-2, 2, n)
    v = rng.standard_normal(n)
    h = 1e-6
    fd = (vector_field(J, TANH, x + h * v) - vector_field(J, TANH, x - h * v)) / (2 * h)
    jv = jacobian_at(J, TANH, x) @ v
    assert np.linalg.norm(jv - fd) <= 1e-5 * max(np.linalg.norm(jv), 1e-12)


def test_integrate_pure_leak():
    x0 = np.array([1.0, -2.0, 0.5])
    traj = integrate(np.zeros((3, 3)), TANH, x0, dt=1e-3, t_end=1.0)
    assert traj.times[-1] >= 1.0
    np.testing.assert_allclose(traj.final, x0 * math.exp(-traj.times[-1]), atol=1e-6)
    assert np.all(np.diff(traj.times) > 0)
    assert traj.states.shape == (len(traj.times), 3)


def test_integrate_subcritical_decays_to_origin():
    J = sample_matrix(200, 0.5, seed=9)
    x0 = np.random.default_rng(0).uniform(-1, 1, 200)
    traj = integrate(J, TANH, x0, dt=0.01, t_end=50.0)
    assert np.linalg.norm(traj.final) < 1e-6


def test_integrate_fourth_order_step_halving():
    J = sample_matrix(20, 1.5, seed=4)
    x0 = np.random.default_rng(1).uniform(-1, 1, 20)
    ends = [integrate(J, TANH, x0, dt=dt, t_end=10.0).final for dt in (0.1, 0.05, 0.025)]
    e1 = np.linalg.norm(ends[0] - ends[1])
    e2 = np.linalg.norm(ends[1] - ends[2])
    # halving dt divides the RK4 error by 2^4 = 16 (Richardson ratio)
    assert 12 < e1 / e2 < 20


def test_integrate_storage_decimation():
    J = sample_matrix(3, 0.5, seed=1)
    traj = integrate(J, TANH, np.ones(3), dt=0.01, t_end=200.0)
    assert traj.store_every > 1
    assert traj.times[-1] == pytest.approx(200.0)
    full = integrate(J, TANH, np.ones(3), dt=0.01, t_end=1.0)
    assert len(full.times) == 101


def test_integrate_reports_blow_up_time():
    class Exploding(SigmoidSpec):
        def value(self, x):
            return np.asarray(x) ** 3

    with pytest.raises(NumericalBlowUp) as info, np.errstate(over="ignore", invalid="ignore"):
        integrate([[5.0]], Exploding(), [2.0], dt=0.01, t_end=10.0)
    assert 0 < info.value.t < 10


def test_integrate_is_deterministic():
    J = sample_matrix(30, 1.8, seed=5)
    x0 = np.linspace(-1, 1, 30)
    a = integrate(J, TANH, x0, 0.01, 5.0).states
    b = integrate(J, TANH, x0, 0.01, 5.0).states
    np.testing.assert_array_equal(a, b)
