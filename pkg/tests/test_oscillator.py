import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from natrans import (
    LogisticBarrierParams,
    OscillatorSpec,
    ProfileError,
    excitation_pipeline,
    logistic_exact,
    perelomov_popov_matrix,
    reduce_mass,
    theta_coefficient,
)
from natrans.cli import _logistic_oscillator
from natrans.numerics import assoc_legendre


def constant_spec(omega=1.3):
    return OscillatorSpec(lambda t: omega + 0 * t, omega, omega, 10.0)


def test_theta_zero_gives_identity_exactly():
    W = perelomov_popov_matrix(0.0, 40)
    np.testing.assert_array_equal(W.entries, np.eye(41))


def test_w00():
    assert perelomov_popov_matrix(0.19, 3)[0, 0] == pytest.approx(0.81, abs=1e-15)


def test_entry_against_formula_by_hand():
    theta = 0.3
    x = math.sqrt(1 - theta)
    # m = 0, n = 2: (0!/2!) (1 - theta) P^1_1(x)^2
    want = 0.5 * (1 - theta) * assoc_legendre(1, 1, x) ** 2
    assert perelomov_popov_matrix(theta, 4)[0, 2] == pytest.approx(want, rel=1e-14)


def test_symmetry_and_parity_at_n_max_40():
    W = perelomov_popov_matrix(0.37, 40).entries
    assert np.max(np.abs(W - W.T)) <= 1e-12
    m, n = np.indices(W.shape)
    assert np.all(W[(m - n) % 2 == 1] == 0.0)


@given(st.floats(0, 0.999), st.integers(0, 60))
def test_entries_are_probabilities(theta, n_max):
    W = perelomov_popov_matrix(theta, n_max).entries
    assert np.all(W >= 0) and np.all(W <= 1)
    assert np.array_equal(W, W.T)


def test_row_sums_are_reported_not_normalized():
    W = perelomov_popov_matrix(0.19, 20)
    assert W.row_sums.shape == (21,)
    assert W.row_sums[0] == pytest.approx(math.sqrt(0.81), rel=1e-3)


@pytest.mark.parametrize("theta, n_max", [(1.0, 3), (-0.1, 3), (math.nan, 3), (0.2, -1), (0.2, 61)])
def test_matrix_input_errors(theta, n_max):
    with pytest.raises(ValueError):
        perelomov_popov_matrix(theta, n_max)


def test_constant_frequency_gives_no_excitation():
    assert theta_coefficient(constant_spec()) == 0.0
    W = excitation_pipeline(constant_spec(), 6)
    np.testing.assert_array_equal(W.entries, np.eye(7))


@pytest.mark.parametrize("alpha, beta", [(2.0, 0.3), (1.0, 0.5), (3.0, 0.6)])
def test_logistic_theta_matches_exact_reflection(alpha, beta):
    theta = theta_coefficient(_logistic_oscillator(alpha, beta, 1.0))
    exact = logistic_exact(LogisticBarrierParams(alpha, beta)) ** 2
    assert theta == pytest.approx(exact, rel=0.15)


def test_pipeline_w00_from_exact_reflection():
    W = excitation_pipeline(_logistic_oscillator(0.5, 0.5, 1.0), 4)
    exact = logistic_exact(LogisticBarrierParams(0.5, 0.5)) ** 2
    assert W[0, 0] == pytest.approx(1 - exact, abs=0.15 * exact)
    assert W.valid


def test_pipeline_flags_non_adiabatic_profiles():
    W = excitation_pipeline(_logistic_oscillator(0.5, 0.5, 1.0), 4, threshold=1e-3)
    assert not W.valid


def test_theta_is_time_translation_invariant():
    base = _logistic_oscillator(2.0, 0.4, 1.0)
    moved = OscillatorSpec(lambda t: base.omega(t - 4.0), base.omega_minus, base.omega_plus, base.horizon,
                           base.tolerance, center=4.0, scale=base.scale, domega=lambda t: base.domega(t - 4.0))
    assert theta_coefficient(moved) == pytest.approx(theta_coefficient(base), rel=1e-8)


def test_reduce_mass_without_mass_is_identity():
    spec = constant_spec()
    assert reduce_mass(spec) is spec


def test_constant_mass_two():
    spec = OscillatorSpec(lambda t: 1.0 + 0 * t, 1.0, 1.0, 10.0, mass=lambda t: 2.0 + 0 * t)
    red = reduce_mass(spec)
    assert red.omega_minus == 2.0 and red.omega_plus == 2.0
    np.testing.assert_allclose(red.omega(np.linspace(-4, 4, 9)), 2.0, rtol=1e-12)
    assert red.horizon == pytest.approx(5.0, rel=1e-12)  # t' = t / 2


def test_mass_reduction_round_trip():
    # m = 1 / (1 + a sech^2 t) gives t' = t + a tanh t exactly
    a = 0.4
    ref = _logistic_oscillator(2.0, 0.4, 1.0)
    mass = lambda t: 1 / (1 + a / np.cosh(t) ** 2)  # noqa: E731
    tau = lambda t: t + a * np.tanh(t)  # noqa: E731
    spec = OscillatorSpec(lambda t: ref.omega(tau(t)) / mass(t), ref.omega_minus, ref.omega_plus,
                          ref.horizon, 1e-11, mass=mass, scale=ref.scale)
    assert theta_coefficient(spec) == pytest.approx(theta_coefficient(ref), rel=1e-8)


def test_spec_validation():
    with pytest.raises(ProfileError):
        OscillatorSpec(lambda t: np.tanh(t), 1.0, 1.0, 5.0)
    with pytest.raises(ProfileError):
        OscillatorSpec(lambda t: 1.0 + 0 * t, 1.0, 1.0, 5.0, mass=lambda t: -1.0 + 0 * t)
    with pytest.raises(ProfileError):
        OscillatorSpec(lambda t: 1.0 + 0 * t, 2.0, 1.0, 5.0)
