import math

import numpy as np
import pytest

from natrans import (
    AlgebraElement,
    BarrierProfile,
    LogisticBarrierParams,
    PathOnSphere,
    ProfileError,
    ProjectorPair,
    RosenZenerParams,
    Signature,
    SpinFieldProfile,
    adiabaticity_ratio,
    born_amplitude,
    first_order_fourier_spinflip,
    gamma_element,
    generic_transition,
    geodesic_curvature,
    leading_order_probability,
    logistic_profile,
    maitra_heller_amplitude,
    oracle_transition,
    reflection_amplitude,
    rosen_zener_profile,
    spin_flip_amplitude,
    spin_phase_general,
    wkbj_wavefunction,
)
from natrans.adiabatic import effective_potential, transported_tangent

C = Signature.COMPACT
J3 = AlgebraElement.basis_element(3, C)
PROJ = ProjectorPair.from_generators(-J3, -J3)


def rz(b0, b1, T=1.0):
    return rosen_zener_profile(RosenZenerParams(b0, b1, T))


def field_from(b1, b0=1.0, horizon=40.0):
    return SpinFieldProfile(lambda t: np.stack([b1(t), 0 * t, b0 + 0 * t], -1), horizon, 1e-12)


def flat_barrier(k=1.0):
    return BarrierProfile(lambda x: 0.0 * x, k, 20.0, dpotential=lambda x: 0.0 * x,
                          d2potential=lambda x: 0.0 * x)


def bump_barrier(scale=1.0, k=1.0, shift=0.0):
    U = lambda x: scale * 0.3 * np.exp(-((x - shift) ** 2))  # noqa: E731
    dU = lambda x: -2 * (x - shift) * U(x)  # noqa: E731
    return BarrierProfile(U, k, 12.0, dpotential=dU, center=shift)


# -- adiabaticity ratio --------------------------------------------------

def test_constant_field_has_zero_ratio():
    assert adiabaticity_ratio(field_from(lambda t: 0 * t)) == 0.0


def test_spin_ratio_is_theta_dot_over_twice_the_field():
    sp = rz(1.0, 0.5)
    t = sp.sample_grid(4001)
    B, dB = sp.field(t), sp.derivative(t)
    theta_dot = (B[:, 0] * dB[:, 2] - B[:, 2] * dB[:, 0]) / (B[:, 0] ** 2 + B[:, 2] ** 2)
    want = np.max(np.abs(theta_dot) / (2 * np.linalg.norm(B, axis=1)))
    assert adiabaticity_ratio(sp) == pytest.approx(want, rel=1e-8)


def test_barrier_ratio_is_momentum_gradient_over_momentum_squared():
    bp = logistic_profile(LogisticBarrierParams(2.0, 0.5))
    x = bp.sample_grid(4001)
    want = np.max(np.abs(bp.dmomentum(x)) / (2 * bp.momentum(x) ** 2))
    assert adiabaticity_ratio(bp) == pytest.approx(want, rel=1e-6)


# -- gamma element and the generic route ---------------------------------

def test_gamma_of_constant_profile_is_zero():
    g = gamma_element(field_from(lambda t: 0 * t))
    assert np.all(g.c == 0.0)


@pytest.mark.parametrize("b0, b1", [(1.0, 0.5), (2.0, 1.5), (3.0, 2.2)])
def test_gamma_has_no_cartan_part_and_matches_direct_route(b0, b1):
    sp = rz(b0, b1)
    g = gamma_element(sp, full_output=True)
    assert abs(g.gamma.c[2]) <= max(g.error_estimate, 1e-12)
    direct = spin_flip_amplitude(sp)
    assert leading_order_probability(g.gamma, PROJ) == pytest.approx(direct.probability, abs=1e-6)


@pytest.mark.parametrize("shift", [-5.0, -1.3, 2.0, 5.0])
def test_reference_time_is_a_gauge_choice(shift):
    sp = rz(2.0, 1.5)
    base = generic_transition(sp).probability
    moved = generic_transition(sp, t_ref=shift).probability
    assert abs(moved - base) < 1e-9


def test_gamma_conjugates_under_reference_shift():
    sp = rz(2.0, 1.5)
    a, b = gamma_element(sp, 0.0), gamma_element(sp, 3.0)
    assert math.hypot(*a.c[:2]) == pytest.approx(math.hypot(*b.c[:2]), rel=1e-8)


def test_leading_order_trace_by_hand():
    assert leading_order_probability(AlgebraElement.zero(C), PROJ) == 0.0
    c = 0.37
    # Gamma = c i sigma2 / 2 has off-diagonal entries of modulus c/2
    assert leading_order_probability(c * AlgebraElement.basis_element(2, C), PROJ) == pytest.approx(c * c / 4)


@pytest.mark.parametrize("b1", [0.25, 0.5, 1.5, 2.5])
def test_weakly_nonadiabatic_rosen_zener_against_oracle(b1):
    sp = rz(3.0, b1)
    o = oracle_transition(sp.to_driving_profile()).probability
    assert generic_transition(sp).probability == pytest.approx(o, rel=0.10)


def test_barrier_generic_route_matches_direct():
    bp = logistic_profile(LogisticBarrierParams(2.0, 0.3))
    direct = reflection_amplitude(bp).probability
    assert generic_transition(bp).probability == pytest.approx(direct, rel=1e-6)


# -- spin flip -----------------------------------------------------------

def test_no_transverse_field_no_flip():
    assert spin_flip_amplitude(field_from(lambda t: 0 * t)).amplitude == 0


def test_rosen_zener_examples():
    a = spin_flip_amplitude(rz(1.0, 0.5))
    assert a.probability == pytest.approx(1 / math.cosh(math.pi) ** 2, rel=0.10)
    assert a.valid
    assert spin_flip_amplitude(rz(2.0, 1.0)).probability < 1e-3


def test_flip_probability_under_translation_reversal_and_tau1():
    sp = rz(1.5, 0.8)
    base = spin_flip_amplitude(sp).probability
    B = sp.field
    shifted = SpinFieldProfile(lambda t: B(t - 3.0), sp.horizon, sp.tolerance, center=3.0)
    reversed_ = SpinFieldProfile(lambda t: B(-t), sp.horizon, sp.tolerance)
    assert spin_flip_amplitude(shifted).probability == pytest.approx(base, rel=1e-8)
    assert spin_flip_amplitude(reversed_).probability == pytest.approx(base, rel=1e-8)
    assert spin_flip_amplitude(sp, tau1=1.7).probability == pytest.approx(base, rel=1e-8)


def test_out_of_plane_field_rejected():
    sp = SpinFieldProfile(lambda t: np.stack([0 * t, 0.2 / np.cosh(t), 1 + 0 * t], -1), 40.0, 1e-12)
    with pytest.raises(ProfileError):
        spin_flip_amplitude(sp)


def test_level_crossing_rejected():
    with pytest.raises(ProfileError):
        SpinFieldProfile(lambda t: np.stack([0 * t, 0 * t, np.tanh(t)], -1), 5.0, 1.0)


# -- general phase -------------------------------------------------------

def test_phase_rate_reductions():
    t = np.linspace(-2, 2, 41)
    mag = lambda t: 2 + np.cos(t)  # noqa: E731
    rate = spin_phase_general(np.sin, lambda t: 0 * t, mag)
    np.testing.assert_allclose(rate(t), mag(t), rtol=1e-14)
    rate = spin_phase_general(lambda t: 0 * t, lambda t: 0.5 * np.sin(t), mag)
    np.testing.assert_allclose(rate(t), mag(t) * np.abs(1 - 0.5 * np.cos(t) / mag(t)), rtol=1e-9)


def test_phase_rate_first_order_correction():
    # |B| sqrt(sin^2 + (cos - eps)^2) = |B| - eps |B| cos(theta) + O(eps^2)
    th = 0.7
    for eps in (1e-2, 1e-3, 1e-4):
        rate = spin_phase_general(lambda t: th + 0 * t, lambda t: eps * t, lambda t: 1 + 0 * t)
        r = float(rate(np.array([0.0]))[0])
        assert abs(r - (1 - eps * math.cos(th))) < eps**2


# -- geometry and the Fourier estimator ----------------------------------

def great_circle(speed=1.0):
    return PathOnSphere(lambda s: np.stack([np.cos(speed * s), np.sin(speed * s), 0 * s], -1))


def latitude(theta0, speed=1.0):
    w = speed / math.sin(theta0)  # unit speed when speed = 1
    return PathOnSphere(lambda s: np.stack([math.sin(theta0) * np.cos(w * s),
                                            math.sin(theta0) * np.sin(w * s),
                                            math.cos(theta0) + 0 * s], -1))


def test_geodesic_curvature_examples():
    s = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(geodesic_curvature(great_circle(), s), 0, atol=1e-9)
    th = 0.6
    np.testing.assert_allclose(np.abs(geodesic_curvature(latitude(th), s)), 1 / math.tan(th), rtol=1e-6)


def test_geodesic_curvature_one_form_is_reparameterization_invariant():
    # kappa_g ds is invariant; under s -> 2 s the density doubles
    th = 0.6
    s = np.linspace(-1, 1, 7)
    slow, fast = latitude(th, 1.0), latitude(th, 2.0)
    np.testing.assert_allclose(geodesic_curvature(fast, s), 2 * geodesic_curvature(slow, 2 * s), rtol=1e-7)


def test_geodesic_curvature_needs_motion():
    still = PathOnSphere(lambda s: np.tile([0.0, 0.0, 1.0], (np.size(s), 1)))
    with pytest.raises(ProfileError):
        geodesic_curvature(still, np.array([0.0]))


def test_path_must_stay_on_sphere():
    with pytest.raises(ProfileError):
        PathOnSphere(lambda s: np.stack([s, 0 * s, 1 + 0 * s], -1))


def test_transported_tangent_phase_tracks_curvature():
    th = 0.9
    path = latitude(th)
    z = transported_tangent(path, -3.0, 3.0)
    s = np.linspace(-2, 2, 9)
    rate = np.gradient(np.unwrap(np.angle(z(s))), s)
    np.testing.assert_allclose(np.abs(rate), 1 / math.tan(th), rtol=1e-4)
    np.testing.assert_allclose(np.abs(z(s)), 1.0, rtol=1e-8)


def test_fourier_of_stationary_path_is_zero():
    still = PathOnSphere(lambda s: np.tile([0.0, 0.0, 1.0], (np.size(s), 1)))
    assert first_order_fourier_spinflip(still, 2.0) == 0.0


def test_fourier_on_a_geodesic_is_the_plain_transform():
    # n = (sin f, 0, cos f) with f' = a sech(s): |n'|/2 transforms to (a pi / 2) sech(pi T)
    a, T = 0.4, 1.3
    f = lambda s: a * (2 * np.arctan(np.tanh(s / 2)))  # noqa: E731
    path = PathOnSphere(lambda s: np.stack([np.sin(f(s)), 0 * s, np.cos(f(s))], -1), fd_step=1e-3)
    want = (a * math.pi / 2 / math.cosh(math.pi * T)) ** 2
    assert first_order_fourier_spinflip(path, T, scale=1.0) == pytest.approx(want, rel=1e-6)


@pytest.mark.parametrize("b1", [0.3, 0.5])
def test_fourier_agrees_with_flip_amplitude_for_unit_field(b1):
    # constant-magnitude field tipped out and back by f = b1 sech(s)
    T = 3.0
    f = lambda s: b1 / np.cosh(s)  # noqa: E731
    path = PathOnSphere(lambda s: np.stack([np.sin(f(s)), 0 * s, np.cos(f(s))], -1))
    sp = SpinFieldProfile(lambda t: T * np.stack([-np.sin(f(t)), 0 * t, np.cos(f(t))], -1), 40.0, 1e-12)
    w = first_order_fourier_spinflip(path, T)
    assert w == pytest.approx(spin_flip_amplitude(sp).probability, rel=0.20)


# -- barriers ------------------------------------------------------------

def test_flat_potential_gives_nothing():
    bp = flat_barrier()
    assert reflection_amplitude(bp).probability == 0.0
    assert maitra_heller_amplitude(bp).probability == 0.0
    assert born_amplitude(bp).probability == 0.0


def test_logistic_reflection_against_closed_form():
    bp = logistic_profile(LogisticBarrierParams(2.0, 0.5))
    want = math.sinh(2 * math.pi * (1 - math.sqrt(0.5))) / math.sinh(2 * math.pi * (1 + math.sqrt(0.5)))
    assert abs(reflection_amplitude(bp).amplitude) == pytest.approx(want, rel=0.15)


def test_reflection_invariant_under_translation_and_phase_origin():
    bp = bump_barrier()
    base = reflection_amplitude(bp).probability
    assert reflection_amplitude(bp.translated(4.0)).probability == pytest.approx(base, rel=1e-8)
    assert reflection_amplitude(bp, x0=1.5).probability == pytest.approx(base, rel=1e-8)


def test_born_is_linear_in_the_potential():
    a = born_amplitude(bump_barrier(1.0)).amplitude
    b = born_amplitude(bump_barrier(2.0)).amplitude
    assert b == pytest.approx(2 * a, rel=1e-12)


def test_born_for_a_gaussian_bump():
    # (1/2ik) int exp(2ikx) U0 exp(-x^2) dx = U0 sqrt(pi) exp(-k^2) / (2ik)
    res = born_amplitude(bump_barrier(1.0))
    assert res.amplitude == pytest.approx(0.3 * math.sqrt(math.pi) * math.exp(-1) / 2j, rel=1e-9)


def test_estimators_converge_for_weak_steps():
    ratios = []
    for beta in (1e-2, 1e-3, 1e-4):
        bp = logistic_profile(LogisticBarrierParams(1.0, beta))
        r = abs(reflection_amplitude(bp).amplitude)
        b = abs(born_amplitude(bp).amplitude)
        m = abs(maitra_heller_amplitude(bp).amplitude)
        ratios.append((r / b, m / b))
        assert r / m == pytest.approx(1.0, abs=1e-5)
    for i in range(2):
        devs = [abs(x[i] - 1) for x in ratios]
        assert devs == sorted(devs, reverse=True) and devs[-1] < 1e-3


def test_maitra_heller_close_to_reflection_when_both_valid():
    for beta in (0.05, 0.1, 0.2):
        bp = logistic_profile(LogisticBarrierParams(2.0, beta))
        a, m = reflection_amplitude(bp), maitra_heller_amplitude(bp)
        assert a.valid and m.valid
        assert abs(m.amplitude) == pytest.approx(abs(a.amplitude), rel=0.30)


def test_effective_potential_vanishes_where_momentum_is_flat():
    bp = bump_barrier()
    x = np.array([-11.0, 11.0])
    assert np.max(np.abs(effective_potential(bp, x))) < 1e-30


def test_wkbj_plane_wave():
    psi = wkbj_wavefunction(flat_barrier(1.3), 0.7 + 0.2j, 0.0, x0=0.5)
    x = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(psi(x), (0.7 + 0.2j) * np.exp(1.3j * (x - 0.5)), atol=1e-13)


def _wkbj_residual(alpha):
    p = LogisticBarrierParams(alpha, 0.5)
    bp = logistic_profile(p, 1.0)
    psi = wkbj_wavefunction(bp, 1.0, 0.0)
    x = np.linspace(-3 * alpha, 3 * alpha, 61)
    h = 1e-3 * alpha
    d2 = (psi(x + h) - 2 * psi(x) + psi(x - h)) / h**2
    resid = np.abs(d2 + bp.momentum(x) ** 2 * psi(x))
    current = np.imag(np.conj(psi(x)) * (psi(x + h) - psi(x - h)) / (2 * h))
    return float(np.max(resid / (bp.momentum(x) ** 2 * np.abs(psi(x))))), current


def test_wkbj_current_and_residual_scaling():
    r_slow, current = _wkbj_residual(4.0)
    np.testing.assert_allclose(current, 1.0, atol=1e-5)
    r_fast, _ = _wkbj_residual(2.0)
    # halving alpha doubles the gradient; the residual is second order in it
    assert 2.0 < r_fast / r_slow < 8.0


def test_over_barrier_regime_enforced():
    with pytest.raises(ProfileError):
        BarrierProfile(lambda x: 2.0 / np.cosh(x) ** 2, 1.0, 40.0)
