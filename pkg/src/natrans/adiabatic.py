"""Leading-order non-adiabatic transition amplitudes.

The generic route works for any :class:`~natrans.oracle.DrivingProfile`:
decompose b(t) = v beta v^-1, integrate the algebra-valued element ``gamma``
and evaluate the trace formula.  Specialized closed integrals cover the two
physical problems (spin flip in SU(2), over-barrier reflection in SU(1,1)),
together with the WKBJ, Maitra-Heller, Born and first-order Fourier estimators
used for comparison.

Amplitude normalization: with J_a = i sigma_a / 2 the trace formula gives
the spin-flip amplitude ``(1/2) int exp(2i alpha) dtheta``; the specialized
integral uses the same factor so both routes agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DecompositionError, ProfileError
from .lie import (
    AlgebraElement,
    Signature,
    _cartan_coeffs,
    _dexp_coeffs,
    _norm_coeffs,
    _rotate_cartan,
)
from .numerics import (
    CumulativeIntegral,
    QuadratureSpec,
    central_difference,
    find_truncation,
    integrate_adaptive,
    integrate_improper_oscillatory,
    second_difference,
)
from .oracle import DrivingProfile, ProjectorPair, TransitionResult

VALIDITY_THRESHOLD = 0.3
FD_NOISE_FLOOR = 1e-12
DEFAULT_SPEC = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-14, truncation_threshold=1e-13)


def _vectorize(fn):
    def wrapped(t):
        return np.asarray(fn(np.atleast_1d(np.asarray(t, dtype=float))))
    return wrapped


@dataclass(frozen=True, eq=False)
class SpinFieldProfile:
    """Precession field (mu B)(t) in inverse-time units, settling onto the 3-axis.

    ``field`` maps a time array to shape (n, 3); ``field_derivative`` is optional
    and replaces finite differences when given.
    """

    field: object
    horizon: float
    tolerance: float = 1e-10
    field_derivative: object = None
    center: float = 0.0
    scale: float = 1.0
    fd_step: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "field", _vectorize(self.field))
        if self.field_derivative is not None:
            object.__setattr__(self, "field_derivative", _vectorize(self.field_derivative))
        ends = self.field(np.array([self.center - self.horizon, self.center + self.horizon]))
        transverse = np.hypot(ends[:, 0], ends[:, 1])
        if np.any(transverse > self.tolerance):
            raise ProfileError(
                f"transverse field at the horizon {transverse.max():.3e} exceeds {self.tolerance:.3e}"
            )
        t = self.sample_grid()
        if np.any(np.linalg.norm(self.field(t), axis=1) <= 0):
            raise ProfileError("field magnitude vanishes (level crossing)")

    def sample_grid(self, n: int = 2001) -> np.ndarray:
        return np.linspace(self.center - self.horizon, self.center + self.horizon, n)

    @property
    def step(self) -> float:
        return self.fd_step if self.fd_step is not None else 1e-3 * self.scale

    def derivative(self, t) -> np.ndarray:
        if self.field_derivative is not None:
            return self.field_derivative(t)
        return central_difference(self.field, t, self.step)

    def magnitude(self, t) -> np.ndarray:
        return np.linalg.norm(self.field(t), axis=1)

    def generator(self, t) -> np.ndarray:
        # b = -i (B . sigma) = -2 B . J with J_a = i sigma_a / 2
        return -2.0 * self.field(t)

    def to_driving_profile(self) -> DrivingProfile:
        ends = self.generator(np.array([self.center - self.horizon, self.center + self.horizon]))
        betas = [AlgebraElement([0.0, 0.0, c[2]], Signature.COMPACT) for c in ends]
        return DrivingProfile(self.generator, Signature.COMPACT, betas[0], betas[1], self.horizon,
                              2.0 * self.tolerance, center=self.center, scale=self.scale)


@dataclass(frozen=True, eq=False)
class BarrierProfile:
    """Potential U(x) (units of k^2) with over-barrier wavenumber k.

    U must approach constants at both horizons; it need not vanish there (a
    step such as the logistic barrier is allowed).
    """

    potential: object
    k: float
    horizon: float
    tolerance: float = 1e-10
    dpotential: object = None
    d2potential: object = None
    center: float = 0.0
    scale: float = 1.0
    fd_step: float | None = None

    def __post_init__(self):
        if not self.k > 0:
            raise ProfileError("k must be positive")
        object.__setattr__(self, "potential", _vectorize(self.potential))
        for name in ("dpotential", "d2potential"):
            if getattr(self, name) is not None:
                object.__setattr__(self, name, _vectorize(getattr(self, name)))
        x = self.sample_grid()
        if np.any(self.k**2 - self.potential(x) <= 0):
            raise ProfileError("k^2 - U(x) <= 0 somewhere: not an over-barrier problem")
        ends = np.abs(self.dU(np.array([self.center - self.horizon, self.center + self.horizon])))
        if np.any(ends > self.tolerance):
            raise ProfileError(f"U'(+-horizon) = {ends.max():.3e} exceeds {self.tolerance:.3e}")

    def sample_grid(self, n: int = 2001) -> np.ndarray:
        return np.linspace(self.center - self.horizon, self.center + self.horizon, n)

    @property
    def step(self) -> float:
        return self.fd_step if self.fd_step is not None else 1e-3 * self.scale

    def dU(self, x) -> np.ndarray:
        if self.dpotential is not None:
            return self.dpotential(x)
        return central_difference(self.potential, x, self.step)

    def d2U(self, x) -> np.ndarray:
        if self.d2potential is not None:
            return self.d2potential(x)
        return second_difference(self.potential, x, self.step)

    def momentum(self, x) -> np.ndarray:
        return np.sqrt(self.k**2 - self.potential(x))

    def dmomentum(self, x) -> np.ndarray:
        return -self.dU(x) / (2.0 * self.momentum(x))

    def d2momentum(self, x) -> np.ndarray:
        p = self.momentum(x)
        dU = self.dU(x)
        return -self.d2U(x) / (2.0 * p) - dU**2 / (4.0 * p**3)

    def generator(self, x) -> np.ndarray:
        U = self.potential(x)
        k = self.k
        return np.stack([np.zeros_like(U), U / k, -(2.0 * k - U / k)], axis=1)

    def to_driving_profile(self) -> DrivingProfile:
        return DrivingProfile.from_asymptotes(self.generator, Signature.NONCOMPACT, self.horizon,
                                              self.center, self.scale)

    def translated(self, dx: float) -> "BarrierProfile":
        shift = lambda f: None if f is None else (lambda x: f(np.asarray(x) - dx))  # noqa: E731
        return BarrierProfile(shift(self.potential), self.k, self.horizon, self.tolerance,
                              shift(self.dpotential), shift(self.d2potential),
                              self.center + dx, self.scale, self.fd_step)


@dataclass(frozen=True, eq=False)
class PathOnSphere:
    """Unit-vector path n(s); derivatives by central differences."""

    n_of_s: object
    fd_step: float = 1e-3
    check_points: tuple = (-5.0, 5.0)

    def __post_init__(self):
        object.__setattr__(self, "n_of_s", _vectorize(self.n_of_s))
        s = np.linspace(*self.check_points, 101)
        norms = np.linalg.norm(self.n_of_s(s), axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-10:
            raise ProfileError("path leaves the unit sphere")

    def d1(self, s):
        return central_difference(self.n_of_s, s, self.fd_step)

    def d2(self, s):
        return second_difference(self.n_of_s, s, self.fd_step)


def _as_driving(profile) -> DrivingProfile:
    if isinstance(profile, DrivingProfile):
        return profile
    return profile.to_driving_profile()


def _frame_data(profile: DrivingProfile, t: np.ndarray, step: float):
    """beta3(t) and xi(t) = v^-1 dv/dt on an array of times."""
    sig = profile.sig
    sign = 1.0 if profile.beta_minus.c[2] >= 0 else -1.0

    def gen_of(s):
        return _cartan_coeffs(profile.coeffs(s), sig, sign)[1]

    beta3, gen = _cartan_coeffs(profile.coeffs(t), sig, sign)
    # differentiate the generator (it vanishes where b sits on the axis) and
    # map through the closed-form derivative of exp
    xi = _dexp_coeffs(gen, central_difference(gen_of, t, step), sig)
    return beta3, xi


def _ratio_samples(profile: DrivingProfile, step: float, n: int = 4001) -> float:
    t = np.linspace(profile.center - profile.horizon, profile.center + profile.horizon, n)
    beta3, xi = _frame_data(profile, t, step)
    beta = np.zeros((t.size, 3))
    beta[:, 2] = beta3
    return float(np.max(_norm_coeffs(xi, profile.sig) / _norm_coeffs(beta, profile.sig)))


def adiabaticity_ratio(profile, n_samples: int = 4001, fd_step: float | None = None) -> float:
    """max_t ||v^-1 dv/dt|| / ||beta|| with the adjoint-trace norm.

    Accepts a DrivingProfile or anything with ``to_driving_profile``.
    """
    dp = _as_driving(profile)
    try:
        return _ratio_samples(dp, fd_step or 1e-3 * dp.scale, n_samples)
    except DecompositionError as exc:
        raise DecompositionError(f"adiabaticity ratio undefined: {exc}") from exc


@dataclass(frozen=True)
class GammaResult:
    gamma: AlgebraElement
    error_estimate: float
    truncated_at: tuple[float, float]
    converged: bool
    t_ref: float


def gamma_element(profile, t_ref: float | None = None, ctrl: QuadratureSpec = DEFAULT_SPEC,
                  fd_step: float | None = None, full_output: bool = False):
    """gamma = int R(h0^-1)(v^-1 dv/dt) dt over the real line, h0 = exp(int_{t_ref} beta).

    R(h) eta = h eta h^-1 - eta.  The component of v^-1 dv/dt along the
    frame-changing directions is added back (it integrates to zero when
    v -> e at both ends, and otherwise accounts for a tilted asymptotic frame),
    so the integrand is the off-Cartan part of Ad(h0^-1)(v^-1 dv/dt).
    """
    dp = _as_driving(profile)
    sig = dp.sig
    step = fd_step or 1e-3 * dp.scale
    t_ref = dp.center if t_ref is None else float(t_ref)

    def xi_norm(t):
        _, xi = _frame_data(dp, np.atleast_1d(t), step)
        return np.linalg.norm(xi, axis=1)

    lo, hi = find_truncation(xi_norm, ctrl.truncation_threshold, dp.center, dp.scale)
    lo, hi = min(lo, t_ref), max(hi, t_ref)
    sign = 1.0 if dp.beta_minus.c[2] >= 0 else -1.0
    beta3_of = lambda t: _cartan_coeffs(dp.coeffs(t), sig, sign)[0]  # noqa: E731
    phase = CumulativeIntegral(beta3_of, lo, hi, anchor=t_ref, panel_width=dp.scale / 8)

    def integrand(t):
        _, xi = _frame_data(dp, t, step)
        phi = phase(t)
        deficit = _rotate_cartan(xi, -phi) - xi  # R(h0^-1) xi
        off = xi.copy()
        off[:, 2] = 0.0
        return deficit + off

    turns = abs(phase(np.array([hi]))[0] - phase(np.array([lo]))[0]) / (2 * np.pi)
    panels = int(np.clip(np.ceil(2 * turns) + 8, 8, 8192))
    # finite-difference noise in xi sits near 1e-13; do not chase it
    spec = QuadratureSpec(ctrl.rel_tol, max(ctrl.abs_tol, FD_NOISE_FLOOR), ctrl.max_subdivisions,
                          ctrl.truncation_threshold)
    res = integrate_adaptive(integrand, lo, hi, spec, initial_panels=panels)
    gamma = AlgebraElement(np.real(res.value), sig)
    out = GammaResult(gamma, res.error_estimate, (lo, hi), res.converged, t_ref)
    if not res.converged:
        raise ConvergenceError("gamma quadrature did not converge", partial=out)
    return out if full_output else gamma


def leading_order_probability(gamma: AlgebraElement, proj: ProjectorPair) -> float:
    """Tr(P+ Gamma P- Gamma^dagger) with Gamma the 2x2 matrix of ``gamma``.

    The adjoint makes the trace non-negative in the anti-Hermitian su(2)
    realization; for su(1,1) off-Cartan elements Gamma is Hermitian and the
    adjoint changes nothing.
    """
    G = gamma.matrix
    return float(np.real(np.trace(proj.p_plus @ G @ proj.p_minus @ G.conj().T)))


def generic_transition(profile, t_ref: float | None = None, ctrl: QuadratureSpec = DEFAULT_SPEC,
                       threshold: float = VALIDITY_THRESHOLD) -> TransitionResult:
    """gamma element + trace formula, with diagnostics."""
    dp = _as_driving(profile)
    g = gamma_element(dp, t_ref, ctrl, full_output=True)
    proj = ProjectorPair.from_generators(dp.beta_minus, dp.beta_plus)
    w = leading_order_probability(g.gamma, proj)
    ratio = adiabaticity_ratio(dp)
    return TransitionResult(w, None, ratio, g.error_estimate, ratio <= threshold and g.converged,
                            {"gamma": g.gamma.c.tolist(), "truncated_at": g.truncated_at})


def _spin_theta_dot(sp: SpinFieldProfile, t):
    B = sp.field(t)
    dB = sp.derivative(t)
    # theta = -arctan(B1 / B0)
    return (B[:, 0] * dB[:, 2] - B[:, 2] * dB[:, 0]) / (B[:, 0] ** 2 + B[:, 2] ** 2)


def spin_flip_amplitude(sp: SpinFieldProfile, ctrl: QuadratureSpec = DEFAULT_SPEC,
                        tau1: float | None = None,
                        threshold: float = VALIDITY_THRESHOLD) -> TransitionResult:
    """A = (1/2) int exp(2i alpha(t)) dtheta/dt dt, alpha = int_{tau1}^t |B|.

    For fields in the x-z plane, tan(theta) = -B1 / B0.  ``tau1`` only sets
    the phase of the amplitude; it defaults to the profile centre.
    """
    probe = sp.field(sp.sample_grid())
    if np.max(np.abs(probe[:, 1])) > sp.tolerance:
        raise ProfileError("spin_flip_amplitude needs a field in the x-z plane; "
                           "use generic_transition for general fields")
    tau1 = sp.center if tau1 is None else float(tau1)
    envelope = lambda t: 0.5 * _spin_theta_dot(sp, t)  # noqa: E731
    lo, hi = find_truncation(envelope, ctrl.truncation_threshold, sp.center, sp.scale)
    lo, hi = min(lo, tau1), max(hi, tau1)
    alpha = CumulativeIntegral(sp.magnitude, lo, hi, anchor=tau1, panel_width=sp.scale / 8)
    res = integrate_improper_oscillatory(envelope, lambda t: 2.0 * alpha(t), ctrl,
                                         center=sp.center, scale=sp.scale, bounds=(lo, hi))
    t = sp.sample_grid(4001)
    ratio = float(np.max(np.abs(_spin_theta_dot(sp, t)) / (2.0 * sp.magnitude(t))))
    amp = complex(res.value)
    return TransitionResult(abs(amp) ** 2, amp, ratio, 2 * abs(amp) * res.error_estimate,
                            ratio <= threshold and res.converged,
                            {"truncated_at": res.truncated_at})


def spin_phase_general(theta, phi, magnitude, fd_step: float = 1e-4):
    """Phase-rate integrand for a field with azimuthal motion.

    Returns t -> |B| sqrt(sin^2 theta + (cos theta - phi'/|B|)^2), the
    integrand of alpha after the gauge shift exp(-2 phi J3).  ``magnitude`` is
    mu |B| in inverse-time units.
    """
    theta, phi, magnitude = map(_vectorize, (theta, phi, magnitude))

    def rate(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        th = theta(t)
        mag = magnitude(t)
        if np.any(mag <= 0):
            raise ProfileError("field magnitude must be positive")
        ratio = central_difference(phi, t, fd_step) / mag
        return mag * np.sqrt(np.sin(th) ** 2 + (np.cos(th) - ratio) ** 2)

    return rate


def geodesic_curvature(path: PathOnSphere, s, min_speed: float = 1e-8):
    """kappa_g = n'' . (n' x n) / |n'|^2 by central differences."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    n = path.n_of_s(s)
    d1 = path.d1(s)
    d2 = path.d2(s)
    speed2 = np.sum(d1 * d1, axis=1)
    if np.any(speed2 < min_speed**2):
        raise ProfileError("|n'(s)| below threshold: geodesic curvature undefined")
    return np.einsum("ij,ij->i", d2, np.cross(d1, n)) / speed2


def _reference_axis(path: PathOnSphere, lo: float, hi: float) -> np.ndarray:
    s = np.linspace(lo, hi, 2001)
    n = path.n_of_s(s)
    axes = np.eye(3)
    clearance = [np.min(np.linalg.norm(np.cross(a, n), axis=1)) for a in axes]
    best = int(np.argmax(clearance))
    if clearance[best] < 0.05:
        raise ProfileError("path comes too close to every coordinate axis for a tangent frame")
    return axes[best]


def transported_tangent(path: PathOnSphere, lo: float, hi: float, anchor: float = 0.0):
    """z(s) = n' . e + i n' . (n x e) in a frame e parallel-transported along n.

    For regular paths arg z decreases at the rate kappa_g, so
    z = |n'| exp(-i varsigma) up to a constant phase; unlike the curvature
    integral it stays well defined where the path reverses (n' = 0).
    """
    a = _reference_axis(path, lo, hi)

    def frame(s):
        n = path.n_of_s(s)
        f1 = a[None, :] - (n @ a)[:, None] * n
        f1 /= np.linalg.norm(f1, axis=1)[:, None]
        return n, f1, np.cross(n, f1)

    def connection(s):
        _, f1, f2 = frame(s)
        df1 = central_difference(lambda u: frame(u)[1], s, path.fd_step)
        return -np.einsum("ij,ij->i", df1, f2)

    probe = np.linspace(lo, hi, 257)
    if np.max(np.abs(connection(probe))) <= 1e-14:
        # planar path through the reference axis: the frame is already transported
        psi = lambda s: np.zeros_like(s)  # noqa: E731
    else:
        psi = CumulativeIntegral(connection, lo, hi, anchor=anchor, panel_width=(hi - lo) / 512)

    def z(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        _, f1, f2 = frame(s)
        d1 = path.d1(s)
        zf = np.einsum("ij,ij->i", d1, f1) + 1j * np.einsum("ij,ij->i", d1, f2)
        return zf * np.exp(-1j * psi(s))

    return z


def first_order_fourier_spinflip(path: PathOnSphere, T: float, ctrl: QuadratureSpec = DEFAULT_SPEC,
                                 center: float = 0.0, scale: float = 1.0) -> float:
    """|int exp(-2iTs) chi(s) ds|^2 with chi = (i/2) |n'| exp(-i varsigma).

    ``chi`` is evaluated as (i/2) z(s) from :func:`transported_tangent`.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    speed = lambda s: np.linalg.norm(path.d1(s), axis=1)  # noqa: E731
    probe = speed(np.linspace(center - 10 * scale, center + 10 * scale, 2001))
    if np.max(probe) == 0.0:
        return 0.0
    lo, hi = find_truncation(speed, ctrl.truncation_threshold, center, scale)
    z = transported_tangent(path, lo, hi, anchor=center)
    res = integrate_improper_oscillatory(lambda s: 0.5j * z(s), lambda s: -2.0 * T * s, ctrl,
                                         center=center, scale=scale, bounds=(lo, hi))
    return float(abs(res.value) ** 2)


def _barrier_ratio(bp: BarrierProfile) -> float:
    x = bp.sample_grid(4001)
    p = bp.momentum(x)
    # ||v^-1 v'|| / ||beta|| = |p'| / (2 p^2) with the adjoint-trace norm
    return float(np.max(np.abs(bp.dmomentum(x)) / (2.0 * p**2)))


def _barrier_phase(bp: BarrierProfile, envelope, ctrl, x0):
    lo, hi = find_truncation(envelope, ctrl.truncation_threshold, bp.center, bp.scale)
    lo, hi = min(lo, x0), max(hi, x0)
    P = CumulativeIntegral(bp.momentum, lo, hi, anchor=x0, panel_width=bp.scale / 8)
    return P, (lo, hi)


def _noise_aware(bp: BarrierProfile, ctrl: QuadratureSpec) -> QuadratureSpec:
    """Loosen abs_tol to the finite-difference noise level when U' is not analytic."""
    if bp.dpotential is not None:
        return ctrl
    floor = FD_NOISE_FLOOR * 10 * bp.k**2 * max(1.0, bp.horizon / bp.scale)
    return QuadratureSpec(ctrl.rel_tol, max(ctrl.abs_tol, floor), ctrl.max_subdivisions,
                          ctrl.truncation_threshold)


def reflection_amplitude(bp: BarrierProfile, ctrl: QuadratureSpec = DEFAULT_SPEC,
                         x0: float | None = None,
                         threshold: float = VALIDITY_THRESHOLD) -> TransitionResult:
    """A = (1/4) int exp(2i int_{x0}^x p) U'(x) / (k^2 - U(x)) dx, R = |A|^2."""
    x0 = bp.center if x0 is None else float(x0)
    envelope = lambda x: 0.25 * bp.dU(x) / (bp.k**2 - bp.potential(x))  # noqa: E731
    ctrl = _noise_aware(bp, ctrl)
    P, bounds = _barrier_phase(bp, envelope, ctrl, x0)
    res = integrate_improper_oscillatory(envelope, lambda x: 2.0 * P(x), ctrl,
                                         center=bp.center, scale=bp.scale, bounds=bounds)
    ratio = _barrier_ratio(bp)
    amp = complex(res.value)
    return TransitionResult(abs(amp) ** 2, amp, ratio, 2 * abs(amp) * res.error_estimate,
                            ratio <= threshold and res.converged, {"truncated_at": res.truncated_at})


def wkbj_wavefunction(bp: BarrierProfile, c1: complex, c2: complex, x0: float = 0.0):
    """Psi(x) = sqrt(k/p) (c1 exp(i int_{x0}^x p) + c2 exp(-i int_{x0}^x p))."""
    lo = bp.center - bp.horizon
    hi = bp.center + bp.horizon
    P = CumulativeIntegral(bp.momentum, min(lo, x0), max(hi, x0), anchor=x0,
                           panel_width=bp.scale / 8)

    def psi(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        amp = np.sqrt(bp.k / bp.momentum(x))
        ph = P(x)
        return amp * (c1 * np.exp(1j * ph) + c2 * np.exp(-1j * ph))

    return psi


def effective_potential(bp: BarrierProfile, x) -> np.ndarray:
    """U_eff = -3 p'^2 / (4 p^2) + p'' / (2 p)."""
    p = bp.momentum(x)
    return -3.0 * bp.dmomentum(x) ** 2 / (4.0 * p**2) + bp.d2momentum(x) / (2.0 * p)


def maitra_heller_amplitude(bp: BarrierProfile, ctrl: QuadratureSpec = DEFAULT_SPEC,
                            x0: float | None = None,
                            threshold: float = VALIDITY_THRESHOLD) -> TransitionResult:
    """(1/2i) int U_eff(x) exp(2i int_{x0}^x p) / p(x) dx.

    The 1/(2i) factor makes the weak-potential limit coincide with the Born
    amplitude (1/2ik) int exp(2ikx) U dx.  ``valid`` requires
    max |U_eff| / k^2 <= threshold.
    """
    x0 = bp.center if x0 is None else float(x0)
    envelope = lambda x: effective_potential(bp, x) / (2j * bp.momentum(x))  # noqa: E731
    ctrl = _noise_aware(bp, ctrl)
    P, bounds = _barrier_phase(bp, envelope, ctrl, x0)
    res = integrate_improper_oscillatory(envelope, lambda x: 2.0 * P(x), ctrl,
                                         center=bp.center, scale=bp.scale, bounds=bounds)
    strength = float(np.max(np.abs(effective_potential(bp, bp.sample_grid(4001)))) / bp.k**2)
    amp = complex(res.value)
    return TransitionResult(abs(amp) ** 2, amp, _barrier_ratio(bp), 2 * abs(amp) * res.error_estimate,
                            strength <= threshold and res.converged,
                            {"ueff_over_k2": strength, "truncated_at": res.truncated_at})


def born_amplitude(bp: BarrierProfile, ctrl: QuadratureSpec = DEFAULT_SPEC,
                   threshold: float = 0.1) -> TransitionResult:
    """First-order perturbative amplitude (1/2ik) int exp(2ikx) U(x) dx.

    When U does not vanish at both ends (a step), the integral is taken in
    its integrated-by-parts form (1/4k^2) int exp(2ikx) U'(x) dx, which drops
    the oscillating boundary term.  ``valid`` requires max |U| / k^2 <= threshold.
    """
    k = bp.k
    ends = bp.potential(np.array([bp.center - bp.horizon, bp.center + bp.horizon]))
    if np.max(np.abs(ends)) <= bp.tolerance:
        envelope = lambda x: bp.potential(x) / (2j * k)  # noqa: E731
        form = "direct"
    else:
        envelope = lambda x: bp.dU(x) / (4.0 * k**2)  # noqa: E731
        form = "by_parts"
    res = integrate_improper_oscillatory(envelope, lambda x: 2.0 * k * np.asarray(x), ctrl,
                                         center=bp.center, scale=bp.scale)
    strength = float(np.max(np.abs(bp.potential(bp.sample_grid()))) / k**2)
    amp = complex(res.value)
    return TransitionResult(abs(amp) ** 2, amp, _barrier_ratio(bp), 2 * abs(amp) * res.error_estimate,
                            strength <= threshold and res.converged,
                            {"form": form, "u_over_k2": strength})
