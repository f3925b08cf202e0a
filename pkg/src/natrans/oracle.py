"""Brute-force propagation of dG/dt = B(t) G and the asymptotic S-operator.

This is the reference every approximation in :mod:`natrans.adiabatic` is
checked against, so it shares nothing with them beyond the Lie-group types and
the exponential-midpoint stepper.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, ProfileError
from .lie import (
    AlgebraElement,
    GroupElement,
    Signature,
    _exp_coeffs,
    cartan_decompose,
)
from .numerics import QuadratureSpec, ode_propagate

ORACLE_SPEC = QuadratureSpec(rel_tol=1e-9, abs_tol=1e-9)


@dataclass(frozen=True, eq=False)
class DrivingProfile:
    """A generator b(t) that settles onto a Cartan element at both ends.

    ``b_of_t`` maps a 1-D time array to coefficients of shape (n, 3).  The
    asymptotic generators are ``frame_pm beta_pm frame_pm^-1``; the frames default
    to the identity (b(t) itself approaches the J3 axis).  A non-trivial frame is
    needed when the asymptote is elliptic but tilted, as for a step potential.
    """

    b_of_t: object
    sig: Signature
    beta_minus: AlgebraElement
    beta_plus: AlgebraElement
    horizon: float
    asymptotic_tol: float = 1e-10
    frame_minus: GroupElement | None = None
    frame_plus: GroupElement | None = None
    center: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        for name in ("beta_minus", "beta_plus"):
            beta = getattr(self, name)
            if beta.sig is not self.sig:
                raise ProfileError(f"{name} has signature {beta.sig.value}")
            if not beta.is_cartan:
                raise ProfileError(f"{name} must lie on the J3 axis, got {beta}")
        for name in ("frame_minus", "frame_plus"):
            if getattr(self, name) is None:
                object.__setattr__(self, name, GroupElement.identity(self.sig))
        if not self.horizon > 0:
            raise ProfileError("horizon must be positive")
        ends = self.coeffs(np.array([self.center - self.horizon, self.center + self.horizon]))
        for end, beta, frame in ((ends[0], self.beta_minus, self.frame_minus),
                                 (ends[1], self.beta_plus, self.frame_plus)):
            target = frame.conjugate(beta).c
            gap = float(np.max(np.abs(end - target)))
            if gap > self.asymptotic_tol:
                raise ProfileError(
                    f"b(+-horizon) misses its declared asymptote by {gap:.3e} "
                    f"> {self.asymptotic_tol:.3e}"
                )

    def coeffs(self, t) -> np.ndarray:
        return np.asarray(self.b_of_t(np.atleast_1d(np.asarray(t, dtype=float))), dtype=float)

    def __call__(self, t: float) -> AlgebraElement:
        return AlgebraElement(self.coeffs(np.array([t]))[0], self.sig)

    def shifted(self, dt: float) -> "DrivingProfile":
        """The same profile translated by ``dt`` in time."""
        f = self.b_of_t
        return DrivingProfile(lambda t: f(np.asarray(t) - dt), self.sig, self.beta_minus,
                              self.beta_plus, self.horizon, self.asymptotic_tol,
                              self.frame_minus, self.frame_plus, self.center + dt, self.scale)

    @classmethod
    def from_asymptotes(cls, b_of_t, sig: Signature, horizon: float, center: float = 0.0,
                        scale: float = 1.0, asymptotic_tol: float = 1e-10) -> "DrivingProfile":
        """Build a profile whose asymptotes are read off b(+-horizon)."""
        ends = np.asarray(b_of_t(np.array([center - horizon, center + horizon])), dtype=float)
        frames = []
        for c in ends:
            fr = cartan_decompose(AlgebraElement(c, sig))
            if max(abs(c[0]), abs(c[1])) == 0.0:
                fr = type(fr)(fr.beta, GroupElement.identity(sig))
            frames.append(fr)
        return cls(b_of_t, sig, frames[0].beta, frames[1].beta, horizon, asymptotic_tol,
                   frames[0].v, frames[1].v, center, scale)


@dataclass(frozen=True, eq=False)
class ProjectorPair:
    """Density operators of the asymptotic states at t -> +inf and t -> -inf."""

    p_plus: np.ndarray
    p_minus: np.ndarray

    def __post_init__(self):
        for name in ("p_plus", "p_minus"):
            p = np.asarray(getattr(self, name), dtype=complex)
            if np.max(np.abs(p @ p - p)) > 1e-12 or abs(np.trace(p) - 1) > 1e-12:
                raise ProfileError(f"{name} is not a rank-one projector")
            if np.max(np.abs(p - p.conj().T)) > 1e-12:
                raise ProfileError(f"{name} is not Hermitian")
            object.__setattr__(self, name, p)
        if np.max(np.abs(self.p_plus @ self.p_minus)) > 1e-12:
            raise ProfileError("projectors are not orthogonal")

    @classmethod
    def from_generators(cls, beta_minus: AlgebraElement, beta_plus: AlgebraElement) -> "ProjectorPair":
        """Spectral projectors of the asymptotic Cartan generators.

        ``p_minus`` selects the upper level of ``beta_minus`` (energies are the
        eigenvalues of i B) and ``p_plus`` the lower level of ``beta_plus``, so the
        trace formula measures the non-adiabatic transition.
        """
        projs = []
        for beta, upper in ((beta_plus, False), (beta_minus, True)):
            if not beta.is_cartan or beta.c[2] == 0.0:
                raise ProfileError("projectors need a non-zero generator on the J3 axis")
            energies, vecs = np.linalg.eigh(1j * beta.matrix)
            k = int(np.argmax(energies)) if upper else int(np.argmin(energies))
            v = vecs[:, k]
            projs.append(np.outer(v, v.conj()))
        return cls(projs[0], projs[1])

    def commutes_with(self, beta_minus: AlgebraElement, beta_plus: AlgebraElement,
                      tol: float = 1e-12) -> bool:
        cp = self.p_plus @ beta_plus.matrix - beta_plus.matrix @ self.p_plus
        cm = self.p_minus @ beta_minus.matrix - beta_minus.matrix @ self.p_minus
        return bool(max(np.max(np.abs(cp)), np.max(np.abs(cm))) <= tol)


@dataclass(frozen=True)
class TransitionResult:
    """Outcome of one estimator on one profile."""

    probability: float
    amplitude: complex | None = None
    adiabaticity_ratio: float = 0.0
    error_estimate: float = 0.0
    valid: bool = True
    diagnostics: dict = field(default_factory=dict)


def evolve(profile: DrivingProfile, t0: float, t1: float,
           ctrl: QuadratureSpec = ORACLE_SPEC, full_output: bool = False):
    """Propagator G_{t0}(t1) of the profile's generator."""
    return ode_propagate(profile.coeffs, t0, t1, ctrl, profile.sig, full_output=full_output)


@dataclass(frozen=True)
class SOperator:
    s: GroupElement
    horizon: float
    error_estimate: float
    drift: float
    steps: int


def _free(beta: AlgebraElement, t: float) -> np.ndarray:
    return _exp_coeffs(-t * beta.c, beta.sig)


def s_operator(profile: DrivingProfile, ctrl: QuadratureSpec = ORACLE_SPEC,
               max_doublings: int = 4, full_output: bool = False):
    """Asymptotic S-operator with the free Cartan phases stripped off.

    S(T) = exp(-T beta_+) v_+^-1 G_{c-T}(c+T) v_- exp(-T beta_-), with c the
    profile centre.  T starts at the profile horizon and doubles (extending
    the already propagated segment at both ends) until S stops changing.
    """
    sig = profile.sig
    c = profile.center
    T = profile.horizon
    g, info = ode_propagate(profile.coeffs, c - T, c + T, ctrl, sig, full_output=True)
    G = g.m
    drift = info.residual
    steps = info.steps
    vp_inv = profile.frame_plus.inverse().m
    vm = profile.frame_minus.m

    def strip(G, T):
        return _free(profile.beta_plus, T) @ vp_inv @ G @ vm @ _free(profile.beta_minus, T)

    S = strip(G, T)
    err = np.inf
    for _ in range(max_doublings):
        left, li = ode_propagate(profile.coeffs, c - 2 * T, c - T, ctrl, sig, full_output=True)
        right, ri = ode_propagate(profile.coeffs, c + T, c + 2 * T, ctrl, sig, full_output=True)
        G = right.m @ G @ left.m
        steps += li.steps + ri.steps
        T *= 2
        S_new = strip(G, T)
        err = float(np.max(np.abs(S_new - S)))
        S = S_new
        drift = max(drift, GroupElement(G, sig, check=False).residual())
        target = max(10 * profile.asymptotic_tol, ctrl.abs_tol, ctrl.rel_tol * float(np.max(np.abs(S))))
        if err <= target:
            break
    else:
        raise ConvergenceError(
            f"S-operator did not stabilise by horizon {T:g} (change {err:.3e})",
            partial=GroupElement(S, sig, check=False),
        )
    s = GroupElement(S, sig, check=False)
    drift = max(drift, s.residual())
    if full_output:
        return s, SOperator(s, T, err, drift, steps)
    return s


def transition_probability(s: GroupElement, proj: ProjectorPair) -> TransitionResult:
    """Tr(P+ S P- S^dagger)."""
    S = s.m
    w = float(np.real(np.trace(proj.p_plus @ S @ proj.p_minus @ S.conj().T)))
    # amplitude: <+|S|-> in the projectors' eigenbases
    plus = np.linalg.eigh(proj.p_plus)[1][:, -1]
    minus = np.linalg.eigh(proj.p_minus)[1][:, -1]
    amp = complex(plus.conj() @ S @ minus)
    return TransitionResult(probability=w, amplitude=amp)


def reflection_probability(s: GroupElement) -> TransitionResult:
    """|b / a|^2 for an SU(1,1) transfer matrix [[a, conj(b)], [b, conj(a)]]."""
    if s.sig is not Signature.NONCOMPACT:
        raise ValueError("reflection needs an SU(1,1) transfer matrix")
    a = s.m[0, 0]
    r = -s.m[0, 1] / a
    return TransitionResult(probability=float(abs(r) ** 2), amplitude=complex(r),
                            diagnostics={"transmission": float(1 / abs(a) ** 2)})


def oracle_transition(profile: DrivingProfile, ctrl: QuadratureSpec = ORACLE_SPEC) -> TransitionResult:
    """Exact transition probability with S-operator diagnostics attached."""
    s, info = s_operator(profile, ctrl, full_output=True)
    if profile.sig is Signature.NONCOMPACT:
        res = reflection_probability(s)
    else:
        res = transition_probability(s, ProjectorPair.from_generators(profile.beta_minus, profile.beta_plus))
    diag = dict(res.diagnostics)
    diag.update(horizon=info.horizon, drift=info.drift, steps=info.steps)
    return TransitionResult(res.probability, res.amplitude, 0.0, info.error_estimate,
                            info.drift < 1e-9, diag)

