"""Parametric excitation of a quantum oscillator.

A frequency Omega(t) that moves between Omega_- and Omega_+ maps onto
over-barrier reflection with momentum p(x) := Omega(x), i.e. k = Omega_- and
U = k^2 - Omega^2.  The reflection probability theta then fixes every level
transition probability through the Perelomov-Popov formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .adiabatic import DEFAULT_SPEC, VALIDITY_THRESHOLD, BarrierProfile, reflection_amplitude
from .errors import ProfileError
from .numerics import CumulativeIntegral, QuadratureSpec, assoc_legendre

N_MAX_CAP = 60


def _vec(fn):
    return lambda t: np.asarray(fn(np.atleast_1d(np.asarray(t, dtype=float))), dtype=float)


@dataclass(frozen=True, eq=False)
class OscillatorSpec:
    """Frequency Omega(t) > 0 with asymptotes Omega_-+ and optional mass m(t).

    ``domega`` is an optional analytic derivative; finite differences are used
    otherwise.
    """

    omega: object
    omega_minus: float
    omega_plus: float
    horizon: float
    tolerance: float = 1e-10
    mass: object = None
    center: float = 0.0
    scale: float = 1.0
    domega: object = None

    def __post_init__(self):
        object.__setattr__(self, "omega", _vec(self.omega))
        if self.domega is not None:
            object.__setattr__(self, "domega", _vec(self.domega))
        if self.mass is not None:
            object.__setattr__(self, "mass", _vec(self.mass))
        if not (self.omega_minus > 0 and self.omega_plus > 0):
            raise ProfileError("asymptotic frequencies must be positive")
        if not self.horizon > 0:
            raise ProfileError("horizon must be positive")
        t = self.sample_grid()
        if np.any(self.omega(t) <= 0):
            raise ProfileError("Omega(t) must stay positive")
        if self.mass is not None and np.any(self.mass(t) <= 0):
            raise ProfileError("mass must stay positive")
        ends = self.omega(np.array([self.center - self.horizon, self.center + self.horizon]))
        gap = max(abs(ends[0] - self.omega_minus), abs(ends[1] - self.omega_plus))
        if gap > self.tolerance:
            raise ProfileError(f"Omega(+-horizon) misses its asymptotes by {gap:.3e}")

    def sample_grid(self, n: int = 2001) -> np.ndarray:
        return np.linspace(self.center - self.horizon, self.center + self.horizon, n)

    def to_barrier_profile(self) -> BarrierProfile:
        """p(x) := Omega(x) at k = Omega_-."""
        if self.mass is not None:
            raise ProfileError("reduce the mass to a constant first")
        k = self.omega_minus
        U = lambda x: k**2 - self.omega(x) ** 2  # noqa: E731
        dU = None
        if self.domega is not None:
            dU = lambda x: -2.0 * self.omega(x) * self.domega(x)  # noqa: E731
        return BarrierProfile(U, k, self.horizon, max(self.tolerance, 1e-12), dU,
                              center=self.center, scale=self.scale)


def reduce_mass(spec: OscillatorSpec) -> OscillatorSpec:
    """Constant-mass equivalent: t' = int dt / m, Omega' = m Omega.

    The new time origin is the image of the old centre.
    """
    if spec.mass is None:
        return spec
    lo, hi = spec.center - spec.horizon, spec.center + spec.horizon
    inv_m = lambda t: 1.0 / spec.mass(t)  # noqa: E731
    tau = CumulativeIntegral(inv_m, lo, hi, anchor=spec.center, panel_width=spec.scale / 16)
    grid = np.linspace(lo, hi, 4097)
    tau_grid = tau(grid)

    def t_of(tp):
        tp = np.atleast_1d(np.asarray(tp, dtype=float))
        t = np.interp(tp, tau_grid, grid)
        # outside the tabulated range extrapolate with the end masses
        m_lo, m_hi = spec.mass(np.array([lo, hi]))
        t = np.where(tp < tau_grid[0], lo + (tp - tau_grid[0]) * m_lo, t)
        t = np.where(tp > tau_grid[-1], hi + (tp - tau_grid[-1]) * m_hi, t)
        for _ in range(8):
            t = t - (tau(t) - tp) * spec.mass(t)
        return t

    omega_r = lambda tp: (lambda t: spec.mass(t) * spec.omega(t))(t_of(tp))  # noqa: E731
    ends = spec.mass(np.array([lo, hi]))
    new_lo, new_hi = tau_grid[0], tau_grid[-1]
    center = 0.0
    horizon = float(max(center - new_lo, new_hi - center))
    scale = spec.scale / float(np.max(spec.mass(grid)))
    return OscillatorSpec(omega_r, spec.omega_minus * ends[0], spec.omega_plus * ends[1], horizon,
                          spec.tolerance * float(np.max(ends)) * 10, None, center, scale)


def theta_coefficient(spec: OscillatorSpec, ctrl: QuadratureSpec = DEFAULT_SPEC, full_output: bool = False):
    """theta = (1/4) |int exp(2i int Omega) Omega'/Omega dt|^2.

    Evaluated as the reflection probability of the mapped barrier, so the
    two share one code path.
    """
    res = reflection_amplitude(reduce_mass(spec).to_barrier_profile(), ctrl)
    return res if full_output else res.probability


@dataclass(frozen=True, eq=False)
class TransitionMatrixSlice:
    """W[m, n] for 0 <= m, n <= n_max; odd m - n entries are zero."""

    theta: float
    entries: np.ndarray
    valid: bool = True
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_max(self) -> int:
        return self.entries.shape[0] - 1

    def __getitem__(self, mn):
        return float(self.entries[mn])

    @property
    def row_sums(self) -> np.ndarray:
        """Diagnostic only: the truncated formula is not normalized."""
        return self.entries.sum(axis=1)


def perelomov_popov_matrix(theta: float, n_max: int, cap: int = N_MAX_CAP) -> TransitionMatrixSlice:
    """W_mn = (n_<! / n_>!) |sqrt(1-theta) P^{|m-n|/2}_{(m+n)/2}(sqrt(1-theta))|^2.

    Parity forbids odd m - n, which are set to zero.
    """
    if not (math.isfinite(theta) and 0.0 <= theta < 1.0):
        raise ValueError("theta must lie in [0, 1)")
    n_max = int(n_max)
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    if n_max > cap:
        raise ValueError(f"n_max={n_max} exceeds the cap {cap}")
    x = math.sqrt(1.0 - theta)
    W = np.zeros((n_max + 1, n_max + 1))
    for m in range(n_max + 1):
        for n in range(m, n_max + 1, 2):
            P = assoc_legendre((n - m) // 2, (n + m) // 2, x)
            if P == 0.0:
                continue
            log_w = math.lgamma(m + 1) - math.lgamma(n + 1) + math.log(1.0 - theta) + 2 * math.log(abs(P))
            W[m, n] = W[n, m] = math.exp(log_w)
    return TransitionMatrixSlice(theta, W)


def excitation_pipeline(spec: OscillatorSpec, n_max: int, ctrl: QuadratureSpec = DEFAULT_SPEC,
                        threshold: float = VALIDITY_THRESHOLD) -> TransitionMatrixSlice:
    """reduce_mass, then theta_coefficient, then the Perelomov-Popov matrix."""
    res = theta_coefficient(spec, ctrl, full_output=True)
    theta = res.probability
    W = perelomov_popov_matrix(theta, n_max)
    valid = bool(res.valid and res.adiabaticity_ratio <= threshold)
    diag = {"adiabaticity_ratio": res.adiabaticity_ratio, "theta_error": res.error_estimate,
            "row_sums": W.row_sums.tolist()}
    return TransitionMatrixSlice(theta, W.entries, valid, diag)
