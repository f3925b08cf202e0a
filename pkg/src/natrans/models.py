"""Exactly solvable benchmarks and tabulated profiles.

Rosen-Zener: a sech pulse transverse to a constant longitudinal field.
Logistic barrier: U(x) = U0 / (1 + exp(-gamma x)) at wavenumber k.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .adiabatic import (
    DEFAULT_SPEC,
    VALIDITY_THRESHOLD,
    BarrierProfile,
    SpinFieldProfile,
    _barrier_ratio,
)
from .errors import ConvergenceError, TabulatedProfileError
from .numerics import QuadratureSpec, integrate_adaptive, integrate_improper_oscillatory
from .oracle import TransitionResult

TAIL = 1e-12


def _finite_positive(name, value, allow_zero=False):
    if not math.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        raise ValueError(f"{name} must be {'non-negative' if allow_zero else 'positive'} and finite")


@dataclass(frozen=True)
class RosenZenerParams:
    beta0: float
    beta1: float
    T: float = 1.0

    def __post_init__(self):
        _finite_positive("beta0", self.beta0)
        _finite_positive("beta1", self.beta1, allow_zero=True)
        _finite_positive("T", self.T)


def rosen_zener_profile(p: RosenZenerParams) -> SpinFieldProfile:
    """B(t) = (beta1 / (T cosh(t/T)), 0, beta0 / T)."""
    b0, b1, T = p.beta0, p.beta1, p.T
    horizon = T * math.log(2.0 / TAIL)  # sech(horizon / T) < TAIL

    def field(t):
        t = np.asarray(t, dtype=float)
        return np.stack([b1 / (T * np.cosh(t / T)), np.zeros_like(t), np.full_like(t, b0 / T)], axis=1)

    def derivative(t):
        t = np.asarray(t, dtype=float)
        z = np.zeros_like(t)
        return np.stack([-b1 * np.tanh(t / T) / (T**2 * np.cosh(t / T)), z, z], axis=1)

    tol = 1.01 * TAIL * max(b1, 1.0) / T
    return SpinFieldProfile(field, horizon, tol, derivative, center=0.0, scale=T)


def rosen_zener_exact(p: RosenZenerParams) -> float:
    """[sin(pi beta1) / cosh(pi beta0)]^2."""
    return (math.sin(math.pi * p.beta1) / math.cosh(math.pi * p.beta0)) ** 2


def rosen_zener_adiabatic_transformed(p: RosenZenerParams,
                                      ctrl: QuadratureSpec = DEFAULT_SPEC) -> TransitionResult:
    """sin k int_0^inf sin(2 alpha(xi)) tanh(xi) / sqrt(cosh^2 xi - sin^2 k) dxi.

    tan k = beta1 / beta0 and alpha(xi) = beta0 xi + beta1 arctan(tan k tanh xi).
    The symmetric pulse makes the amplitude real.
    """
    k = math.atan2(p.beta1, p.beta0)
    sk, tk = math.sin(k), math.tan(k)
    if sk == 0.0:
        return TransitionResult(0.0, 0.0, 0.0, 0.0, True, {"k": 0.0})

    def f(xi):
        alpha = p.beta0 * xi + p.beta1 * np.arctan(tk * np.tanh(xi))
        return np.sin(2 * alpha) * np.tanh(xi) / np.sqrt(np.cosh(xi) ** 2 - sk**2)

    # integrand magnitude ~ 2 exp(-xi)
    xi_max = math.log(2.0 / ctrl.truncation_threshold) + 1.0
    panels = int(min(4096, max(16, 2 * p.beta0 * xi_max / math.pi)))
    res = integrate_adaptive(f, 0.0, xi_max, ctrl, initial_panels=panels)
    if not res.converged:
        raise ConvergenceError("transformed Rosen-Zener integral did not converge", partial=res)
    amp = sk * float(np.real(res.value))
    # |dtheta/dt| / (2|B|) peaks at beta1 / (2 beta0) for large beta0, below it otherwise
    ratio = _rz_ratio(p)
    return TransitionResult(amp**2, complex(amp), ratio, 2 * abs(amp) * (res.error_estimate + 2 * math.exp(-xi_max)),
                            ratio <= VALIDITY_THRESHOLD, {"k": k, "xi_max": xi_max})


def _rz_ratio(p: RosenZenerParams) -> float:
    t = np.linspace(0, 30, 6001)
    s = 1 / np.cosh(t)
    b0, b1 = p.beta0, p.beta1
    theta_dot = b0 * b1 * s * np.tanh(t) / (b0**2 + (b1 * s) ** 2)
    return float(np.max(theta_dot / (2 * np.sqrt(b0**2 + (b1 * s) ** 2))))


@dataclass(frozen=True)
class LogisticBarrierParams:
    alpha: float
    beta: float

    def __post_init__(self):
        _finite_positive("alpha", self.alpha)
        if not (math.isfinite(self.beta) and 0 < self.beta < 1):
            raise ValueError("beta must satisfy 0 < beta < 1 (over-barrier regime)")


def logistic_profile(p: LogisticBarrierParams, k: float = 1.0) -> BarrierProfile:
    """U(x) = U0 / (1 + exp(-gamma x)) with gamma = k / alpha and U0 = beta k^2."""
    _finite_positive("k", k)
    gamma = k / p.alpha
    U0 = p.beta * k**2
    sig = lambda x: 0.5 * (1.0 + np.tanh(0.5 * gamma * np.asarray(x, dtype=float)))  # noqa: E731

    def U(x):
        return U0 * sig(x)

    def dU(x):
        s = sig(x)
        return U0 * gamma * s * (1 - s)

    def d2U(x):
        s = sig(x)
        return U0 * gamma**2 * s * (1 - s) * (1 - 2 * s)

    # U'(x) ~ U0 gamma exp(-gamma |x|), so U'(horizon) < 1e-13 U0 gamma
    horizon = (math.log(1e13) + 1.0) / gamma
    return BarrierProfile(U, k, horizon, 1e-13 * U0 * gamma, dU, d2U, center=0.0, scale=1.0 / gamma)


def logistic_exact(p: LogisticBarrierParams) -> float:
    """|A| = sinh(pi alpha (1 - sqrt(1-beta))) / sinh(pi alpha (1 + sqrt(1-beta)))."""
    r = math.sqrt(1.0 - p.beta)
    a = math.pi * p.alpha
    # ratio of sinh values computed in log space to survive large alpha
    num, den = a * (1 - r), a * (1 + r)
    log_ratio = (num - den) + math.log1p(-math.exp(-2 * num)) - math.log1p(-math.exp(-2 * den))
    return math.exp(log_ratio)


def logistic_perturbative(p: LogisticBarrierParams) -> float:
    """pi alpha^2 beta^2 / (4 sinh^2(2 pi alpha)), as printed."""
    return math.pi * p.alpha**2 * p.beta**2 / (4.0 * math.sinh(2 * math.pi * p.alpha) ** 2)


def logistic_born(p: LogisticBarrierParams) -> complex:
    """Closed-form weak-step amplitude pi alpha beta / (2 sinh(2 pi alpha))."""
    return math.pi * p.alpha * p.beta / (2.0 * math.sinh(2 * math.pi * p.alpha))


def logistic_adiabatic_transformed(p: LogisticBarrierParams,
                                   ctrl: QuadratureSpec = DEFAULT_SPEC) -> TransitionResult:
    """Reflection amplitude as an integral over z = exp(gamma x), z in (0, inf).

    A = (beta/4) int z^{2i alpha} F(z)^{2i alpha sqrt(1-beta)} / G(z)^{2i alpha}
        dz / ((1 + z)((1 - beta) z + 1)),
    F = 2 sqrt(1-beta) r + 2(1-beta) z + 2 - beta, G = 2 r + (2 - beta) z + 2,
    r = sqrt((z + 1)((1 - beta) z + 1)).  Evaluated with z = exp(u).
    """
    a, b = p.alpha, p.beta
    s = math.sqrt(1.0 - b)

    def parts(u):
        u = np.asarray(u, dtype=float)
        z = np.exp(u)
        q = (1 - b) * z + 1
        r = np.sqrt((z + 1) * q)
        F = 2 * s * r + 2 * (1 - b) * z + 2 - b
        G = 2 * r + (2 - b) * z + 2
        env = 0.25 * b * z / ((1 + z) * q)
        phase = 2 * a * (u + s * np.log(F) - np.log(G))
        return env, phase

    res = integrate_improper_oscillatory(lambda u: parts(u)[0], lambda u: parts(u)[1], ctrl,
                                         center=0.0, scale=1.0)
    amp = complex(res.value)
    ratio = _barrier_ratio(logistic_profile(p))
    flag = b / a <= 0.1 * (1 - b)
    return TransitionResult(abs(amp) ** 2, amp, ratio, 2 * abs(amp) * res.error_estimate,
                            ratio <= VALIDITY_THRESHOLD and res.converged,
                            {"weak_gradient_regime": bool(flag), "truncated_at": res.truncated_at})


@dataclass(frozen=True, eq=False)
class TabulatedProfile:
    """Scalar samples f(t_i) with declared asymptotes, interpolated.

    Cubic spline for four or more samples, linear below that.  Outside the
    sampled range the declared asymptotic values are returned.
    """

    t: np.ndarray
    values: np.ndarray
    asymptote_minus: float
    asymptote_plus: float
    tolerance: float = 1e-8
    axis: str = "t"

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise TabulatedProfileError("abscissae and values must be matching 1-D arrays")
        if t.size < 2:
            raise TabulatedProfileError("need at least two samples")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise TabulatedProfileError("samples must be finite")
        if np.any(np.diff(t) <= 0):
            raise TabulatedProfileError("abscissae must be strictly increasing")
        for end, target, name in ((v[0], self.asymptote_minus, "first"), (v[-1], self.asymptote_plus, "last")):
            if abs(end - target) > self.tolerance:
                raise TabulatedProfileError(
                    f"{name} sample {end!r} is not within {self.tolerance:g} of its declared asymptote {target!r}")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)
        spline = CubicSpline(t, v) if t.size >= 4 else None
        object.__setattr__(self, "_spline", spline)

    @property
    def interpolation(self) -> str:
        return "cubic" if self._spline is not None else "linear"

    def _eval(self, x, nu=0):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.t[0]) & (x <= self.t[-1])
        if self._spline is not None:
            y = self._spline(np.clip(x, self.t[0], self.t[-1]), nu)
        elif nu == 0:
            y = np.interp(x, self.t, self.values)
        else:
            idx = np.clip(np.searchsorted(self.t, x) - 1, 0, self.t.size - 2)
            y = np.diff(self.values)[idx] / np.diff(self.t)[idx]
        if nu == 0:
            return np.where(inside, y, np.where(x < self.t[0], self.asymptote_minus, self.asymptote_plus))
        return np.where(inside, y, 0.0)

    def __call__(self, x):
        return self._eval(x)

    def derivative(self, x):
        return self._eval(x, 1)

    @property
    def horizon(self) -> float:
        return float(max(abs(self.t[0]), abs(self.t[-1])))

    def to_spin_profile(self, longitudinal: float, scale: float = 1.0) -> SpinFieldProfile:
        """Transverse field from the samples, constant ``longitudinal`` z component."""
        def field(t):
            t = np.asarray(t, dtype=float)
            return np.stack([self(t), np.zeros_like(t), np.full_like(t, longitudinal)], axis=1)

        def deriv(t):
            t = np.asarray(t, dtype=float)
            z = np.zeros_like(t)
            return np.stack([self.derivative(t), z, z], axis=1)

        return SpinFieldProfile(field, self.horizon, self.tolerance, deriv, 0.0, scale)

    def to_barrier_profile(self, k: float, scale: float = 1.0) -> BarrierProfile:
        """Potential U(x) from the samples at wavenumber k."""
        return BarrierProfile(self, k, self.horizon, max(self.tolerance, 1e-12), self.derivative,
                              None, 0.0, scale)


def load_tabulated(source, sidecar=None) -> TabulatedProfile:
    """Read a ``t,value`` (or ``x,value``) CSV and its JSON asymptote sidecar.

    ``source`` is a path or a text stream.  ``sidecar`` defaults to the CSV
    path with a ``.json`` suffix; a dict is accepted directly.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        text = path.read_text(encoding="utf-8")
        if sidecar is None:
            sidecar = path.with_suffix(".json")
    else:
        text = source.read()
    if not text.strip():
        raise TabulatedProfileError("empty tabulated profile")
    rows = list(csv.reader(io.StringIO(text)))
    header = [h.strip() for h in rows[0]]
    if header not in (["t", "value"], ["x", "value"]):
        raise TabulatedProfileError(f"header must be 't,value' or 'x,value', got {','.join(header)!r}")
    data = [r for r in rows[1:] if r and any(c.strip() for c in r)]
    if not data:
        raise TabulatedProfileError("no samples after the header")
    try:
        arr = np.array([[float(c) for c in r] for r in data], dtype=float)
    except ValueError as exc:
        raise TabulatedProfileError(f"malformed row: {exc}") from exc
    if arr.shape[1] != 2:
        raise TabulatedProfileError("each row needs exactly two columns")
    if sidecar is None:
        raise TabulatedProfileError("asymptote declarations are required")
    if not isinstance(sidecar, dict):
        try:
            sidecar = json.loads(Path(sidecar).read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise TabulatedProfileError(f"missing asymptote sidecar {sidecar}") from exc
    try:
        am, ap = float(sidecar["asymptote_minus"]), float(sidecar["asymptote_plus"])
        tol = float(sidecar.get("tolerance", 1e-8))
    except (KeyError, TypeError, ValueError) as exc:
        raise TabulatedProfileError(f"bad sidecar: {exc}") from exc
    if arr.shape[0] < 2:
        raise TabulatedProfileError("need at least two samples")
    if np.any(np.diff(arr[:, 0]) <= 0):
        raise TabulatedProfileError("rows must be sorted by strictly increasing abscissa")
    return TabulatedProfile(arr[:, 0], arr[:, 1], am, ap, tol, header[0])
