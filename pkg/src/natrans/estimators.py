"""Estimator dispatch: one parameter point, one method, one TransitionResult.

:func:`evaluate_point` is the shared entry used by the CLI workers; the
:class:`TransitionEstimator` wrapper exposes the same thing with a
scikit-learn ``fit``/``predict`` surface over arrays of parameter points.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.interpolate import CubicSpline
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .adiabatic import (
    PathOnSphere,
    born_amplitude,
    first_order_fourier_spinflip,
    maitra_heller_amplitude,
    reflection_amplitude,
    spin_flip_amplitude,
)
from .models import (
    LogisticBarrierParams,
    RosenZenerParams,
    logistic_adiabatic_transformed,
    logistic_exact,
    logistic_profile,
    rosen_zener_adiabatic_transformed,
    rosen_zener_exact,
    rosen_zener_profile,
)
from .numerics import CumulativeIntegral, QuadratureSpec
from .oracle import ORACLE_SPEC, TransitionResult, oracle_transition

# declaration order fixes CSV column order
ESTIMATORS = ("exact", "oracle", "adiabatic", "transformed", "born", "maitra-heller", "fourier")
MODELS = {
    "rosen-zener": ("beta0", "beta1", "T"),
    "logistic": ("alpha", "beta", "k"),
}
DEFAULTS = {"T": 1.0, "k": 1.0}
SUPPORTED = {
    "rosen-zener": {"exact", "oracle", "adiabatic", "transformed", "fourier"},
    "logistic": {"exact", "oracle", "adiabatic", "transformed", "born", "maitra-heller"},
}


def _rz_fourier(p: RosenZenerParams, ctrl: QuadratureSpec) -> TransitionResult:
    """First-order Fourier estimate with the accumulated phase as the time variable.

    In the variable u = int |B| dt the field has unit magnitude, so the
    constant-magnitude formula applies with T = 1.
    """
    sp = rosen_zener_profile(p)
    H = sp.horizon
    alpha = CumulativeIntegral(sp.magnitude, -H, H, anchor=0.0, panel_width=p.T / 16)
    grid = np.linspace(-H, H, 1 << 16 | 1)
    a_grid = alpha(grid)
    inverse = CubicSpline(a_grid, grid)
    rate = p.beta0 / p.T

    def t_of(u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        # beyond the horizon |B| is constant to within the sech tail
        return np.where(u < a_grid[0], -H + (u - a_grid[0]) / rate,
                        np.where(u > a_grid[-1], H + (u - a_grid[-1]) / rate, inverse(u)))

    def n_of_u(u):
        B = sp.field(t_of(u))
        return B / np.linalg.norm(B, axis=1)[:, None]

    path = PathOnSphere(n_of_u, fd_step=1e-3 * p.beta0)
    w = first_order_fourier_spinflip(path, 1.0, ctrl, center=0.0, scale=p.beta0)
    return TransitionResult(w, complex(math.sqrt(w)), 0.0, 0.0, True, {})


def make_params(model: str, params: dict):
    """Validated parameter object for a model (ValueError on bad input)."""
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    full = {**DEFAULTS, **params}
    if model == "rosen-zener":
        return RosenZenerParams(full["beta0"], full["beta1"], full["T"])
    if not (math.isfinite(full["k"]) and full["k"] > 0):
        raise ValueError("k must be positive and finite")
    return LogisticBarrierParams(full["alpha"], full["beta"])


def evaluate_point(model: str, params: dict, estimator: str,
                   rel_tol: float = 1e-10, abs_tol: float = 1e-14,
                   oracle_rel_tol: float = ORACLE_SPEC.rel_tol,
                   oracle_abs_tol: float = ORACLE_SPEC.abs_tol) -> TransitionResult:
    """Run one estimator on one parameter point of a model."""
    p = make_params(model, params)
    if estimator not in SUPPORTED[model]:
        raise ValueError(f"estimator {estimator!r} is not available for model {model!r}")
    full = {**DEFAULTS, **params}
    ctrl = QuadratureSpec(rel_tol=rel_tol, abs_tol=abs_tol)
    octrl = QuadratureSpec(rel_tol=oracle_rel_tol, abs_tol=oracle_abs_tol)
    if model == "rosen-zener":
        if estimator == "exact":
            amp = math.sin(math.pi * p.beta1) / math.cosh(math.pi * p.beta0)
            return TransitionResult(rosen_zener_exact(p), complex(amp))
        if estimator == "oracle":
            return oracle_transition(rosen_zener_profile(p).to_driving_profile(), octrl)
        if estimator == "adiabatic":
            return spin_flip_amplitude(rosen_zener_profile(p), ctrl)
        if estimator == "transformed":
            return rosen_zener_adiabatic_transformed(p, ctrl)
        return _rz_fourier(p, ctrl)
    bp = logistic_profile(p, full["k"])
    if estimator == "exact":
        a = logistic_exact(p)
        return TransitionResult(a * a, complex(a))
    if estimator == "oracle":
        return oracle_transition(bp.to_driving_profile(), octrl)
    if estimator == "adiabatic":
        return reflection_amplitude(bp, ctrl)
    if estimator == "transformed":
        return logistic_adiabatic_transformed(p, ctrl)
    if estimator == "born":
        return born_amplitude(bp, ctrl)
    return maitra_heller_amplitude(bp, ctrl)


class TransitionEstimator(BaseEstimator):
    """Transition probabilities over rows of model parameters.

    Each row of ``X`` holds the model's parameters in declaration order
    (``beta0, beta1[, T]`` or ``alpha, beta[, k]``).  Nothing is learned:
    ``fit`` only validates the layout.

    Examples
    --------
    >>> est = TransitionEstimator(model="rosen-zener", method="exact").fit([[1.0, 0.5]])
    >>> round(float(est.predict([[1.0, 0.5]])[0]), 6)
    0.007442
    """

    def __init__(self, model="rosen-zener", method="adiabatic", rel_tol=1e-10, abs_tol=1e-14):
        self.model = model
        self.method = method
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol

    def _check(self, X):
        X = check_array(X, dtype=float)
        names = MODELS[self.model]
        if not len(names) - 1 <= X.shape[1] <= len(names):
            raise ValueError(f"{self.model} expects {len(names) - 1} or {len(names)} columns, got {X.shape[1]}")
        return X, names

    def fit(self, X, y=None):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.method not in SUPPORTED[self.model]:
            raise ValueError(f"method {self.method!r} not available for {self.model!r}")
        X, _ = self._check(X)
        self.n_features_in_ = X.shape[1]
        return self

    def evaluate(self, X) -> list[TransitionResult]:
        check_is_fitted(self, "n_features_in_")
        X, names = self._check(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"fitted with {self.n_features_in_} columns, got {X.shape[1]}")
        return [evaluate_point(self.model, dict(zip(names, row)), self.method, self.rel_tol, self.abs_tol)
                for row in X]

    def predict(self, X) -> np.ndarray:
        return np.array([r.probability for r in self.evaluate(X)])

    def predict_amplitude(self, X) -> np.ndarray:
        return np.array([abs(r.amplitude) if r.amplitude is not None else math.sqrt(r.probability)
                         for r in self.evaluate(X)])
