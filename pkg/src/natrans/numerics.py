"""Quadrature, cumulative phase integrals, a group-preserving stepper and
associated Legendre functions.

All integrands and generators are called with 1-D numpy arrays and must return
arrays (``f(x) -> (n,)`` or ``(n, m)``; generators ``b(t) -> (n, 3)``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, ProfileError
from .lie import GroupElement, Signature, _exp_coeffs

# 7-point Gauss / 15-point Kronrod pair on [-1, 1] (QUADPACK qk15 tables)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[1:7:2] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[9:14:2] = _WG[2::-1]
# degree of exactness of the embedded 7-point Gauss rule
GAUSS_EXACTNESS = 13
KRONROD_EXACTNESS = 22


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances shared by the integrators and the ODE stepper."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    max_subdivisions: int = 20000
    truncation_threshold: float = 1e-14

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if not self.truncation_threshold > 0:
            raise ValueError("truncation_threshold must be positive")

    def tightened(self, factor: float) -> "QuadratureSpec":
        return QuadratureSpec(
            self.rel_tol * factor,
            self.abs_tol * factor,
            self.max_subdivisions,
            self.truncation_threshold,
        )


@dataclass(frozen=True)
class QuadratureResult:
    value: complex | np.ndarray
    error_estimate: float
    subdivisions_used: int
    truncated_at: tuple[float, float]
    converged: bool = True


def _gk15(f, lo: np.ndarray, hi: np.ndarray):
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = (mid[:, None] + half[:, None] * KRONROD_NODES[None, :]).ravel()
    y = np.asarray(f(x))
    y = y.reshape((lo.size, 15) + y.shape[1:])
    k = np.einsum("j,ij...->i...", KRONROD_WEIGHTS, y)
    g = np.einsum("j,ij...->i...", GAUSS_WEIGHTS, y)
    hs = half.reshape((-1,) + (1,) * (k.ndim - 1))
    k = k * hs
    err = np.abs(k - g * hs)
    if err.ndim > 1:
        err = err.reshape(err.shape[0], -1).max(axis=1)
    return k, err


def integrate_adaptive(f, a: float, b: float, spec: QuadratureSpec = QuadratureSpec(),
                       initial_panels: int = 1) -> QuadratureResult:
    """Adaptive Gauss-Kronrod (7/15) quadrature of a vectorized integrand.

    Every round bisects all panels whose error exceeds their share of the global
    tolerance; panels are kept in left-to-right order so the summation order is
    fixed for a given ``spec``.  If the subdivision budget is exhausted the best
    value is returned with ``converged=False``.
    """
    a, b = float(a), float(b)
    if a == b:
        y = np.asarray(f(np.array([a])))
        return QuadratureResult(np.zeros(y.shape[1:], dtype=y.dtype)[()], 0.0, 0, (a, b))
    if not (np.isfinite(a) and np.isfinite(b)):
        raise ValueError("integrate_adaptive needs finite limits; see integrate_improper_oscillatory")
    edges = np.linspace(a, b, max(1, int(initial_panels)) + 1)
    lo, hi = edges[:-1], edges[1:]
    vals, errs = _gk15(f, lo, hi)
    length = abs(b - a)
    used = lo.size
    converged = False
    done_val = np.zeros_like(vals[0])
    done_err = 0.0
    while True:
        total = done_val + vals.sum(axis=0)
        tol = max(spec.abs_tol, spec.rel_tol * float(np.max(np.abs(total))))
        share = tol * np.abs(hi - lo) / length
        bad = errs > share
        if not bad.any() or lo.size == 0:
            converged = True
            break
        if used + int(bad.sum()) > spec.max_subdivisions:
            break
        # freeze accepted panels to keep the work set small
        done_val = done_val + vals[~bad].sum(axis=0)
        done_err += float(errs[~bad].sum())
        blo, bhi = lo[bad], hi[bad]
        bmid = 0.5 * (blo + bhi)
        if np.any((bmid <= blo) | (bmid >= bhi)):
            break
        lo = np.column_stack([blo, bmid]).ravel()
        hi = np.column_stack([bmid, bhi]).ravel()
        vals, errs = _gk15(f, lo, hi)
        used += int(bad.sum())
    value = done_val + vals.sum(axis=0)
    err = done_err + float(errs.sum())
    if np.ndim(value) == 0:
        value = value[()]
    return QuadratureResult(value, err, used, (a, b), converged)


def find_truncation(envelope, threshold: float, center: float = 0.0, scale: float = 1.0,
                    max_doublings: int = 60) -> tuple[float, float]:
    """Smallest symmetric-in-spirit horizons beyond which |envelope| < threshold.

    Each side is probed at center +- scale * 2**(j/4); a horizon is accepted when
    the envelope stays below ``threshold`` on a sample set spanning one further
    doubling, which guards against landing on an isolated zero.
    """
    bounds = []
    for side in (-1.0, 1.0):
        found = None
        for j in range(4 * max_doublings):
            dist = scale * 2.0 ** (j / 4.0)
            probe = center + side * dist * np.linspace(1.0, 2.0, 9)
            env = np.abs(np.asarray(envelope(probe), dtype=complex))
            if env.ndim > 1:
                env = env.reshape(env.shape[0], -1).max(axis=1)
            if np.all(env < threshold):
                found = center + side * dist
                break
        if found is None:
            raise ProfileError(
                f"envelope not decaying below {threshold:g} within "
                f"{scale * 2.0 ** max_doublings:g} of {center:g}"
            )
        bounds.append(found)
    return bounds[0], bounds[1]


def _tail_bound(envelope, edge: float, center: float) -> float:
    width = abs(edge - center)
    if width == 0:
        return 0.0
    inner = center + 0.5 * (edge - center)
    e_in, e_out = (float(np.max(np.abs(np.atleast_1d(envelope(np.array([x])))))) for x in (inner, edge))
    if e_out == 0.0:
        return 0.0
    if e_in > e_out:
        rate = math.log(e_in / e_out) / (0.5 * width)
        return e_out / rate
    return e_out * width


def integrate_improper_oscillatory(envelope, phase, spec: QuadratureSpec = QuadratureSpec(),
                                   center: float = 0.0, scale: float = 1.0,
                                   bounds: tuple[float, float] | None = None) -> QuadratureResult:
    """Integral of envelope(t) * exp(i phase(t)) over the real line.

    The line is truncated where |envelope| drops below
    ``spec.truncation_threshold``; the neglected tails are bounded by geometric
    extrapolation of the envelope and added to the error estimate.
    """
    if bounds is None:
        lo, hi = find_truncation(envelope, spec.truncation_threshold, center, scale)
    else:
        lo, hi = bounds

    def integrand(t):
        env = np.asarray(envelope(t))
        ph = np.exp(1j * np.asarray(phase(t)))
        if env.ndim > 1:
            ph = ph.reshape(ph.shape + (1,) * (env.ndim - 1))
        return env * ph

    edge_phase = np.asarray(phase(np.array([lo, hi])), dtype=float)
    turns = abs(edge_phase[1] - edge_phase[0]) / (2 * np.pi)
    panels = int(np.clip(np.ceil(2 * turns) + 8, 8, 8192))
    res = integrate_adaptive(integrand, lo, hi, spec, initial_panels=panels)
    tail = _tail_bound(envelope, lo, center) + _tail_bound(envelope, hi, center)
    return QuadratureResult(res.value, res.error_estimate + tail, res.subdivisions_used,
                            (lo, hi), res.converged)


class CumulativeIntegral:
    """F(t) = int_anchor^t f(s) ds, cached on a uniform panel grid.

    Panel integrals use Gauss-Legendre; evaluation between nodes adds a local
    Gauss-Legendre integral from the nearest node to the left, so accuracy does
    not depend on interpolation.  Arguments outside [lo, hi] are integrated from
    the nearest end node.
    """

    def __init__(self, f, lo: float, hi: float, anchor: float = 0.0,
                 panel_width: float = 0.125, order: int = 12):
        if not hi > lo:
            raise ValueError("need hi > lo")
        self.f = f
        n = max(1, int(np.ceil((hi - lo) / panel_width)))
        self.nodes = np.linspace(lo, hi, n + 1)
        self._x, self._w = np.polynomial.legendre.leggauss(order)
        panel = self._segment(self.nodes[:-1], self.nodes[1:])
        self._cum = np.concatenate([[0.0], np.cumsum(panel)])
        self._offset = 0.0
        self._offset = float(self(np.array([anchor]))[0])

    def _segment(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        x = mid[:, None] + half[:, None] * self._x[None, :]
        y = np.asarray(self.f(x.ravel()), dtype=float).reshape(x.shape)
        return half * (y @ self._w)

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.clip(np.searchsorted(self.nodes, t, side="right") - 1, 0, self.nodes.size - 1)
        base = self.nodes[idx]
        far = np.abs(t - base) > (self.nodes[1] - self.nodes[0]) * 1.0001
        out = self._cum[idx] + self._segment(base, t) - self._offset
        if np.any(far):
            # beyond the cached range: composite rule on panel-sized pieces
            i = np.flatnonzero(far)
            width = self.nodes[1] - self.nodes[0]
            pieces = max(1, int(np.ceil(np.max(np.abs(t[i] - base[i])) / width)))
            frac = np.linspace(0.0, 1.0, pieces + 1)
            e = base[i, None] + (t[i] - base[i])[:, None] * frac[None, :]
            seg = self._segment(e[:, :-1].ravel(), e[:, 1:].ravel()).reshape(i.size, pieces)
            out[i] = self._cum[idx[i]] + seg.sum(axis=1) - self._offset
        return out


def _chunked_product(gen_coeffs: np.ndarray, sig: Signature, chunk: int = 1 << 15) -> np.ndarray:
    # ordered product exp(X_{N-1}) ... exp(X_0), reduced pairwise inside chunks
    total = np.eye(2, dtype=complex)
    for start in range(0, gen_coeffs.shape[0], chunk):
        mats = _exp_coeffs(gen_coeffs[start:start + chunk], sig)
        while mats.shape[0] > 1:
            if mats.shape[0] % 2:
                mats = np.concatenate([mats, np.eye(2, dtype=complex)[None]])
            mats = mats[1::2] @ mats[0::2]
        total = mats[0] @ total
    return total


@dataclass(frozen=True)
class PropagationInfo:
    steps: int
    error_estimate: float
    residual: float
    history: tuple = field(default=())


def _as_vector_generator(b_of_t, sig: Signature):
    probe = b_of_t(np.array([0.0, 1.0]))
    if isinstance(probe, np.ndarray) and probe.shape == (2, 3):
        return b_of_t
    # scalar callable returning AlgebraElement
    return lambda t: np.array([b_of_t(float(s)).c for s in np.atleast_1d(t)])


def midpoint_product(b_vec, t0: float, t1: float, n: int, sig: Signature) -> np.ndarray:
    """Exponential-midpoint propagator with ``n`` uniform steps."""
    h = (t1 - t0) / n
    tm = t0 + h * (np.arange(n) + 0.5)
    return _chunked_product(h * np.asarray(b_vec(tm), dtype=float), sig)


def ode_propagate(b_of_t, t0: float, t1: float, step_control: QuadratureSpec = QuadratureSpec(),
                  sig: Signature = Signature.COMPACT, min_steps: int = 1,
                  max_steps: int = 1 << 24, full_output: bool = False):
    """Solve dG/dt = B(t) G, G(t0) = I with the exponential-midpoint rule.

    Each step is the exponential of an algebra element, so the result stays on the
    group to rounding.  The step count doubles until two consecutive refinements
    agree to tolerance; the Richardson estimate |G_2N - G_N| / 3 is reported.
    """
    b_vec = _as_vector_generator(b_of_t, sig)
    if t0 == t1:
        g = GroupElement.identity(sig)
        return (g, PropagationInfo(0, 0.0, 0.0)) if full_output else g
    n = max(1, int(min_steps))
    prev = midpoint_product(b_vec, t0, t1, n, sig)
    history = []
    small_in_row = 0
    while True:
        n *= 2
        if n > max_steps:
            raise ConvergenceError(
                f"step underflow: {n // 2} steps on [{t0}, {t1}] did not reach tolerance",
                partial=GroupElement(prev, sig, check=False),
            )
        cur = midpoint_product(b_vec, t0, t1, n, sig)
        err = float(np.max(np.abs(cur - prev))) / 3.0
        history.append((n, err))
        tol = max(step_control.abs_tol, step_control.rel_tol * float(np.max(np.abs(cur))))
        small_in_row = small_in_row + 1 if err <= tol else 0
        prev = cur
        # coarse grids can agree by aliasing, so they need a second confirmation
        if small_in_row >= 2 or (small_in_row and n >= 64):
            break
    g = GroupElement(cur, sig, check=False)
    if full_output:
        return g, PropagationInfo(n, err, g.residual(), tuple(history))
    return g


def assoc_legendre(mu: int, nu: int, x: float) -> float:
    """P^mu_nu(x) with the Condon-Shortley phase, by upward recurrence in degree."""
    mu, nu = int(mu), int(nu)
    if mu < 0 or nu < 0:
        raise ValueError("mu and nu must be non-negative")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x={x} outside [0, 1]")
    if mu > nu:
        return 0.0
    somx2 = math.sqrt((1.0 - x) * (1.0 + x))
    pmm = 1.0
    fact = 1.0
    for _ in range(mu):
        pmm *= -fact * somx2
        fact += 2.0
    if nu == mu:
        return pmm
    pmmp1 = x * (2 * mu + 1) * pmm
    if nu == mu + 1:
        return pmmp1
    for ell in range(mu + 2, nu + 1):
        pll = (x * (2 * ell - 1) * pmmp1 - (ell + mu - 1) * pmm) / (ell - mu)
        pmm, pmmp1 = pmmp1, pll
    return pmmp1


def central_difference(f, t, h: float, order: int = 4):
    """First derivative of a vectorized function by central differences."""
    t = np.asarray(t, dtype=float)
    if order == 2:
        return (np.asarray(f(t + h)) - np.asarray(f(t - h))) / (2 * h)
    if order == 4:
        return (-np.asarray(f(t + 2 * h)) + 8 * np.asarray(f(t + h))
                - 8 * np.asarray(f(t - h)) + np.asarray(f(t - 2 * h))) / (12 * h)
    raise ValueError("order must be 2 or 4")


def second_difference(f, t, h: float, order: int = 4):
    t = np.asarray(t, dtype=float)
    if order == 2:
        return (np.asarray(f(t + h)) - 2 * np.asarray(f(t)) + np.asarray(f(t - h))) / h**2
    if order == 4:
        return (-np.asarray(f(t + 2 * h)) + 16 * np.asarray(f(t + h)) - 30 * np.asarray(f(t))
                + 16 * np.asarray(f(t - h)) - np.asarray(f(t - 2 * h))) / (12 * h**2)
    raise ValueError("order must be 2 or 4")
