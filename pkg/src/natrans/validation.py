"""Quick self-test of the library's invariants, run by ``natrans validate``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .adiabatic import (
    generic_transition,
    reflection_amplitude,
    spin_flip_amplitude,
)
from .lie import AlgebraElement, Signature, cartan_decompose, exp_map, killing_form
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
from .numerics import assoc_legendre, integrate_adaptive
from .oracle import oracle_transition
from .oscillator import perelomov_popov_matrix


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def _lie_checks():
    rng = np.random.default_rng(7)
    worst = 0.0
    killing = 0.0
    for sig in Signature:
        for _ in range(50):
            c = rng.normal(size=3)
            if sig is Signature.NONCOMPACT:
                c[2] = math.copysign(abs(c[2]) + math.hypot(c[0], c[1]) + 0.1, c[2])
            b = AlgebraElement(c, sig)
            fr = cartan_decompose(b)
            worst = max(worst, float(np.max(np.abs(fr.reconstruct().c - c))))
            g = exp_map(AlgebraElement(rng.normal(size=3), sig))
            y = AlgebraElement(rng.normal(size=3), sig)
            killing = max(killing, abs(killing_form(g.conjugate(b), g.conjugate(y)) - killing_form(b, y)))
    yield Check("cartan reconstruction", worst < 1e-12, f"max error {worst:.2e}")
    yield Check("killing form conjugation invariance", killing < 1e-9, f"max change {killing:.2e}")


def _numerics_checks():
    res = integrate_adaptive(np.sin, 0.0, math.pi)
    yield Check("adaptive quadrature of sin on [0, pi]", bool(abs(res.value - 2) < 1e-12), f"{float(res.value)!r}")
    p = assoc_legendre(2, 3, 0.6)
    yield Check("associated Legendre P^2_3(0.6)", abs(p - 5.76) < 1e-12, f"{p!r}")


def _model_checks():
    p = RosenZenerParams(1.0, 0.5)
    o = oracle_transition(rosen_zener_profile(p).to_driving_profile())
    ex = rosen_zener_exact(p)
    yield Check("oracle vs Rosen-Zener exact", abs(o.probability - ex) <= 1e-5 * ex,
                f"{o.probability:.10e} vs {ex:.10e}")
    yield Check("oracle group drift", o.diagnostics["drift"] < 1e-9, f"{o.diagnostics['drift']:.2e}")
    p = RosenZenerParams(2.0, 1.5)
    sp = rosen_zener_profile(p)
    a = spin_flip_amplitude(sp)
    t = rosen_zener_adiabatic_transformed(p)
    g = generic_transition(sp)
    yield Check("spin-flip direct vs transformed", abs(abs(a.amplitude) - abs(t.amplitude)) < 1e-6,
                f"{abs(a.amplitude):.10e} vs {abs(t.amplitude):.10e}")
    yield Check("gamma-element route vs direct", abs(g.probability - a.probability) < 1e-6,
                f"{g.probability:.10e} vs {a.probability:.10e}")
    shifted = generic_transition(sp, t_ref=5.0)
    yield Check("reference-time gauge invariance", abs(shifted.probability - g.probability) < 1e-9,
                f"change {abs(shifted.probability - g.probability):.2e}")
    lp = LogisticBarrierParams(2.0, 0.3)
    r = reflection_amplitude(logistic_profile(lp))
    z = logistic_adiabatic_transformed(lp)
    yield Check("barrier direct vs substituted", abs(abs(r.amplitude) - abs(z.amplitude)) < 1e-6,
                f"{abs(r.amplitude):.10e} vs {abs(z.amplitude):.10e}")
    ex = logistic_exact(lp)
    yield Check("barrier adiabatic vs exact", abs(abs(r.amplitude) - ex) <= 0.15 * ex,
                f"{abs(r.amplitude):.6e} vs {ex:.6e}")


def _oscillator_checks():
    W = perelomov_popov_matrix(0.0, 20)
    yield Check("theta = 0 gives identity", bool(np.array_equal(W.entries, np.eye(21))), "")
    W = perelomov_popov_matrix(0.3, 40)
    sym = float(np.max(np.abs(W.entries - W.entries.T)))
    odd = float(max(W.entries[m, n] for m in range(41) for n in range(41) if (m - n) % 2))
    yield Check("transition matrix symmetry and parity", sym <= 1e-12 and odd == 0.0,
                f"asymmetry {sym:.1e}, odd max {odd:.1e}")


def run_validation() -> list[Check]:
    checks = []
    for group in (_lie_checks, _numerics_checks, _model_checks, _oscillator_checks):
        try:
            checks.extend(group())
        except Exception as exc:  # a crash is a failed check, not a crashed validator
            checks.append(Check(group.__name__.strip("_"), False, f"raised {exc!r}"))
    return checks
