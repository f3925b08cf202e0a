"""Two-dimensional representations of su(2) and su(1,1).

Both algebras share one code path.  The ordered basis (J1, J2, J3) is realized as

* compact (su(2)):       J_a = i sigma_a / 2
* non-compact (su(1,1)): J1 = sigma_1 / 2, J2 = sigma_2 / 2, J3 = i sigma_3 / 2

so in both cases J3 is diagonal and generates the U(1) Cartan subgroup whose
eigenstates label the asymptotic states.  Public functions operate on
:class:`AlgebraElement` / :class:`GroupElement` values; the underscore-prefixed
helpers work on stacked coefficient arrays of shape ``(..., 3)`` and are used by
the integrators for speed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    AlgebraError,
    DecompositionError,
    GroupConstraintError,
    SignatureMismatchError,
)

GROUP_TOL = 1e-10
ALGEBRA_TOL = 1e-12

SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
SIGMA3 = SIGMA[2]
IDENTITY = np.eye(2, dtype=complex)


class Signature(enum.Enum):
    COMPACT = "compact"
    NONCOMPACT = "noncompact"


_BASIS = {
    Signature.COMPACT: 0.5j * SIGMA,
    Signature.NONCOMPACT: np.array([0.5 * SIGMA[0], 0.5 * SIGMA[1], 0.5j * SIGMA[2]]),
}

# X^2 = (metric . c**2 / 4) I for X = sum c_a J_a
_METRIC = {
    Signature.COMPACT: np.array([-1.0, -1.0, -1.0]),
    Signature.NONCOMPACT: np.array([1.0, 1.0, -1.0]),
}


def basis(sig: Signature) -> np.ndarray:
    """Return the (3, 2, 2) stack of basis matrices for ``sig``."""
    return _BASIS[sig].copy()


def _project(m: np.ndarray, sig: Signature) -> tuple[np.ndarray, float]:
    # Tr(J_a^dagger J_b) = delta_ab / 2 in both realizations
    E = _BASIS[sig]
    raw = 2.0 * np.einsum("aji,...ji->...a", E.conj(), m)
    coeffs = raw.real
    recon = np.einsum("...a,aij->...ij", coeffs, E)
    resid = float(np.max(np.abs(m - recon))) if m.size else 0.0
    return coeffs, resid


def _structure_constants(sig: Signature) -> np.ndarray:
    E = _BASIS[sig]
    f = np.zeros((3, 3, 3))
    for a in range(3):
        for b in range(3):
            comm = E[a] @ E[b] - E[b] @ E[a]
            f[a, b], _ = _project(comm, sig)
    f[np.abs(f) < 1e-15] = 0.0
    return f


STRUCTURE = {sig: _structure_constants(sig) for sig in Signature}


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """Real coefficient vector on (J1, J2, J3) of su(2) or su(1,1)."""

    c: np.ndarray
    sig: Signature = Signature.COMPACT

    def __post_init__(self):
        c = np.array(self.c, dtype=float).reshape(3)
        if not np.all(np.isfinite(c)):
            raise AlgebraError(f"non-finite algebra coefficients {c}")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @classmethod
    def from_matrix(cls, m, sig: Signature, tol: float = 1e-9) -> "AlgebraElement":
        m = np.asarray(m, dtype=complex)
        coeffs, resid = _project(m, sig)
        scale = max(1.0, float(np.max(np.abs(m))))
        if resid > tol * scale:
            raise AlgebraError(f"matrix leaves the {sig.value} algebra (residual {resid:.3e})")
        return cls(coeffs, sig)

    @classmethod
    def zero(cls, sig: Signature = Signature.COMPACT) -> "AlgebraElement":
        return cls(np.zeros(3), sig)

    @classmethod
    def basis_element(cls, index: int, sig: Signature = Signature.COMPACT) -> "AlgebraElement":
        """``basis_element(3)`` is J3 (indices are 1-based like the physics)."""
        c = np.zeros(3)
        c[index - 1] = 1.0
        return cls(c, sig)

    @property
    def matrix(self) -> np.ndarray:
        return np.einsum("a,aij->ij", self.c, _BASIS[self.sig])

    @property
    def is_cartan(self) -> bool:
        return self.c[0] == 0.0 and self.c[1] == 0.0

    def _check(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        if other.sig is not self.sig:
            raise SignatureMismatchError(f"{self.sig.value} vs {other.sig.value}")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.c + other.c, self.sig)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.c - other.c, self.sig)

    def __neg__(self):
        return AlgebraElement(-self.c, self.sig)

    def __mul__(self, scalar):
        return AlgebraElement(float(scalar) * self.c, self.sig)

    __rmul__ = __mul__

    def allclose(self, other: "AlgebraElement", atol: float = ALGEBRA_TOL) -> bool:
        self._check(other)
        return bool(np.max(np.abs(self.c - other.c)) <= atol)

    def __repr__(self):
        c1, c2, c3 = self.c
        return f"AlgebraElement([{c1:.6g}, {c2:.6g}, {c3:.6g}], {self.sig.value})"


def group_residual(m: np.ndarray, sig: Signature) -> float:
    """Largest violation of det = 1 and the (pseudo-)unitarity constraint."""
    m = np.asarray(m, dtype=complex)
    det_err = abs(np.linalg.det(m) - 1.0)
    if sig is Signature.COMPACT:
        unit_err = np.max(np.abs(m.conj().T @ m - IDENTITY))
    else:
        unit_err = np.max(np.abs(m.conj().T @ SIGMA3 @ m - SIGMA3))
    return float(max(det_err, unit_err))


@dataclass(frozen=True, eq=False)
class GroupElement:
    """2x2 complex matrix in SU(2) or SU(1,1)."""

    m: np.ndarray
    sig: Signature = Signature.COMPACT
    check: bool = True

    def __post_init__(self):
        m = np.array(self.m, dtype=complex).reshape(2, 2)
        if self.check:
            resid = group_residual(m, self.sig)
            # pseudo-unitary elements can be large; compare relative to |m|^2
            scale = max(1.0, float(np.max(np.abs(m))) ** 2)
            if not np.isfinite(resid) or resid > GROUP_TOL * scale:
                raise GroupConstraintError(
                    f"matrix is not in the {self.sig.value} group (residual {resid:.3e})"
                )
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @classmethod
    def identity(cls, sig: Signature = Signature.COMPACT) -> "GroupElement":
        return cls(IDENTITY, sig)

    def residual(self) -> float:
        return group_residual(self.m, self.sig)

    def inverse(self) -> "GroupElement":
        a, b = self.m[0]
        c, d = self.m[1]
        return GroupElement(np.array([[d, -b], [-c, a]]), self.sig, check=False)

    def __matmul__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        if other.sig is not self.sig:
            raise SignatureMismatchError(f"{self.sig.value} vs {other.sig.value}")
        return GroupElement(self.m @ other.m, self.sig, check=False)

    def conjugate(self, a: AlgebraElement) -> AlgebraElement:
        """Adjoint action g a g^-1."""
        if a.sig is not self.sig:
            raise SignatureMismatchError(f"{self.sig.value} vs {a.sig.value}")
        return AlgebraElement.from_matrix(self.m @ a.matrix @ self.inverse().m, self.sig)

    def __repr__(self):
        return f"GroupElement({np.array2string(self.m, precision=6)}, {self.sig.value})"


@dataclass(frozen=True, eq=False)
class CartanFrame:
    """``b = v beta v^-1`` with ``beta`` on the J3 axis."""

    beta: AlgebraElement
    v: GroupElement

    def reconstruct(self) -> AlgebraElement:
        return self.v.conjugate(self.beta)


def commutator(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    if a.sig is not b.sig:
        raise SignatureMismatchError(f"{a.sig.value} vs {b.sig.value}")
    return AlgebraElement(_commutator_coeffs(a.c, b.c, a.sig), a.sig)


def _commutator_coeffs(x: np.ndarray, y: np.ndarray, sig: Signature) -> np.ndarray:
    return np.einsum("...a,...b,abc->...c", x, y, STRUCTURE[sig])


def adjoint_matrix(y: AlgebraElement) -> np.ndarray:
    """3x3 matrix Y of ad(y) on the coefficient space: ad(y) J_b = sum_c Y[c, b] J_c."""
    return np.einsum("a,abc->cb", y.c, STRUCTURE[y.sig])


def algebra_norm(y: AlgebraElement) -> float:
    """sqrt(Tr(Y Y^dagger)) with Y the adjoint-representation matrix of ``y``."""
    Y = adjoint_matrix(y)
    return float(np.sqrt(np.sum(Y * Y)))


def _norm_coeffs(c: np.ndarray, sig: Signature) -> np.ndarray:
    Y = np.einsum("...a,abc->...cb", c, STRUCTURE[sig])
    return np.sqrt(np.sum(Y * Y, axis=(-2, -1)))


def killing_form(x: AlgebraElement, y: AlgebraElement) -> float:
    """Tr(ad x ad y); invariant under every group element of either signature."""
    if x.sig is not y.sig:
        raise SignatureMismatchError(f"{x.sig.value} vs {y.sig.value}")
    return float(np.trace(adjoint_matrix(x) @ adjoint_matrix(y)))


def _exp_coeffs(c: np.ndarray, sig: Signature) -> np.ndarray:
    """Closed-form exponential of stacked coefficients, shape (..., 3) -> (..., 2, 2)."""
    c = np.asarray(c, dtype=float)
    s2 = np.einsum("...a,a->...", c * c, _METRIC[sig]) / 4.0
    r = np.sqrt(np.abs(s2))
    small = r < 1e-4
    with np.errstate(invalid="ignore", divide="ignore"):
        cos_part = np.where(s2 >= 0, np.cosh(r), np.cos(r))
        sin_part = np.where(s2 >= 0, np.sinh(r), np.sin(r)) / np.where(small, 1.0, r)
    # Taylor branch near zero keeps full relative precision
    cos_part = np.where(small, 1.0 + s2 / 2.0 + s2 * s2 / 24.0, cos_part)
    sin_part = np.where(small, 1.0 + s2 / 6.0 + s2 * s2 / 120.0, sin_part)
    X = np.einsum("...a,aij->...ij", c, _BASIS[sig])
    return cos_part[..., None, None] * IDENTITY + sin_part[..., None, None] * X


def exp_map(a: AlgebraElement) -> GroupElement:
    return GroupElement(_exp_coeffs(a.c, a.sig), a.sig, check=False)


def adjoint_deficit(h: GroupElement, eta: AlgebraElement) -> AlgebraElement:
    """R(h) eta = h eta h^-1 - eta; zero whenever h and eta share the Cartan axis."""
    return h.conjugate(eta) - eta


def _dexp_coeffs(x: np.ndarray, xdot: np.ndarray, sig: Signature) -> np.ndarray:
    """exp(-X) d/dt exp(X) = g(ad X) Xdot with g(z) = (1 - exp(-z)) / z.

    ad X satisfies (ad X)^3 = mu ad X, so g(ad X) = 1 + a1 ad X + a2 (ad X)^2.
    """
    x = np.atleast_2d(x)
    xdot = np.atleast_2d(xdot)
    A = np.einsum("...a,abc->...cb", x, STRUCTURE[sig])
    mu = 0.5 * np.einsum("...ij,...ji->...", A, A)
    small = np.abs(mu) < 1e-4
    safe = np.where(small, 1.0, mu)
    lam = np.sqrt(safe.astype(complex))
    a1 = np.where(small, -0.5 + mu / 24 - mu**2 / 720, np.real((1 - np.cosh(lam)) / safe))
    a2 = np.where(small, 1 / 6 - mu / 120 + mu**2 / 5040, np.real((np.sinh(lam) / lam - 1) / safe))
    c1 = _commutator_coeffs(x, xdot, sig)
    c2 = _commutator_coeffs(x, c1, sig)
    return xdot + a1[..., None] * c1 + a2[..., None] * c2


def _rotate_cartan(c: np.ndarray, phi) -> np.ndarray:
    """Ad(exp(phi J3)) applied to stacked coefficients (same in both signatures)."""
    c = np.asarray(c, dtype=float)
    cs, sn = np.cos(phi), np.sin(phi)
    out = np.empty(np.broadcast_shapes(c.shape, np.shape(phi) + (3,)))
    out[..., 0] = cs * c[..., 0] + sn * c[..., 1]
    out[..., 1] = -sn * c[..., 0] + cs * c[..., 1]
    out[..., 2] = c[..., 2]
    return out


def _cartan_coeffs(c: np.ndarray, sig: Signature, sign=None):
    """Vectorized Cartan decomposition.

    Returns ``(beta3, gen)``: the J3 coefficient of beta and the algebra
    coefficients of ``log v`` (which has no J3 part).  ``sign`` fixes the sign of
    beta3; by default it follows the sign of c3 (the minimal rotation / boost).
    """
    c = np.asarray(c, dtype=float)
    c1, c2, c3 = c[..., 0], c[..., 1], c[..., 2]
    rho2 = c1 * c1 + c2 * c2
    if sig is Signature.COMPACT:
        q = rho2 + c3 * c3
    else:
        q = c3 * c3 - rho2
        if np.any(q <= 0):
            raise DecompositionError(
                "hyperbolic or parabolic su(1,1) element: no compact Cartan form "
                "(under-barrier region p^2 <= 0)"
            )
    if np.any(q == 0):
        raise DecompositionError("cannot decompose the zero element")
    mag = np.sqrt(q)
    if sign is None:
        s = np.where(c3 < 0, -1.0, 1.0)
    else:
        s = np.broadcast_to(np.asarray(sign, dtype=float), c3.shape)
    beta3 = s * mag
    rho = np.sqrt(rho2)
    if sig is Signature.COMPACT:
        angle = np.arctan2(rho, s * c3)
    else:
        if np.any(s * c3 <= 0):
            raise DecompositionError("su(1,1) conjugation cannot reverse the sign of the J3 part")
        # tanh(angle) = rho / |c3|; arccosh(|c3| / mag) loses half the digits near rho = 0
        angle = np.arctanh(rho / (s * c3))
    safe = np.where(rho > 0, rho, 1.0)
    m1 = np.where(rho > 0, c2 / (s * safe), 0.0)
    m2 = np.where(rho > 0, -c1 / (s * safe), 0.0)
    gen = np.stack([angle * m1, angle * m2, np.zeros_like(angle)], axis=-1)
    return beta3, gen


def cartan_decompose(b: AlgebraElement, sign: float | None = None) -> CartanFrame:
    """Decompose ``b = v beta v^-1`` with ``beta`` on the J3 axis.

    The sign of beta follows the J3 component of ``b`` unless ``sign`` pins it
    (used to keep a trajectory continuous with its t -> -inf asymptote).
    """
    beta3, gen = _cartan_coeffs(b.c, b.sig, sign)
    beta = AlgebraElement([0.0, 0.0, float(beta3)], b.sig)
    v = GroupElement(_exp_coeffs(gen, b.sig), b.sig, check=False)
    return CartanFrame(beta, v)
