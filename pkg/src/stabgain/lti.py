"""SISO state-space systems and the affine closed-loop polynomial family.

With output feedback ``u = -k y`` the closed-loop matrix is
``A - k b c^T`` and

    det(lambda I - A + k b c^T) = den(lambda) + k * num(lambda),

where ``den`` is the characteristic polynomial of ``A`` and
``num = c^T adj(lambda I - A) b``.  Every downstream formula uses this
identity, so a critical gain for a boundary root ``lam`` is
``k = -den(lam) / num(lam)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .poly import RealPoly, as_poly, from_roots

__all__ = [
    "Domain",
    "StateSpaceSiso",
    "TransferFraction",
    "CanonicalForm",
    "NonMinimal",
    "NotControllable",
    "ComplexTargets",
    "RANK_TOL",
    "ctrb",
    "obsv",
    "is_minimal",
    "to_transfer",
    "closed_loop_poly",
    "to_canonical",
    "place_poles",
    "companion_realization",
]

Domain = Literal["continuous", "discrete"]
DOMAINS = ("continuous", "discrete")

RANK_TOL = 1e-9


class NonMinimal(ValueError):
    """The realization is not both controllable and observable."""


class NotControllable(ValueError):
    pass


class ComplexTargets(ValueError):
    """Pole targets are not closed under complex conjugation."""


def _check_domain(domain):
    if domain not in DOMAINS:
        raise ValueError(f"domain must be one of {DOMAINS}, got {domain!r}")


@dataclass(frozen=True, eq=False)
class StateSpaceSiso:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    domain: Domain = "continuous"

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        c = np.asarray(self.c, dtype=float).reshape(-1)
        n = A.shape[0]
        if n < 1 or A.shape != (n, n):
            raise ValueError(f"A must be square with n >= 1, got shape {A.shape}")
        if b.shape != (n,) or c.shape != (n,):
            raise ValueError(f"b and c must have length {n}, got {b.shape[0]} and {c.shape[0]}")
        _check_domain(self.domain)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def closed_loop_matrix(self, k: float) -> np.ndarray:
        return self.A - k * np.outer(self.b, self.c)


@dataclass(frozen=True, eq=False)
class TransferFraction:
    """The family ``p(lambda, k) = den(lambda) + k * num(lambda)``.

    ``den`` is monic of degree ``n`` and ``num`` has degree below ``n``.
    """

    den: RealPoly
    num: RealPoly
    domain: Domain = "continuous"

    def __post_init__(self):
        den = as_poly(self.den)
        num = as_poly(self.num)
        d = den.degree
        if d is None or d < 1:
            raise ValueError("denominator must have degree >= 1")
        den = RealPoly(den.coeffs[: d + 1])
        if den.coeffs[-1] != 1.0:
            raise ValueError("denominator must be monic; normalize first")
        if num.degree is not None and num.degree >= d:
            raise ValueError("numerator degree must be below the denominator degree")
        num = RealPoly(np.pad(num.coeffs[:d], (0, max(0, d - num.coeffs.size))))
        _check_domain(self.domain)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "num", num)

    @property
    def n(self) -> int:
        return self.den.degree

    @classmethod
    def from_coeffs(cls, den, num, domain: Domain = "continuous") -> "TransferFraction":
        """Build from ascending coefficients, scaling ``den`` to be monic."""
        den = as_poly(den)
        lead = den.leading
        if lead == 0:
            raise ValueError("denominator is the zero polynomial")
        return cls(RealPoly(den.coeffs / lead), RealPoly(as_poly(num).coeffs / lead), domain)


@dataclass(frozen=True, eq=False)
class CanonicalForm:
    """Controllable canonical form ``(T A T^-1, T b, c^T T^-1)``."""

    T: np.ndarray
    A_flat: np.ndarray
    b_flat: np.ndarray
    c_tilde: np.ndarray

    @property
    def char_coeffs(self) -> np.ndarray:
        """Ascending coefficients ``a_0..a_{n-1}`` of the open-loop polynomial."""
        return -self.A_flat[-1, :]


def ctrb(A, b) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    cols = [np.asarray(b, dtype=float).reshape(-1)]
    for _ in range(A.shape[0] - 1):
        cols.append(A @ cols[-1])
    return np.column_stack(cols)


def obsv(A, c) -> np.ndarray:
    return ctrb(np.asarray(A, dtype=float).T, c).T


def _full_rank(M, tol):
    s = np.linalg.svd(M, compute_uv=False)
    return s.size > 0 and s[0] > 0 and bool(np.all(s > tol * s[0]))


def is_minimal(sys: StateSpaceSiso, tol: float = RANK_TOL) -> bool:
    """Kalman rank test for controllability and observability.

    Ranks count singular values above ``tol`` times the largest one.
    """
    return _full_rank(ctrb(sys.A, sys.b), tol) and _full_rank(obsv(sys.A, sys.c), tol)


def _faddeev_leverrier(A):
    """Characteristic polynomial (ascending, monic) and adjugate terms.

    ``adj(lambda I - A) = sum_k lambda**(n-1-k) B_k``.
    """
    n = A.shape[0]
    B = np.eye(n)
    terms = [B]
    a = [1.0]  # descending: lambda^n + a1 lambda^(n-1) + ...
    for k in range(1, n + 1):
        AB = A @ B
        ak = -np.trace(AB) / k
        a.append(ak)
        if k < n:
            B = AB + ak * np.eye(n)
            terms.append(B)
    return np.array(a[::-1]) + 0.0, terms


def to_transfer(sys: StateSpaceSiso, tol: float = RANK_TOL, check: bool = True) -> TransferFraction:
    """``(den, num)`` with ``det(lambda I - A + k b c^T) = den + k num``.

    Raises :class:`NonMinimal` unless the realization is minimal (pass
    ``check=False`` to skip the test).
    """
    if check and not is_minimal(sys, tol):
        raise NonMinimal("system is not minimal")
    den, terms = _faddeev_leverrier(sys.A)
    n = sys.n
    num = np.zeros(n)
    for k, Bk in enumerate(terms):
        num[n - 1 - k] = sys.c @ Bk @ sys.b
    return TransferFraction(RealPoly(den), RealPoly(num), sys.domain)


def closed_loop_poly(tf: TransferFraction, k: float) -> RealPoly:
    return RealPoly(tf.den.coeffs + k * np.pad(tf.num.coeffs, (0, tf.den.coeffs.size - tf.num.coeffs.size)))


def companion_realization(tf: TransferFraction) -> StateSpaceSiso:
    """Controllable canonical realization of ``tf``.

    The last row of ``A`` is ``-den[0..n-1]``, ``b = e_n``, ``c = num``.
    """
    n = tf.n
    A = np.eye(n, k=1)
    A[-1, :] = -tf.den.coeffs[:n]
    b = np.zeros(n)
    b[-1] = 1.0
    return StateSpaceSiso(A, b, tf.num.coeffs[:n], tf.domain)


def to_canonical(sys: StateSpaceSiso, tol: float = RANK_TOL) -> CanonicalForm:
    """Similarity transform to controllable canonical form.

    ``T^-1 = C W`` where ``C`` is the controllability matrix and ``W`` the
    upper-left triangular Hankel matrix of the characteristic polynomial.
    """
    C = ctrb(sys.A, sys.b)
    if not _full_rank(C, tol):
        raise NotControllable("pair (A, b) is not controllable")
    den, _ = _faddeev_leverrier(sys.A)
    n = sys.n
    W = np.zeros((n, n))
    for i in range(n):
        for j in range(n - i):
            W[i, j] = den[i + j + 1]
    Tinv = C @ W
    T = np.linalg.inv(Tinv)
    return CanonicalForm(T=T, A_flat=T @ sys.A @ Tinv, b_flat=T @ sys.b, c_tilde=sys.c @ Tinv)


def _conjugate_closed(targets, tol):
    remaining = list(targets)
    while remaining:
        z = remaining.pop()
        if abs(z.imag) <= tol * (1 + abs(z)):
            continue
        j = min(range(len(remaining)), key=lambda i: abs(remaining[i] - np.conj(z)), default=None)
        if j is None or abs(remaining[j] - np.conj(z)) > tol * (1 + abs(z)):
            return False
        remaining.pop(j)
    return True


def place_poles(cf: CanonicalForm, targets, tol: float = 1e-9) -> np.ndarray:
    """State-feedback gain ``g`` so that ``A_flat - b_flat g^T`` has the
    requested spectrum.

    In companion coordinates the closed-loop polynomial has ascending
    coefficients ``a + g``, so ``g`` is the coefficient difference.
    """
    targets = np.asarray(targets, dtype=complex).reshape(-1)
    n = cf.A_flat.shape[0]
    if targets.size != n:
        raise ValueError(f"expected {n} targets, got {targets.size}")
    if not _conjugate_closed(targets, tol):
        raise ComplexTargets("targets are not closed under conjugation")
    q = from_roots(targets).coeffs[:n]
    return q - cf.char_coeffs
