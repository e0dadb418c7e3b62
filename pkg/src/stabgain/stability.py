"""Hurwitz and Schur verdicts plus independent algebraic cross-checks."""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .poly import RealPoly, all_roots, as_poly

__all__ = [
    "StabilityVerdict",
    "ZeroPolynomial",
    "DegreeDrop",
    "EPS",
    "hurwitz_verdict",
    "schur_verdict",
    "verdict",
    "routh_table",
    "routh_hurwitz_stable",
    "routh_unstable_count",
    "bilinear_to_hurwitz",
    "vieta_bound_ok",
    "hurwitz_coefficients_positive",
    "batch_unstable_counts",
]

EPS = 1e-9


class ZeroPolynomial(ValueError):
    pass


class DegreeDrop(ValueError):
    """``p(1) == 0``: the bilinear image loses degree."""


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    margin: float  # max Re (continuous) or max |root| - 1 (discrete)
    unstable_count: int
    marginal_count: int

    def __str__(self):
        state = "stable" if self.stable else ("marginal" if self.unstable_count == 0 else "unstable")
        return (
            f"{state} (margin={self.margin:.6g}, unstable={self.unstable_count}, "
            f"marginal={self.marginal_count})"
        )


def _roots_for_verdict(p):
    p = as_poly(p)
    if p.trim().is_zero:
        raise ZeroPolynomial("zero polynomial has no stability verdict")
    return all_roots(p).expanded()


def hurwitz_verdict(p, eps: float = EPS) -> StabilityVerdict:
    """Continuous-time verdict: stable iff every root has ``Re < -eps``."""
    roots = _roots_for_verdict(p)
    if roots.size == 0:
        return StabilityVerdict(True, -np.inf, 0, 0)
    re = roots.real
    margin = float(re.max())
    return StabilityVerdict(
        stable=margin < -eps,
        margin=margin,
        unstable_count=int(np.sum(re > eps)),
        marginal_count=int(np.sum(np.abs(re) <= eps)),
    )


def schur_verdict(p, eps: float = EPS) -> StabilityVerdict:
    """Discrete-time verdict: stable iff every root has ``|z| < 1 - eps``."""
    roots = _roots_for_verdict(p)
    if roots.size == 0:
        return StabilityVerdict(True, -1.0, 0, 0)
    mod = np.abs(roots)
    margin = float(mod.max() - 1.0)
    return StabilityVerdict(
        stable=margin < -eps,
        margin=margin,
        unstable_count=int(np.sum(mod > 1 + eps)),
        marginal_count=int(np.sum(np.abs(mod - 1) <= eps)),
    )


def verdict(p, domain: str, eps: float = EPS) -> StabilityVerdict:
    if domain == "continuous":
        return hurwitz_verdict(p, eps)
    if domain == "discrete":
        return schur_verdict(p, eps)
    raise ValueError(f"unknown domain {domain!r}")


def routh_table(p, eps_sub: float = 1e-9, zero_tol: float = 1e-12):
    """Routh array of ``p`` (rows top to bottom).

    A zero pivot in a nonzero row is replaced by ``eps_sub`` times the row
    scale.  A row that vanishes entirely is replaced by the derivative of
    the auxiliary polynomial built from the row above.  Returns the table
    and a flag telling whether either substitution was needed.
    """
    p = as_poly(p).trim()
    d = p.degree
    if d is None:
        raise ZeroPolynomial("zero polynomial")
    c = p.coeffs[: d + 1][::-1] / p.leading  # descending, monic
    width = d // 2 + 1
    r0 = np.zeros(width)
    r1 = np.zeros(width)
    r0[: len(c[0::2])] = c[0::2]
    r1[: len(c[1::2])] = c[1::2]
    rows = [r0, r1]
    special = False
    scale = np.max(np.abs(c))
    for i in range(2, d + 1):
        prev2, prev = rows[-2], rows[-1]
        if np.all(np.abs(prev) <= zero_tol * scale):
            # auxiliary polynomial from prev2, degree d - i + 2
            special = True
            order = d - i + 2
            powers = np.arange(order, -1, -2)
            aux = np.zeros(width)
            aux[: powers.size] = prev2[: powers.size] * powers
            rows[-1] = prev = aux
        if abs(prev[0]) <= zero_tol * scale:
            special = True
            prev = prev.copy()
            prev[0] = eps_sub * max(scale, 1.0)
            rows[-1] = prev
        new = np.zeros(width)
        for j in range(width - 1):
            new[j] = (prev[0] * prev2[j + 1] - prev2[0] * prev[j + 1]) / prev[0]
        rows.append(new)
    return np.array(rows), special


def routh_unstable_count(p) -> int:
    """Sign changes in the first column of the Routh array."""
    table, _ = routh_table(p)
    first = table[:, 0]
    signs = np.sign(first[first != 0])
    return int(np.sum(signs[1:] != signs[:-1]))


def routh_hurwitz_stable(p) -> bool:
    """Routh-Hurwitz test: strictly positive first column, no special rows.

    A substituted zero pivot or an all-zero row signals roots on or
    symmetric about the imaginary axis, so the polynomial is not strictly
    stable even when the substituted column is positive.
    """
    p = as_poly(p).trim()
    if p.degree is None or p.degree < 1:
        raise ZeroPolynomial("need degree >= 1")
    table, special = routh_table(p)
    return (not special) and bool(np.all(table[:, 0] > 0))


def bilinear_to_hurwitz(p, tol: float = 1e-12) -> RealPoly:
    """``q(s) = (s - 1)**n * p((s + 1) / (s - 1))``.

    ``p`` is Schur stable iff ``q`` is Hurwitz stable, as long as
    ``p(1) != 0`` (the leading coefficient of ``q`` is ``p(1)``).
    """
    p = as_poly(p).trim(0.0)
    n = p.degree
    if n is None or n < 1:
        raise ZeroPolynomial("need degree >= 1")
    c = p.coeffs[: n + 1]
    if abs(np.sum(c)) <= tol * np.sum(np.abs(c)):
        raise DegreeDrop("p(1) = 0: bilinear image drops degree")
    plus = np.array([1.0, 1.0])
    minus = np.array([-1.0, 1.0])
    q = np.zeros(n + 1)
    P = np.polynomial.polynomial
    for j, cj in enumerate(c):
        if cj == 0:
            continue
        term = P.polymul(P.polypow(plus, j), P.polypow(minus, n - j))
        q[: term.size] += cj * term
    return RealPoly(q)


def hurwitz_coefficients_positive(p) -> bool:
    c = as_poly(p).normalized().coeffs
    return bool(np.all(c > 0))


def vieta_bound_ok(p, slack: float = 1e-9) -> bool:
    """``|a_j| <= C(n, j)`` for the monic normalization of ``p``."""
    c = as_poly(p).normalized().coeffs
    n = c.size - 1
    bound = np.array([comb(n, j) for j in range(n + 1)], dtype=float)
    return bool(np.all(np.abs(c) <= bound * (1 + slack)))


def batch_unstable_counts(coeffs: np.ndarray, domain: str, eps: float = EPS, include_marginal: bool = False):
    """Vectorized verdicts for many polynomials of equal degree.

    ``coeffs`` has shape ``(m, n + 1)`` in ascending order with a nonzero
    last column.  Returns ``(stable_mask, unstable_counts)`` computed from
    the raw companion eigenvalues, without clustering.  With
    ``include_marginal`` the count covers every root that is not strictly
    stable.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    m, n1 = coeffs.shape
    n = n1 - 1
    comp = np.zeros((m, n, n))
    if n > 1:
        idx = np.arange(n - 1)
        comp[:, idx + 1, idx] = 1.0
    comp[:, :, -1] = -coeffs[:, :n] / coeffs[:, n:]
    ev = np.linalg.eigvals(comp)
    if domain == "continuous":
        x = ev.real
        stable = x.max(axis=1) < -eps
        unstable = np.sum(x >= -eps if include_marginal else x > eps, axis=1)
    else:
        x = np.abs(ev)
        stable = x.max(axis=1) < 1 - eps
        unstable = np.sum(x >= 1 - eps if include_marginal else x > 1 + eps, axis=1)
    return stable, unstable
