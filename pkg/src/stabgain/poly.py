"""Real univariate polynomials and root extraction.

Coefficients are stored in ascending order: ``coeffs[j]`` multiplies
``x**j``.  Roots come from the eigenvalues of a balanced companion matrix
and are grouped into numerical multiple roots before being returned.
"""
from __future__ import annotations

from math import comb
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

__all__ = [
    "RealPoly",
    "RootSet",
    "as_poly",
    "evaluate",
    "derivative",
    "all_roots",
    "real_roots",
    "cluster_multiplicities",
    "REAL_TOL",
    "CLUSTER_TOL",
    "TRIM_TOL",
    "NEAR_MULTIPLE_TOL",
    "is_near_multiple",
    "from_roots",
]

# Defaults.  Double roots computed from eigenvalues separate as O(sqrt(eps)).
REAL_TOL = 1e-9
CLUSTER_TOL = 1e-6
TRIM_TOL = 1e-12
NEAR_MULTIPLE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class RealPoly:
    """Polynomial with real coefficients, ascending powers."""

    coeffs: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float)).copy()
        if c.ndim != 1:
            raise ValueError("coefficients must be one-dimensional")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int | None:
        """Index of the last nonzero coefficient, ``None`` for zero."""
        nz = np.flatnonzero(self.coeffs)
        return int(nz[-1]) if nz.size else None

    @property
    def is_zero(self) -> bool:
        return self.degree is None

    @property
    def leading(self) -> float:
        d = self.degree
        return 0.0 if d is None else float(self.coeffs[d])

    def trim(self, tol: float = TRIM_TOL) -> "RealPoly":
        """Drop trailing coefficients with ``|c| <= tol * max|c|``."""
        c = self.coeffs
        if c.size == 0:
            return self
        scale = np.max(np.abs(c))
        if scale == 0:
            return RealPoly(np.zeros(0))
        keep = np.flatnonzero(np.abs(c) > tol * scale)
        return RealPoly(c[: keep[-1] + 1])

    def normalized(self) -> "RealPoly":
        """Exact-zero trimmed and divided by the leading coefficient."""
        d = self.degree
        if d is None:
            raise ZeroDivisionError("cannot normalize the zero polynomial")
        return RealPoly(self.coeffs[: d + 1] / self.coeffs[d])

    def sign_normalized(self) -> "RealPoly":
        d = self.degree
        if d is None:
            return RealPoly(np.zeros(0))
        c = self.coeffs[: d + 1]
        return RealPoly(c if c[-1] > 0 else -c)

    def __call__(self, z):
        return evaluate(self, z)

    def __add__(self, other):
        return RealPoly(P.polyadd(self.coeffs, as_poly(other).coeffs))

    def __sub__(self, other):
        return RealPoly(P.polysub(self.coeffs, as_poly(other).coeffs))

    def __mul__(self, other):
        if np.isscalar(other):
            return RealPoly(self.coeffs * float(other))
        return RealPoly(P.polymul(self.coeffs, as_poly(other).coeffs))

    __rmul__ = __mul__

    def __neg__(self):
        return RealPoly(-self.coeffs)

    def __len__(self):
        return self.coeffs.size

    def __repr__(self):
        return f"RealPoly({self.coeffs.tolist()!r})"

    def allclose(self, other, rtol=1e-9, atol=0.0) -> bool:
        a = self.coeffs
        b = as_poly(other).coeffs
        n = max(a.size, b.size)
        a = np.pad(a, (0, n - a.size))
        b = np.pad(b, (0, n - b.size))
        return bool(np.allclose(a, b, rtol=rtol, atol=atol))


def as_poly(p) -> RealPoly:
    if isinstance(p, RealPoly):
        return p
    return RealPoly(np.asarray(p, dtype=float))


@dataclass(frozen=True)
class RootSet:
    """Distinct roots with integer multiplicities."""

    values: np.ndarray
    multiplicities: np.ndarray

    def __len__(self):
        return int(self.values.size)

    @property
    def total(self) -> int:
        return int(np.sum(self.multiplicities))

    def expanded(self) -> np.ndarray:
        """Roots repeated according to multiplicity."""
        return np.repeat(self.values, self.multiplicities)

    def __iter__(self):
        return iter(zip(self.values.tolist(), self.multiplicities.tolist()))


def evaluate(p, z):
    """Horner evaluation; ``z`` may be a scalar or an array."""
    c = as_poly(p).coeffs
    z = np.asarray(z)
    acc = np.zeros_like(z, dtype=np.result_type(z, c, float))
    for a in c[::-1]:
        acc = acc * z + a
    return acc[()] if acc.ndim == 0 else acc


def derivative(p) -> RealPoly:
    c = as_poly(p).coeffs
    if c.size <= 1:
        return RealPoly(np.zeros(0))
    return RealPoly(c[1:] * np.arange(1, c.size))


def _cluster_radius(tol, m, centroid):
    # An m-fold root perturbed by a relative coefficient error of tol**2
    # spreads over a disk of radius ~tol**(2/m).
    return tol ** (2.0 / m) * (1.0 + abs(centroid))


def cluster_multiplicities(raw: Iterable[complex], tol: float = CLUSTER_TOL) -> RootSet:
    """Group nearby roots into numerical multiple roots.

    Greedy, largest cluster first: around every remaining root take its
    ``m`` nearest neighbours and accept the group when all members lie
    within ``tol**(2/m) * (1 + |centroid|)`` of the centroid (for a pair
    this is ``tol * (1 + |centroid|)``).  Each accepted group is reported
    as its centroid with multiplicity ``m``.
    """
    remaining = [complex(z) for z in raw]
    values, mults = [], []
    while remaining:
        best = None
        for seed in remaining:
            near = sorted(remaining, key=lambda z: abs(z - seed))
            for m in range(len(near), 1, -1):
                group = near[:m]
                c = sum(group) / m
                spread = max(abs(z - c) for z in group)
                if spread <= _cluster_radius(tol, m, c):
                    if best is None or (m, -spread) > (len(best), -best_spread):
                        best, best_spread = group, spread
                    break
        if best is None:
            values.extend(remaining)
            mults.extend([1] * len(remaining))
            break
        for z in best:
            remaining.remove(z)
        values.append(sum(best) / len(best))
        mults.append(len(best))
    values = np.array(values, dtype=complex)
    mults = np.array(mults, dtype=int)
    order = np.lexsort((values.imag, values.real))
    return RootSet(values[order], mults[order])


def _taylor(c: np.ndarray, z: complex, upto: int):
    """Taylor coefficients of ``c`` at ``z`` and their magnitude scales."""
    out, scale = [], []
    n = c.size
    powers = np.array([z ** i for i in range(n)], dtype=complex)
    apow = np.abs(powers)
    for j in range(upto):
        idx = np.arange(j, n)
        binom = np.array([comb(i, j) for i in idx], dtype=float)
        out.append(np.sum(c[idx] * binom * powers[idx - j]))
        scale.append(np.sum(np.abs(c[idx]) * binom * apow[idx - j]))
    return np.array(out), np.array(scale)


def is_near_multiple(p, z: complex, m: int, eta: float = NEAR_MULTIPLE_TOL) -> bool:
    """True when a relative coefficient perturbation of size ``eta`` makes
    ``z`` an ``m``-fold root of ``p``: the first ``m`` Taylor coefficients
    at ``z`` are below ``eta`` times their magnitude scale."""
    t, scale = _taylor(as_poly(p).coeffs, complex(z), m)
    return bool(np.all(np.abs(t) <= eta * np.maximum(scale, np.finfo(float).tiny)))


def _absorb_near_multiple(p: RealPoly, rs: RootSet, eta: float) -> RootSet:
    vals = list(rs.values)
    mults = list(rs.multiplicities)
    while len(vals) > 1:
        pairs = sorted(
            ((abs(vals[i] - vals[j]), i, j) for i in range(len(vals)) for j in range(i + 1, len(vals))),
        )
        for _, i, j in pairs:
            m = mults[i] + mults[j]
            c = (mults[i] * vals[i] + mults[j] * vals[j]) / m
            if is_near_multiple(p, c, m, eta):
                vals[i], mults[i] = c, m
                del vals[j], mults[j]
                break
        else:
            break
    values = np.array(vals, dtype=complex)
    mults = np.array(mults, dtype=int)
    order = np.lexsort((values.imag, values.real))
    return RootSet(values[order], mults[order])


def _enforce_conjugate_symmetry(rs: RootSet, real_tol: float) -> RootSet:
    vals = rs.values.copy()
    mults = rs.multiplicities
    near_real = np.abs(vals.imag) <= real_tol * (1 + np.abs(vals))
    vals[near_real] = vals[near_real].real
    upper = [i for i in range(vals.size) if not near_real[i] and vals[i].imag > 0]
    lower = [i for i in range(vals.size) if not near_real[i] and vals[i].imag < 0]
    for i in upper:
        if not lower:
            break
        j = min(lower, key=lambda j: abs(vals[j] - np.conj(vals[i])))
        if mults[i] != mults[j]:
            continue
        avg = 0.5 * (vals[i] + np.conj(vals[j]))
        vals[i], vals[j] = avg, np.conj(avg)
        lower.remove(j)
    order = np.lexsort((vals.imag, vals.real))
    return RootSet(vals[order], mults[order])


def all_roots(
    p,
    tol: float = CLUSTER_TOL,
    real_tol: float = REAL_TOL,
    multiple_tol: float = NEAR_MULTIPLE_TOL,
) -> RootSet:
    """All complex roots of ``p`` with multiplicities.

    Trailing coefficients below ``TRIM_TOL * max|c|`` are dropped first.
    Eigenvalues of the companion matrix are grouped by
    :func:`cluster_multiplicities`; neighbouring groups are then merged
    while ``p`` stays within relative backward error ``multiple_tol`` of
    having the merged multiple root (this catches double roots of
    polynomials whose coefficients were rounded before they reached us).
    A constant polynomial yields an empty set.
    """
    p = as_poly(p).trim(TRIM_TOL)
    if p.is_zero:
        raise ValueError("the zero polynomial has no finite root set")
    if p.degree == 0:
        return RootSet(np.zeros(0, dtype=complex), np.zeros(0, dtype=int))
    c = p.coeffs
    # leading zeros of the root set (c[0] == 0) are exact, handle them apart
    lead_zeros = int(np.flatnonzero(c)[0])
    c = c[lead_zeros:]
    raw = np.zeros(0, dtype=complex)
    if c.size > 1:
        comp = P.polycompanion(c) if c.size > 2 else np.array([[-c[0] / c[1]]])
        raw = np.linalg.eigvals(comp).astype(complex)
    raw = np.concatenate([raw, np.zeros(lead_zeros, dtype=complex)])
    rs = cluster_multiplicities(raw, tol)
    if multiple_tol > 0:
        rs = _absorb_near_multiple(RealPoly(c), rs, multiple_tol)
        if lead_zeros:
            rs = _absorb_near_multiple(p, rs, multiple_tol)
    return _enforce_conjugate_symmetry(rs, real_tol)


def real_roots(
    p,
    tol: float = REAL_TOL,
    cluster_tol: float = CLUSTER_TOL,
    multiple_tol: float = NEAR_MULTIPLE_TOL,
) -> list[tuple[float, int]]:
    """Distinct real roots of ``p`` in ascending order with multiplicities."""
    p = as_poly(p)
    if p.trim(TRIM_TOL).degree in (None, 0):
        return []
    rs = all_roots(p, cluster_tol, tol, multiple_tol)
    out = [
        (float(v.real), int(m))
        for v, m in zip(rs.values, rs.multiplicities)
        if abs(v.imag) <= tol * (1 + abs(v))
    ]
    return sorted(out)


def from_roots(roots: Sequence[complex]) -> RealPoly:
    """Monic real polynomial with the given (conjugate-closed) roots."""
    c = np.real_if_close(P.polyfromroots(np.asarray(roots, dtype=complex)), tol=1e6)
    return RealPoly(np.real(c))
