"""Brute-force cross-checks that use only ``lti`` and ``stability``.

Nothing here touches the boundary-polynomial machinery of
:mod:`stabgain.gain_intervals`, so agreement between the two is a genuine
check rather than a restatement.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lti import StateSpaceSiso, TransferFraction, closed_loop_poly, is_minimal, place_poles, to_canonical
from .poly import RealPoly, evaluate
from .stability import EPS, batch_unstable_counts, hurwitz_verdict, schur_verdict

__all__ = [
    "GridClassification",
    "MultiplicityMismatch",
    "grid_classify",
    "default_grid_range",
    "vieta_gain_window",
    "random_minimal_system",
    "asymptotic_root_check",
    "boundary_probe",
    "phi_direct",
    "phi_derivative_check",
    "discrete_derivative_check",
    "root_space_path_stabilizing",
]


class MultiplicityMismatch(ValueError):
    """``lam0`` is not an ``m``-fold root of ``p(., k0)``."""


@dataclass(frozen=True)
class GridClassification:
    k_grid: np.ndarray
    stable_mask: np.ndarray
    unstable_counts: np.ndarray  # roots not strictly stable, per point
    inferred_intervals: tuple[tuple[float, float], ...]  # maximal stable runs

    @property
    def step(self) -> float:
        return float(self.k_grid[1] - self.k_grid[0])

    def run_boundaries(self) -> np.ndarray:
        """Midpoints between consecutive grid points whose count differs."""
        idx = np.flatnonzero(np.diff(self.unstable_counts) != 0)
        return self.k_grid[idx] + 0.5 * self.step


def _stable_runs(k, mask):
    runs = []
    start = None
    for i, s in enumerate(mask):
        if s and start is None:
            start = i
        elif not s and start is not None:
            runs.append((float(k[start]), float(k[i - 1])))
            start = None
    if start is not None:
        runs.append((float(k[start]), float(k[-1])))
    return tuple(runs)


def grid_classify(
    tf: TransferFraction, k_lo: float, k_hi: float, count: int = 10001, eps: float = EPS
) -> GridClassification:
    """Closed-loop verdict at ``count`` uniformly spaced gains."""
    if count < 2 or not k_lo < k_hi:
        raise ValueError("need count >= 2 and k_lo < k_hi")
    k = np.linspace(k_lo, k_hi, count)
    coeffs = tf.den.coeffs[None, :] + k[:, None] * np.append(tf.num.coeffs, 0.0)[None, :]
    stable, counts = batch_unstable_counts(coeffs, tf.domain, eps, include_marginal=True)
    return GridClassification(k, stable, counts, _stable_runs(k, stable))


def vieta_gain_window(tf: TransferFraction):
    """Gains allowed by ``|den_j + k num_j| <= C(n, j)``, a necessary
    condition for Schur stability; ``None`` if ``num`` is zero."""
    n = tf.n
    lo, hi = -math.inf, math.inf
    for j, (dj, rj) in enumerate(zip(tf.den.coeffs[:n], tf.num.coeffs)):
        if rj == 0:
            continue
        c = math.comb(n, j)
        a, b = sorted(((-c - dj) / rj, (c - dj) / rj))
        lo, hi = max(lo, a), min(hi, b)
    if not math.isfinite(lo):
        return None
    return lo, hi


def default_grid_range(tf: TransferFraction, gains: Sequence[float] = ()):
    """``[k_min - 1 - span, k_max + 1 + span]``, widened to the Vieta
    window for discrete families."""
    ks = sorted(float(k) for k in gains)
    if ks:
        span = ks[-1] - ks[0]
        lo, hi = ks[0] - 1.0 - span, ks[-1] + 1.0 + span
    else:
        lo, hi = -1.0, 1.0
    if tf.domain == "discrete":
        win = vieta_gain_window(tf)
        if win is not None and win[0] <= win[1]:
            lo, hi = min(lo, win[0] - 1.0), max(hi, win[1] + 1.0)
    return lo, hi


def random_minimal_system(n: int, domain: str = "continuous", seed=None, max_draws: int = 1000) -> StateSpaceSiso:
    """Standard normal ``(A, b, c)``, redrawn until minimal."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    for _ in range(max_draws):
        sys = StateSpaceSiso(rng.standard_normal((n, n)), rng.standard_normal(n), rng.standard_normal(n), domain)
        if is_minimal(sys):
            return sys
    raise RuntimeError(f"no minimal system after {max_draws} draws")


def _deflate(p: np.ndarray, lam0: complex, m: int):
    """Divide ``p`` by ``(lambda - lam0)**m``; return quotient and the
    relative size of the discarded remainders."""
    q = p.astype(complex)
    worst = 0.0
    scale = float(np.sum(np.abs(p) * np.abs(lam0) ** np.arange(p.size))) or 1.0
    for _ in range(m):
        # synthetic division, descending
        desc = q[::-1]
        out = np.empty(desc.size - 1, dtype=complex)
        acc = 0.0
        for i, c in enumerate(desc[:-1]):
            acc = acc * lam0 + c
            out[i] = acc
        rem = acc * lam0 + desc[-1]
        worst = max(worst, abs(rem) / scale)
        q = out[::-1]
    return q, worst


def asymptotic_root_check(
    tf: TransferFraction,
    k0: float,
    lam0: complex,
    m: int,
    deltas: Sequence[float] = (1e-3, 1e-4, 1e-5),
    mult_tol: float = 1e-6,
) -> np.ndarray:
    """Compare roots of ``p(., k0 + delta)`` near ``lam0`` with the leading
    term ``lam0 + (-delta num(lam0) / h(lam0))**(1/m) * omega_j``.

    ``h = p(., k0) / (lambda - lam0)**m`` and ``omega_j`` runs over the
    ``m``-th roots of unity.  Returns, per delta, the largest matched error
    divided by ``|delta|**(1/m)``; these ratios shrink as ``delta -> 0``.
    """
    p0 = closed_loop_poly(tf, k0).coeffs
    h, rem = _deflate(p0, complex(lam0), m)
    if rem > mult_tol:
        raise MultiplicityMismatch(f"remainder {rem:.3g} after deflating {m} roots")
    h_val = complex(np.polynomial.polynomial.polyval(lam0, h))
    if h_val == 0:
        raise MultiplicityMismatch("root multiplicity exceeds m")
    n_val = complex(evaluate(tf.num, lam0))
    omega = np.exp(2j * np.pi * np.arange(m) / m)
    ratios = []
    for delta in deltas:
        lead = (-delta * n_val / h_val) ** (1.0 / m)
        pred = lam0 + lead * omega
        roots = np.roots(closed_loop_poly(tf, k0 + delta).coeffs[::-1])
        near = roots[np.argsort(np.abs(roots - lam0))[:m]]
        best = min(
            max(abs(near[i] - pred[j]) for i, j in enumerate(perm))
            for perm in itertools.permutations(range(m))
        )
        ratios.append(best / abs(delta) ** (1.0 / m))
    return np.array(ratios)


def boundary_probe(
    A,
    b,
    k_marginal,
    domain: str = "continuous",
    trials: int = 200,
    radius: float = 1e-4,
    seed=None,
    eps: float = EPS,
) -> bool:
    """Look for both a stable and an unstable state-feedback gain within
    ``radius`` of ``k_marginal`` for the family ``A - b k^T``."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    k0 = np.asarray(k_marginal, dtype=float).reshape(-1)
    rng = np.random.default_rng(seed)
    check = hurwitz_verdict if domain == "continuous" else schur_verdict
    seen_stable = seen_unstable = False
    for _ in range(trials):
        d = rng.standard_normal(k0.size)
        k = k0 + radius * rng.uniform() * d / np.linalg.norm(d)
        v = check(np.poly(A - np.outer(b, k))[::-1], eps)
        seen_stable |= v.stable
        seen_unstable |= v.unstable_count > 0
        if seen_stable and seen_unstable:
            return True
    return False


def phi_direct(tf: TransferFraction, beta) -> np.ndarray:
    """``Im(den(i beta) conj(num(i beta)))`` by complex evaluation."""
    lam = 1j * np.asarray(beta, dtype=float)
    return np.imag(evaluate(tf.den, lam) * np.conj(evaluate(tf.num, lam)))


def _reflect(p: RealPoly) -> RealPoly:
    """``p(-lambda)``."""
    return RealPoly(p.coeffs * (-1.0) ** np.arange(p.coeffs.size))


def phi_derivative_check(tf: TransferFraction, beta: float, h: float | None = None) -> float:
    """Relative gap between a central difference of ``phi`` at ``beta`` and
    ``Re f'(i beta)`` with ``f(lambda) = den(lambda) num(-lambda)``.

    The gap is measured against the absolute-value bound of ``f'`` on the
    circle ``|lambda| = |beta|``.
    """
    h = h if h is not None else 1e-5 * (1.0 + abs(beta))
    fd = (phi_direct(tf, beta + h) - phi_direct(tf, beta - h)) / (2 * h)
    f = tf.den * _reflect(tf.num)
    fprime = np.polynomial.polynomial.polyder(f.coeffs)
    exact = np.real(np.polynomial.polynomial.polyval(1j * beta, fprime))
    scale = max(abs(exact), float(np.sum(np.abs(fprime) * abs(beta) ** np.arange(fprime.size))))
    return float(abs(fd - exact) / scale)


def _big_g(tf: TransferFraction, theta):
    lam = np.exp(1j * np.asarray(theta, dtype=float))
    return np.imag(evaluate(tf.den, lam) * evaluate(tf.num, 1.0 / lam))


def discrete_derivative_check(tf: TransferFraction, theta: float, h: float = 1e-5) -> float:
    """Relative gap between a central difference of
    ``G(theta) = Im(den(lam) num(1/lam))`` and ``Re(lam f'(lam))`` at
    ``lam = e^{i theta}``, ``f(lam) = den(lam) num(1/lam)``."""
    P = np.polynomial.polynomial
    fd = (_big_g(tf, theta + h) - _big_g(tf, theta - h)) / (2 * h)
    lam = np.exp(1j * theta)
    d, r = tf.den.coeffs, tf.num.coeffs
    fprime = P.polyval(lam, P.polyder(d)) * P.polyval(1 / lam, r) - P.polyval(lam, d) * P.polyval(
        1 / lam, P.polyder(r)
    ) / lam**2
    exact = float(np.real(lam * fprime))
    jd = np.arange(d.size)
    jr = np.arange(r.size)
    scale = max(abs(exact), float(np.sum(np.abs(d) * jd) * np.sum(np.abs(r)) + np.sum(np.abs(d)) * np.sum(np.abs(r) * jr)))
    return float(abs(fd - exact) / scale)


def root_space_path_stabilizing(A, b, roots_a, roots_b, steps: int = 100, domain: str = "continuous") -> bool:
    """Interpolate two stable root multisets linearly, place poles at each
    step and confirm every intermediate state-feedback gain stabilizes.

    Conjugate pairs must sit at matching positions in ``roots_a`` and
    ``roots_b`` so every intermediate multiset is conjugate-closed.
    """
    sys = StateSpaceSiso(A, b, np.ones(np.asarray(b).size), domain)
    cf = to_canonical(sys)
    ra = np.asarray(roots_a, dtype=complex)
    rb = np.asarray(roots_b, dtype=complex)
    check = hurwitz_verdict if domain == "continuous" else schur_verdict
    for t in np.linspace(0.0, 1.0, steps + 1):
        target = (1 - t) * ra + t * rb
        g = place_poles(cf, target) @ cf.T
        if not check(np.poly(sys.A - np.outer(sys.b, g))[::-1]).stable:
            return False
    return True
