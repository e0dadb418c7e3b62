"""Decomposition of the output-feedback gain axis into stability intervals.

For the family ``p(lambda, k) = den(lambda) + k num(lambda)`` a root can
only reach the stability boundary (imaginary axis, unit circle) at finitely
many gains.  Those gains come from the real roots of a boundary polynomial:

* continuous: ``phi(beta) = Im(den(i beta) * conj(num(i beta)))``, an odd
  polynomial, so only ``beta = 0`` and the square roots of the positive
  roots of its compressed even part matter;
* discrete: ``Im(den(e^{it}) * conj(num(e^{it}))) = sin(t) g(cos t)`` with
  ``g`` a combination of Chebyshev polynomials of the second kind, plus the
  two real points ``t = 0`` and ``t = pi``.

Between consecutive critical gains the number of unstable roots is
constant, so one sample per interval classifies it.  A critical gain whose
boundary root is a multiple root of the boundary polynomial and whose root
velocity is tangent to the boundary separates two intervals of the same
character.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import oracle as _oracle
from .lti import StateSpaceSiso, TransferFraction, closed_loop_poly, to_transfer
from .poly import (
    CLUSTER_TOL,
    NEAR_MULTIPLE_TOL,
    REAL_TOL,
    RealPoly,
    as_poly,
    derivative,
    evaluate,
    real_roots,
)
from .stability import EPS, verdict

__all__ = [
    "AnalysisOptions",
    "BoundaryRoot",
    "CriticalGain",
    "IntervalReport",
    "AnalysisReport",
    "DegenerateNumerator",
    "PhiIdenticallyZero",
    "GIdenticallyZero",
    "BoundaryPole",
    "EmptyStabilizingSet",
    "NotOdd",
    "phi_poly",
    "odd_part_compress",
    "chebyshev_u",
    "g_poly_discrete",
    "boundary_point",
    "gain_at",
    "continuous_critical_gains",
    "discrete_critical_gains",
    "critical_gains",
    "tangency_continuous",
    "tangency_discrete",
    "classify_intervals",
    "analyze",
]

log = logging.getLogger(__name__)


class DegenerateNumerator(ValueError):
    """The numerator is identically zero: the gain has no effect."""


class PhiIdenticallyZero(ValueError):
    """Every point of the imaginary axis is a boundary crossing for some gain."""


class GIdenticallyZero(ValueError):
    """Every point of the unit circle is a boundary crossing for some gain."""


class BoundaryPole(ValueError):
    """``den`` and ``num`` share a root on the stability boundary."""


class EmptyStabilizingSet(ValueError):
    """No gain stabilizes: a boundary root is fixed for every ``k``."""


class NotOdd(ValueError):
    pass


@dataclass(frozen=True)
class AnalysisOptions:
    """Numerical knobs; defaults are the documented module defaults.

    eps          boundary tolerance for stability verdicts
    real_tol     realness tolerance for roots of the boundary polynomial
    cluster_tol  distance tolerance for grouping multiple roots
    multiple_tol backward-error tolerance for near-multiple roots
    dedup_tol    critical gains closer than dedup_tol*(1+|k|) are merged
    accept_tol   max relative imaginary residual of an accepted gain
    tangent_tol  threshold on the normalized tangency residual
    odd_tol      max relative even coefficient of phi
    grid_count   grid size for the oracle fallback
    """

    eps: float = EPS
    real_tol: float = REAL_TOL
    cluster_tol: float = CLUSTER_TOL
    multiple_tol: float = NEAR_MULTIPLE_TOL
    dedup_tol: float = 1e-7
    accept_tol: float = 1e-7
    tangent_tol: float = 1e-6
    odd_tol: float = 1e-9
    grid_count: int = 10001


DEFAULT_OPTIONS = AnalysisOptions()


@dataclass(frozen=True)
class BoundaryRoot:
    """Boundary contact: ``beta >= 0`` (root ``i beta``) or ``theta`` in
    ``[0, pi]`` (root ``e^{i theta}``), with its multiplicity as a root of
    the boundary polynomial and the outcome of the tangency test."""

    param: float
    multiplicity: int
    tangent: bool = False


@dataclass(frozen=True)
class CriticalGain:
    k: float
    boundary_roots: tuple[BoundaryRoot, ...]
    tangent: bool


@dataclass(frozen=True)
class IntervalReport:
    lo: float
    hi: float
    unstable_count: int
    stabilizing: bool
    representative_k: float

    def contains(self, k: float) -> bool:
        return self.lo < k < self.hi


@dataclass(frozen=True)
class AnalysisReport:
    domain: str
    n: int
    critical_gains: tuple[CriticalGain, ...]
    intervals: tuple[IntervalReport, ...]
    num_stabilizing_components: int
    bound: int
    bound_satisfied: bool
    unbounded_stabilizing: str  # none | left | right | both
    flags: tuple[str, ...] = ()
    degraded: bool = False
    tf: TransferFraction | None = field(default=None, repr=False, compare=False)

    def interval_at(self, k: float) -> IntervalReport | None:
        for iv in self.intervals:
            if iv.contains(k):
                return iv
        return None

    def stabilizing_intervals(self) -> list[IntervalReport]:
        return [iv for iv in self.intervals if iv.stabilizing]


# -- boundary polynomials ---------------------------------------------------


def _imag_axis_parts(c: np.ndarray):
    """Real and imaginary parts of ``c(i beta)`` as polynomials in beta."""
    re = np.zeros(c.size)
    im = np.zeros(c.size)
    for j, cj in enumerate(c):
        sign = 1.0 if j % 4 in (0, 1) else -1.0
        if j % 2 == 0:
            re[j] = sign * cj
        else:
            im[j] = sign * cj
    return re, im


def _check_numerator(tf: TransferFraction):
    if tf.num.trim(0.0).is_zero:
        raise DegenerateNumerator("numerator is identically zero")


def phi_poly(tf: TransferFraction) -> RealPoly:
    """``Im(den(i beta) conj(num(i beta)))`` with positive leading
    coefficient (only the root set is meaningful)."""
    _check_numerator(tf)
    P = np.polynomial.polynomial
    d_re, d_im = _imag_axis_parts(tf.den.coeffs)
    n_re, n_im = _imag_axis_parts(tf.num.coeffs)
    phi = P.polysub(P.polymul(d_im, n_re), P.polymul(d_re, n_im))
    return RealPoly(phi).sign_normalized()


def _boundary_scale(tf: TransferFraction) -> float:
    return float(np.sum(np.abs(tf.den.coeffs)) * np.sum(np.abs(tf.num.coeffs)))


def odd_part_compress(phi, tol: float = 1e-9) -> RealPoly:
    """``upsilon`` with ``phi(beta) = beta * upsilon(beta**2)``."""
    c = as_poly(phi).coeffs
    if c.size == 0:
        return RealPoly(np.zeros(0))
    scale = np.max(np.abs(c))
    even = c[0::2]
    if scale > 0 and np.any(np.abs(even) > tol * scale):
        raise NotOdd("polynomial has non-negligible even coefficients")
    return RealPoly(c[1::2])


def chebyshev_u(m: int) -> np.ndarray:
    """Ascending coefficients of ``U_m`` from ``U_0 = 1``, ``U_1 = 2v``,
    ``U_m = 2v U_{m-1} - U_{m-2}``."""
    P = np.polynomial.polynomial
    u_prev, u = np.array([1.0]), np.array([0.0, 2.0])
    if m == 0:
        return u_prev
    for _ in range(m - 1):
        u_prev, u = u, P.polysub(P.polymul([0.0, 2.0], u), u_prev)
    return u


def _sine_coefficients(tf: TransferFraction) -> np.ndarray:
    """``b[m]`` with ``Im(den(e^{it}) conj(num(e^{it}))) = sum b[m] sin(m t)``."""
    d = tf.den.coeffs
    r = tf.num.coeffs
    n = d.size - 1
    alpha = {}
    for j, dj in enumerate(d):
        for l, rl in enumerate(r):
            alpha[j - l] = alpha.get(j - l, 0.0) + dj * rl
    b = np.zeros(n + 1)
    for m in range(1, n + 1):
        b[m] = alpha.get(m, 0.0) - alpha.get(-m, 0.0)
    return b


def g_poly_discrete(tf: TransferFraction) -> RealPoly:
    """``g`` with ``Im(den(e^{it}) conj(num(e^{it}))) = sin(t) g(cos t)``,
    sign-normalized."""
    _check_numerator(tf)
    b = _sine_coefficients(tf)
    g = np.zeros(max(b.size - 1, 1))
    for m in range(1, b.size):
        if b[m]:
            u = chebyshev_u(m - 1)
            g[: u.size] += b[m] * u
    return RealPoly(g).sign_normalized()


# -- critical gains ---------------------------------------------------------


def boundary_point(param: float, domain: str) -> complex:
    if domain == "continuous":
        return complex(0.0, param)
    return complex(math.cos(param), math.sin(param))


def gain_at(tf: TransferFraction, lam: complex) -> complex:
    """``-den(lam) / num(lam)``, the gain placing a root at ``lam``."""
    return -complex(evaluate(tf.den, lam)) / complex(evaluate(tf.num, lam))


def _abs_scale(c: np.ndarray, lam: complex) -> float:
    return float(np.sum(np.abs(c) * np.abs(lam) ** np.arange(c.size)))


def _tangency_residual(tf: TransferFraction, k: float, lam: complex, rotate: complex) -> float | None:
    dp = complex(evaluate(derivative(tf.den), lam) + k * evaluate(derivative(tf.num), lam))
    nv = complex(evaluate(tf.num, lam))
    scale = abs(dp) * abs(nv)
    if scale == 0.0:
        return None
    return abs((dp * nv.conjugate() * rotate).real) / scale


def tangency_continuous(tf: TransferFraction, k: float, beta: float, tol: float = 1e-6) -> bool:
    """Root velocity ``-num/p'`` at ``i beta`` is purely imaginary, i.e.
    ``Re(p'(i beta, k) conj(num(i beta)))`` vanishes relative to
    ``|p'| |num|``.  False when ``i beta`` is a multiple root of ``p``."""
    res = _tangency_residual(tf, k, boundary_point(beta, "continuous"), 1.0)
    return res is not None and res <= tol


def tangency_discrete(tf: TransferFraction, k: float, theta: float, tol: float = 1e-6) -> bool:
    """Root velocity at ``lam = e^{i theta}`` is orthogonal to ``lam``:
    ``Re(conj(num(lam)) p'(lam, k) lam) = 0`` up to ``tol``."""
    lam = boundary_point(theta, "discrete")
    res = _tangency_residual(tf, k, lam, lam)
    return res is not None and res <= tol


def _accept(tf, candidates, domain, opts: AnalysisOptions):
    """Map (param, multiplicity) candidates to real gains."""
    out = []
    d_c, n_c = tf.den.coeffs, tf.num.coeffs
    for param, mult in candidates:
        lam = boundary_point(param, domain)
        nv = complex(evaluate(tf.num, lam))
        dv = complex(evaluate(tf.den, lam))
        if abs(nv) <= 1e-12 * _abs_scale(n_c, lam):
            if abs(dv) <= 1e-12 * _abs_scale(d_c, lam):
                raise BoundaryPole(f"den and num share the boundary root {lam:.6g}")
            continue  # num vanishes here: no finite gain
        k = -dv / nv
        if abs(k.imag) > opts.accept_tol * (1.0 + abs(k)):
            log.debug("discarding candidate %s: gain %s not real", param, k)
            continue
        out.append((k.real, param, mult))
    return out


def _merge(tf, accepted, domain, opts: AnalysisOptions):
    accepted.sort()
    groups: list[list[tuple[float, float, int]]] = []
    for item in accepted:
        if groups and abs(item[0] - groups[-1][0][0]) <= opts.dedup_tol * (1.0 + abs(groups[-1][0][0])):
            groups[-1].append(item)
        else:
            groups.append([item])
    test = tangency_continuous if domain == "continuous" else tangency_discrete
    gains = []
    merged = False
    for grp in groups:
        k = float(np.mean([g[0] for g in grp]))
        roots = {}
        for _, param, mult in grp:
            key = round(param, 12)
            if key in roots:
                roots[key] = (roots[key][0], max(roots[key][1], mult))
            else:
                roots[key] = (param, mult)
        if len(roots) > 1:
            merged = True
        brs = []
        for param, mult in sorted(roots.values()):
            tangent = mult > 1 and test(tf, k, param, opts.tangent_tol)
            brs.append(BoundaryRoot(float(param), int(mult), bool(tangent)))
        gains.append(CriticalGain(k, tuple(brs), all(b.tangent for b in brs)))
    return gains, merged


def _multiplicity_of_zero(roots, tol):
    for w, m in roots:
        if abs(w) <= tol:
            return m
    return 0


def continuous_critical_gains(tf: TransferFraction, opts: AnalysisOptions = DEFAULT_OPTIONS, *, _report=None):
    """Critical gains of a continuous-time family, ascending.

    Candidates are ``beta = 0`` and ``beta = sqrt(w)`` for every positive
    real root ``w`` of the compressed boundary polynomial.
    """
    phi = phi_poly(tf)
    if phi.is_zero or np.max(np.abs(phi.coeffs)) <= 1e-13 * _boundary_scale(tf):
        raise PhiIdenticallyZero("phi vanishes identically")
    ups = odd_part_compress(phi, opts.odd_tol)
    ups_roots = real_roots(ups, opts.real_tol, opts.cluster_tol, opts.multiple_tol) if ups.trim().degree else []
    zero_tol = opts.real_tol * 10
    candidates = [(0.0, 1 + 2 * _multiplicity_of_zero(ups_roots, zero_tol))]
    for w, m in ups_roots:
        if w > zero_tol:
            candidates.append((math.sqrt(w), m))
    gains, merged = _merge(tf, _accept(tf, candidates, "continuous", opts), "continuous", opts)
    if _report is not None and merged:
        _report.add("near_coincident_gains_merged")
    return gains


def discrete_critical_gains(tf: TransferFraction, opts: AnalysisOptions = DEFAULT_OPTIONS, *, _report=None):
    """Critical gains of a discrete-time family, ascending.

    Candidates are ``theta = 0``, ``theta = pi`` and ``theta = arccos(v)``
    for the real roots ``v`` of ``g`` inside ``[-1, 1]``.
    """
    g = g_poly_discrete(tf)
    b = _sine_coefficients(tf)
    if np.max(np.abs(b)) <= 1e-13 * _boundary_scale(tf):
        raise GIdenticallyZero("boundary polynomial vanishes identically")
    g_roots = real_roots(g, opts.real_tol, opts.cluster_tol, opts.multiple_tol) if g.trim().degree else []
    edge_tol = 1e-9
    mult_at = {1.0: 0, -1.0: 0}
    candidates = []
    for v, m in g_roots:
        if abs(v - 1.0) <= edge_tol:
            mult_at[1.0] = m
        elif abs(v + 1.0) <= edge_tol:
            mult_at[-1.0] = m
        elif -1.0 < v < 1.0:
            candidates.append((math.acos(v), m))
    candidates.append((0.0, 1 + 2 * mult_at[1.0]))
    candidates.append((math.pi, 1 + 2 * mult_at[-1.0]))
    gains, merged = _merge(tf, _accept(tf, candidates, "discrete", opts), "discrete", opts)
    if _report is not None and merged:
        _report.add("near_coincident_gains_merged")
    return gains


def critical_gains(tf: TransferFraction, opts: AnalysisOptions = DEFAULT_OPTIONS, *, _report=None):
    if tf.domain == "continuous":
        return continuous_critical_gains(tf, opts, _report=_report)
    return discrete_critical_gains(tf, opts, _report=_report)


# -- classification ---------------------------------------------------------


def _representatives(ks: Sequence[float]):
    if not ks:
        return [(-math.inf, math.inf, 0.0)]
    span = ks[-1] - ks[0]
    out = [(-math.inf, ks[0], ks[0] - (1.0 + span))]
    for lo, hi in zip(ks[:-1], ks[1:]):
        out.append((lo, hi, 0.5 * (lo + hi)))
    out.append((ks[-1], math.inf, ks[-1] + (1.0 + span)))
    return out


def classify_intervals(
    tf: TransferFraction, gains: Sequence[CriticalGain], eps: float = EPS
) -> list[IntervalReport]:
    """Sample each open interval between consecutive gains once.

    ``unstable_count`` counts roots that are not strictly stable at the
    representative gain (ideally only strictly unstable roots occur there).
    """
    ks = [g.k for g in gains]
    reports = []
    for lo, hi, rep in _representatives(ks):
        v = verdict(closed_loop_poly(tf, rep), tf.domain, eps)
        reports.append(
            IntervalReport(
                lo=lo,
                hi=hi,
                unstable_count=v.unstable_count + v.marginal_count,
                stabilizing=v.stable,
                representative_k=rep,
            )
        )
    return reports


class _Flags:
    def __init__(self):
        self.items: list[str] = []

    def add(self, flag: str):
        if flag not in self.items:
            self.items.append(flag)


def _fallback(tf: TransferFraction, opts: AnalysisOptions, flags: _Flags):
    """Oracle-only classification for families with a continuum of
    boundary crossings."""
    flags.add("degraded_oracle_fallback")
    d, r = tf.den.coeffs, tf.num.coeffs
    radius = 10.0 * (1.0 + np.max(np.abs(d)) / np.max(np.abs(r)))
    grid = _oracle.grid_classify(tf, -radius, radius, opts.grid_count, eps=opts.eps)
    step = grid.k_grid[1] - grid.k_grid[0]
    change = np.flatnonzero(np.diff(grid.unstable_counts) != 0)
    ks = [float(grid.k_grid[i] + 0.5 * step) for i in change]
    gains = [CriticalGain(k, (), False) for k in ks]
    return gains, classify_intervals(tf, gains, opts.eps)


def _sign_pattern_mixed(num: RealPoly) -> bool:
    c = num.coeffs
    scale = np.max(np.abs(c))
    nz = c[np.abs(c) > 1e-12 * scale]
    return bool(np.any(nz > 0) and np.any(nz < 0))


def analyze(system, options: AnalysisOptions | None = None) -> AnalysisReport:
    """Full gain-axis decomposition for a minimal system or a transfer family.

    Raises :class:`~stabgain.lti.NonMinimal` for non-minimal state-space
    input and :class:`EmptyStabilizingSet` when ``den`` and ``num`` share a
    boundary root.  A boundary polynomial that vanishes identically falls
    back to grid classification and sets ``degraded``.
    """
    opts = options or DEFAULT_OPTIONS
    tf = to_transfer(system) if isinstance(system, StateSpaceSiso) else system
    _check_numerator(tf)
    flags = _Flags()
    degraded = False
    try:
        gains = critical_gains(tf, opts, _report=flags)
        intervals = classify_intervals(tf, gains, opts.eps)
    except BoundaryPole as exc:
        raise EmptyStabilizingSet(str(exc)) from exc
    except (PhiIdenticallyZero, GIdenticallyZero):
        degraded = True
        gains, intervals = _fallback(tf, opts, flags)

    n = tf.n
    components = sum(iv.stabilizing for iv in intervals)
    bound = math.ceil(n / 2)
    left, right = intervals[0].stabilizing, intervals[-1].stabilizing
    unbounded = {(False, False): "none", (True, False): "left", (False, True): "right", (True, True): "both"}[
        (left, right)
    ]

    if any(g.tangent for g in gains):
        flags.add("tangent_gain")
    for g, lo_iv, hi_iv in zip(gains, intervals[:-1], intervals[1:]):
        if lo_iv.stabilizing and hi_iv.stabilizing and not g.tangent:
            flags.add("tangency_mismatch")
        if g.tangent and lo_iv.unstable_count != hi_iv.unstable_count:
            flags.add("tangency_mismatch")
    adjacent_stable = any(a.stabilizing and b.stabilizing for a, b in zip(intervals[:-1], intervals[1:]))
    if not adjacent_stable and not any(g.tangent for g in gains):
        flags.add("interlacing")
    if tf.domain == "continuous":
        if _sign_pattern_mixed(tf.num):
            flags.add("sign_pattern_mixed")
            if unbounded != "none":
                flags.add("sign_pattern_violation")
        if unbounded == "both":
            flags.add("both_unbounded_stabilizing")
    elif unbounded != "none":
        flags.add("unbounded_discrete_stabilizing")
    if components > bound:
        flags.add("component_bound_violated")

    return AnalysisReport(
        domain=tf.domain,
        n=n,
        critical_gains=tuple(gains),
        intervals=tuple(intervals),
        num_stabilizing_components=components,
        bound=bound,
        bound_satisfied=components <= bound,
        unbounded_stabilizing=unbounded,
        flags=tuple(flags.items),
        degraded=degraded,
        tf=tf,
    )
