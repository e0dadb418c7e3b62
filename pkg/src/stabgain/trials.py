"""Randomized property suite: analyzer against oracle on random systems."""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .gain_intervals import AnalysisOptions, AnalysisReport, analyze, boundary_point, gain_at, phi_poly
from .lti import closed_loop_poly, to_transfer
from .oracle import default_grid_range, grid_classify, random_minimal_system
from .poly import evaluate
from .stability import (
    DegreeDrop,
    batch_unstable_counts,
    bilinear_to_hurwitz,
    hurwitz_coefficients_positive,
    routh_hurwitz_stable,
    verdict,
    vieta_bound_ok,
)

__all__ = ["TrialResult", "TrialSummary", "trial_seed", "run_trial", "check_report", "run_trials"]

GRID_COUNT = 10001
GAIN_EXCLUSION = 1e-4
WITNESS_TOL = 1e-6
COLLAPSE_TOL = 1e-9
ODD_TOL = 1e-9


@dataclass
class TrialResult:
    n: int
    domain: str
    seed: int
    components: int = 0
    violations: list[str] = field(default_factory=list)
    interlacing: bool = False


@dataclass
class TrialSummary:
    results: list[TrialResult]

    @property
    def failures(self) -> list[TrialResult]:
        return [r for r in self.results if r.violations]

    @property
    def ok(self) -> bool:
        return not self.failures

    def histogram(self) -> dict[int, Counter]:
        hist: dict[int, Counter] = {}
        for r in self.results:
            hist.setdefault(r.n, Counter())[r.components] += 1
        return hist

    def interlacing_fraction(self) -> float:
        if not self.results:
            return 1.0
        return sum(r.interlacing for r in self.results) / len(self.results)


def trial_seed(base_seed: int, n: int, index: int, domain: str) -> int:
    """Independent, reproducible integer seed for one trial."""
    ss = np.random.SeedSequence([base_seed, n, index, 0 if domain == "continuous" else 1])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _oracle_agreement(report: AnalysisReport, grid_count: int, eps: float) -> bool:
    tf = report.tf
    ks = np.array([g.k for g in report.critical_gains])
    lo, hi = default_grid_range(tf, ks)
    grid = grid_classify(tf, lo, hi, grid_count, eps)
    if ks.size:
        near = np.min(np.abs(grid.k_grid[:, None] - ks[None, :]), axis=1) <= GAIN_EXCLUSION * (1 + np.abs(ks).max())
    else:
        near = np.zeros(grid.k_grid.size, dtype=bool)
    idx = np.searchsorted(ks, grid.k_grid)
    predicted = np.array([report.intervals[i].stabilizing for i in idx])
    return bool(np.all((predicted == grid.stable_mask) | near))


def check_report(report: AnalysisReport, rng: np.random.Generator, grid_count: int = GRID_COUNT, eps: float = 1e-9):
    """All per-system properties; returns the list of violated ones."""
    tf = report.tf
    n, domain = report.n, report.domain
    bad = []
    if report.num_stabilizing_components > math.ceil(n / 2):
        bad.append("component_bound")
    if n == 2 and report.num_stabilizing_components > 1:
        bad.append("n2_single_interval")
    if len(report.critical_gains) > (n if domain == "continuous" else n + 1):
        bad.append("gain_count")
    if report.degraded:
        bad.append("degraded")
    if "tangency_mismatch" in report.flags:
        bad.append("tangency_mismatch")

    if domain == "continuous":
        phi = phi_poly(tf).coeffs
        if np.any(np.abs(phi[0::2]) > ODD_TOL * np.max(np.abs(phi))):
            bad.append("phi_oddness")
        if report.unbounded_stabilizing == "both":
            bad.append("both_unbounded_stabilizing")
    elif report.intervals[0].stabilizing or report.intervals[-1].stabilizing:
        bad.append("discrete_unbounded_stabilizing")

    for g in report.critical_gains:
        for br in g.boundary_roots:
            lam = boundary_point(br.param, domain)
            if abs(gain_at(tf, lam.conjugate()) - g.k) > COLLAPSE_TOL * (1 + abs(g.k)):
                bad.append("conjugate_collapse")
            p = closed_loop_poly(tf, g.k)
            scale = float(np.sum(np.abs(p.coeffs) * abs(lam) ** np.arange(p.coeffs.size)))
            if abs(complex(evaluate(p, lam))) > WITNESS_TOL * (1 + scale):
                bad.append("boundary_witness")

    for iv in report.intervals:
        p = closed_loop_poly(tf, iv.representative_k)
        v = verdict(p, domain, eps)
        try:
            alg = routh_hurwitz_stable(p if domain == "continuous" else bilinear_to_hurwitz(p))
            if alg != v.stable:
                bad.append("three_way_verdict")
        except DegreeDrop:
            pass
        if v.stable:
            if domain == "discrete" and not vieta_bound_ok(p):
                bad.append("vieta_bound")
            if domain == "continuous" and not hurwitz_coefficients_positive(p):
                bad.append("hurwitz_positivity")
        # unstable count constant on the interval
        if math.isfinite(iv.lo) and math.isfinite(iv.hi):
            a, b = iv.lo, iv.hi
        elif math.isfinite(iv.hi):
            a, b = iv.representative_k, iv.hi
        elif math.isfinite(iv.lo):
            a, b = iv.lo, iv.representative_k
        else:
            a, b = iv.representative_k - 1.0, iv.representative_k + 1.0
        w = b - a
        ks = rng.uniform(a + 0.01 * w, b - 0.01 * w, size=5)
        coeffs = tf.den.coeffs[None, :] + ks[:, None] * np.append(tf.num.coeffs, 0.0)[None, :]
        _, counts = batch_unstable_counts(coeffs, domain, eps, include_marginal=True)
        if np.any(counts != iv.unstable_count):
            bad.append("count_constancy")

    if not _oracle_agreement(report, grid_count, eps):
        bad.append("oracle_agreement")
    return sorted(set(bad))


def run_trial(
    n: int, domain: str, seed: int, options: AnalysisOptions | None = None, grid_count: int = GRID_COUNT
) -> TrialResult:
    result = TrialResult(n, domain, seed)
    try:
        sys = random_minimal_system(n, domain, seed)
        report = analyze(to_transfer(sys), options)
    except Exception as exc:  # any crash is a violation for this seed
        result.violations.append(f"error:{type(exc).__name__}")
        return result
    result.components = report.num_stabilizing_components
    result.interlacing = "interlacing" in report.flags
    eps = (options or AnalysisOptions()).eps
    result.violations = check_report(report, np.random.default_rng(seed), grid_count, eps)
    return result


def _run_one(args):
    return run_trial(*args)


def run_trials(
    ns,
    count: int,
    domains=("continuous", "discrete"),
    seed: int = 0,
    options: AnalysisOptions | None = None,
    workers: int = 1,
    grid_count: int = GRID_COUNT,
) -> TrialSummary:
    """``count`` trials for every ``n`` in ``ns`` and every domain."""
    if isinstance(domains, str):
        domains = (domains,)
    jobs = [
        (n, d, trial_seed(seed, n, i, d), options, grid_count)
        for d in domains
        for n in ns
        for i in range(count)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=16))
    else:
        results = [_run_one(j) for j in jobs]
    return TrialSummary(results)
