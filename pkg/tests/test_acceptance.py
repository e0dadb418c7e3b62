"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from stabgain.gain_intervals import analyze
from stabgain.lti import TransferFraction, to_transfer
from stabgain.oracle import (
    asymptotic_root_check,
    default_grid_range,
    discrete_derivative_check,
    grid_classify,
    phi_derivative_check,
    random_minimal_system,
)
from stabgain.stability import bilinear_to_hurwitz, hurwitz_verdict
from stabgain.trials import run_trials

from conftest import DISC_DEN, DISC_NUM, EX3_DEN, EX3_NUM, WALK_DEN, WALK_NUM


@pytest.fixture
def report_line(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {number}] {'PASS' if ok else 'FAIL'}: {detail}")

    return emit


def timed_analyze(system):
    t0 = time.perf_counter()
    report = analyze(system)
    return report, time.perf_counter() - t0


def grid_agrees(report, count=10001):
    """Every grid run boundary lies within one step of a critical gain and
    every crossing gain inside the grid has a run boundary within one step."""
    ks = np.array([g.k for g in report.critical_gains])
    lo, hi = default_grid_range(report.tf, ks)
    grid = grid_classify(report.tf, lo, hi, count)
    step = grid.step
    bounds = grid.run_boundaries()
    ok = all(np.min(np.abs(ks - b)) <= step for b in bounds)
    for g in report.critical_gains:
        if not g.tangent and lo < g.k < hi:
            ok &= bool(bounds.size) and np.min(np.abs(bounds - g.k)) <= step
    return ok


def test_criterion_1_continuous_walkthrough(report_line):
    tf = TransferFraction.from_coeffs(WALK_DEN, WALK_NUM, "continuous")
    r, dt = timed_analyze(tf)
    ks = [g.k for g in r.critical_gains]
    k1, k2 = -625919 / 6e7, 2041 / 6000
    ok = (
        len(ks) == 2
        and math.isclose(ks[0], k1, rel_tol=1e-6)
        and math.isclose(ks[1], k2, rel_tol=1e-6)
        and [iv.stabilizing for iv in r.intervals] == [False, True, True]
        and r.critical_gains[1].tangent
        and not r.critical_gains[0].tangent
        and r.num_stabilizing_components == 2 == math.ceil(3 / 2)
        and dt < 1.0
    )
    report_line(1, ok, f"gains={ks}, components={r.num_stabilizing_components}, {dt * 1e3:.1f} ms")
    assert ok


def test_criterion_2_remark_two_components(report_line, remark_sys):
    r, dt = timed_analyze(remark_sys)
    ok = (
        r.num_stabilizing_components == 2
        and not any(g.tangent for g in r.critical_gains)
        and grid_agrees(r)
        and dt < 1.0
    )
    report_line(2, ok, f"gains={[round(g.k, 8) for g in r.critical_gains]}, components={r.num_stabilizing_components}, {dt * 1e3:.1f} ms")
    assert ok


def test_criterion_3_discrete_walkthrough(report_line):
    tf = TransferFraction.from_coeffs(DISC_DEN, DISC_NUM, "discrete")
    r, _ = timed_analyze(tf)
    gains = r.critical_gains
    tangent_hit = [g for g in gains if math.isclose(g.k, 0.6198635016, rel_tol=1e-4)]
    k3_hit = [g for g in gains if math.isclose(g.k, 20.09687366, rel_tol=1e-5)]
    ok = (
        len(tangent_hit) == 1
        and tangent_hit[0].tangent
        and len(k3_hit) == 1
        and r.num_stabilizing_components == 2
        and grid_agrees(r)
    )
    report_line(3, ok, f"gains={[g.k for g in gains]}, tangent={[g.tangent for g in gains]}, components={r.num_stabilizing_components}")
    assert ok


def test_criterion_4_example3(report_line):
    tf = TransferFraction.from_coeffs(EX3_DEN, EX3_NUM, "discrete")
    r, dt = timed_analyze(tf)
    ok = (
        r.num_stabilizing_components == 2
        and not r.intervals[0].stabilizing
        and not r.intervals[-1].stabilizing
        and dt < 1.0
    )
    report_line(4, ok, f"components={r.num_stabilizing_components}, unbounded={r.unbounded_stabilizing}, {dt * 1e3:.1f} ms")
    assert ok


def test_criterion_5_convexity_counterexample(report_line):
    a = hurwitz_verdict([24, 5, 5, 1])
    b = hurwitz_verdict([0.9, 1, 1, 1])
    c = hurwitz_verdict([12.45, 3, 3, 1])
    ok = a.stable and b.stable and not c.stable and c.unstable_count == 2
    report_line(5, ok, f"{a}; {b}; {c}")
    assert ok


def test_criterion_6_bilinear(report_line):
    q = bilinear_to_hurwitz([0, 0, 0, 0, 1]).coeffs
    ok = q.tolist() == [1, 4, 6, 4, 1] and all(float(x).is_integer() for x in q)
    report_line(6, ok, f"q = {q.tolist()} (ascending)")
    assert ok


def test_criterion_7_property_suite(report_line):
    t0 = time.perf_counter()
    summary = run_trials(range(2, 7), 500, ("continuous", "discrete"), seed=2024)
    dt = time.perf_counter() - t0
    failures = summary.failures
    hist = {n: dict(sorted(h.items())) for n, h in sorted(summary.histogram().items())}
    ok = not failures and len(summary.results) == 5000 and dt < 300
    detail = (
        f"{len(summary.results)} trials, {len(failures)} violating, {dt:.0f} s; histogram={hist}; "
        f"interlacing fraction={summary.interlacing_fraction():.4f} (reported only)"
    )
    if failures:
        detail += "; first: " + ", ".join(f"n={f.n} {f.domain} seed={f.seed} {f.violations}" for f in failures[:5])
    report_line(7, ok, detail)
    assert ok


def _multiple_root_family(rng):
    """Random family with an m-fold real root ``lam0`` of ``p(., k0)``."""
    m = int(rng.integers(2, 4))
    n = m + int(rng.integers(0, 3))
    lam0 = rng.uniform(-1.5, 1.5)
    k0 = rng.uniform(-2, 2)
    P = np.polynomial.polynomial
    h = P.polyfromroots(rng.uniform(-3, 3, n - m) + 5.0)  # keep other roots away
    p0 = P.polymul(P.polypow([-lam0, 1.0], m), h)
    num = rng.standard_normal(n)
    num[0] += 3.0 * np.sign(num[0])  # num(lam0) bounded away from zero
    while abs(P.polyval(lam0, num)) < 0.5:
        num = rng.standard_normal(n)
    den = p0 - k0 * np.append(num, 0.0)
    return TransferFraction(den, num), k0, lam0, m


def test_criterion_8_identities_and_asymptotics(report_line):
    rng = np.random.default_rng(8)
    worst_c = worst_d = 0.0
    for i in range(100):
        n = int(rng.integers(2, 7))
        tc = to_transfer(random_minimal_system(n, "continuous", 1000 + i))
        td = to_transfer(random_minimal_system(n, "discrete", 2000 + i))
        worst_c = max(worst_c, phi_derivative_check(tc, rng.uniform(-3, 3)))
        worst_d = max(worst_d, discrete_derivative_check(td, rng.uniform(0, np.pi)))
    monotone = 0
    for _ in range(20):
        tf, k0, lam0, m = _multiple_root_family(rng)
        ratios = asymptotic_root_check(tf, k0, lam0, m, (1e-3, 1e-4, 1e-5))
        monotone += bool(np.all(np.diff(ratios) < 0))
    ok = worst_c < 1e-5 and worst_d < 1e-5 and monotone == 20
    report_line(8, ok, f"max rel gap continuous={worst_c:.2e}, discrete={worst_d:.2e}; monotone asymptotics {monotone}/20")
    assert ok
