import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stabgain.gain_intervals import (
    AnalysisOptions,
    DegenerateNumerator,
    EmptyStabilizingSet,
    NotOdd,
    PhiIdenticallyZero,
    analyze,
    boundary_point,
    chebyshev_u,
    classify_intervals,
    continuous_critical_gains,
    discrete_critical_gains,
    g_poly_discrete,
    gain_at,
    odd_part_compress,
    phi_poly,
    tangency_continuous,
    tangency_discrete,
)
from stabgain.lti import TransferFraction, closed_loop_poly, to_transfer
from stabgain.oracle import random_minimal_system
from stabgain.poly import RealPoly, evaluate, real_roots

K1 = -625919 / 6e7
K2 = 2041 / 6000
BETA2 = math.sqrt(6018) / 40


def tf(den, num, domain="continuous"):
    return TransferFraction.from_coeffs(den, num, domain)


def test_phi_walkthrough(walk_tf):
    phi = phi_poly(walk_tf)
    np.testing.assert_allclose(phi.coeffs, [0, 14.14700156, 0, -7.5225, 0, 1], atol=1e-8)


def test_phi_small_cases():
    assert phi_poly(tf([0, 0, 1], [1])).trim().is_zero
    roots = real_roots(phi_poly(tf([1, 1, 1], [0, 1])))
    assert [r for r, _ in roots] == pytest.approx([-1.0, 0.0, 1.0], abs=1e-12)


def test_degenerate_numerator():
    with pytest.raises(DegenerateNumerator):
        phi_poly(tf([1, 1], [0]))


def test_odd_part_compress():
    ups = odd_part_compress([0, 14.14700156, 0, -7.5225, 0, 1])
    np.testing.assert_allclose(ups.coeffs, [14.14700156, -7.5225, 1])
    w = real_roots(ups)
    assert w == [(pytest.approx(6018 / 1600, rel=1e-7), 2)]
    assert odd_part_compress([0, 1]).coeffs.tolist() == [1]
    assert odd_part_compress([0, -1, 0, 1]).coeffs.tolist() == [-1, 1]
    with pytest.raises(NotOdd):
        odd_part_compress([1e-3, 1, 0, 1])


def test_chebyshev_u_identity():
    theta = np.linspace(0.1, 3.0, 7)
    for m in range(1, 7):
        u = np.polynomial.polynomial.polyval(np.cos(theta), chebyshev_u(m - 1))
        np.testing.assert_allclose(u * np.sin(theta), np.sin(m * theta), atol=1e-12)


def test_g_small_cases():
    np.testing.assert_allclose(g_poly_discrete(tf([0, 0, 1], [1], "discrete")).coeffs, [0, 2])
    np.testing.assert_allclose(g_poly_discrete(tf([0, 1], [1], "discrete")).coeffs, [1])


def test_g_walkthrough(disc_tf):
    g = g_poly_discrete(disc_tf)
    printed = np.array([0.2350722459, -0.4840272752, 0.24916])
    np.testing.assert_allclose(g.coeffs / g.leading, printed / printed[-1], rtol=1e-6)


@pytest.mark.parametrize("seed", range(5))
def test_g_matches_direct_evaluation(seed):
    t = to_transfer(random_minimal_system(4, "discrete", seed))
    g = g_poly_discrete(t)
    theta = np.linspace(0.05, 3.1, 9)
    lam = np.exp(1j * theta)
    direct = np.imag(evaluate(t.den, lam) * np.conj(evaluate(t.num, lam)))
    via_g = np.sin(theta) * evaluate(g, np.cos(theta))
    ratio = direct / via_g
    np.testing.assert_allclose(ratio, ratio[0], rtol=1e-8)


def test_continuous_gains_walkthrough(walk_tf):
    gains = continuous_critical_gains(walk_tf)
    assert [g.k for g in gains] == pytest.approx([K1, K2], rel=1e-9)
    assert gains[0].boundary_roots[0].param == 0.0
    assert not gains[0].tangent
    br = gains[1].boundary_roots[0]
    assert br.param == pytest.approx(BETA2, rel=1e-7)
    assert br.multiplicity == 2
    assert gains[1].tangent


def test_first_order_gain():
    gains = continuous_critical_gains(tf([1, 1], [1]))
    assert [g.k for g in gains] == [pytest.approx(-1.0)]


def test_tangency_continuous(walk_tf, remark_sys):
    assert tangency_continuous(walk_tf, K2, BETA2)
    assert not tangency_continuous(walk_tf, K1, 0.0)
    rtf = to_transfer(remark_sys)
    mid = continuous_critical_gains(rtf)[1]
    assert not tangency_continuous(rtf, mid.k, mid.boundary_roots[0].param)


def test_discrete_gains_walkthrough(disc_tf):
    gains = discrete_critical_gains(disc_tf)
    ks = [g.k for g in gains]
    assert len(ks) == 3
    assert ks[1] == pytest.approx(0.6198635016, rel=1e-4)
    assert ks[2] == pytest.approx(20.09687366, rel=1e-5)
    assert gains[1].tangent
    assert gains[1].boundary_roots[0].multiplicity == 2
    assert math.cos(gains[1].boundary_roots[0].param) == pytest.approx(0.9713, abs=1e-4)
    assert gains[2].boundary_roots[0].param == pytest.approx(math.pi)


def test_discrete_k1_matches_printed_value(disc_tf):
    # the gain placing a root at 1 agrees with the printed k1 to the printed precision
    k1 = discrete_critical_gains(disc_tf)[0].k
    assert k1 == pytest.approx(0.06065638, rel=1e-6)


def test_tangency_discrete(disc_tf):
    gains = discrete_critical_gains(disc_tf)
    assert tangency_discrete(disc_tf, gains[1].k, math.acos(0.9713181794))
    assert not tangency_discrete(disc_tf, gains[2].k, math.pi)
    assert not tangency_discrete(tf([-0.5, 1], [1], "discrete"), -0.5, 0.0)


def test_discrete_first_order():
    t = tf([-0.5, 1], [1], "discrete")
    gains = discrete_critical_gains(t)
    assert [g.k for g in gains] == pytest.approx([-0.5, 1.5])
    ivs = classify_intervals(t, gains)
    assert [iv.stabilizing for iv in ivs] == [False, True, False]
    assert [iv.unstable_count for iv in ivs] == [1, 0, 1]


def test_classify_walkthrough(walk_tf):
    ivs = classify_intervals(walk_tf, continuous_critical_gains(walk_tf))
    assert [iv.stabilizing for iv in ivs] == [False, True, True]
    assert ivs[0].lo == -math.inf and ivs[-1].hi == math.inf
    for a, b in zip(ivs[:-1], ivs[1:]):
        assert a.hi == b.lo
    for iv in ivs:
        assert iv.stabilizing == (iv.unstable_count == 0)
        assert iv.lo < iv.representative_k < iv.hi


def test_classify_no_gains():
    ivs = classify_intervals(tf([1, 1], [1]), [])
    assert len(ivs) == 1
    assert ivs[0].representative_k == 0.0


def test_analyze_examples(walk_tf, disc_tf, ex3_tf):
    r = analyze(walk_tf)
    assert r.num_stabilizing_components == 2 == r.bound
    assert r.critical_gains[1].tangent
    assert "tangent_gain" in r.flags
    r = analyze(disc_tf)
    assert r.num_stabilizing_components == 2
    assert r.unbounded_stabilizing == "none"
    r = analyze(ex3_tf)
    assert r.num_stabilizing_components == 2
    assert not r.intervals[0].stabilizing and not r.intervals[-1].stabilizing
    assert "sign_pattern_mixed" not in r.flags


def test_analyze_first_order():
    r = analyze(tf([1, 1], [1]))
    assert r.num_stabilizing_components == 1
    assert r.unbounded_stabilizing == "right"
    stab = r.stabilizing_intervals()[0]
    assert stab.lo == pytest.approx(-1.0) and stab.hi == math.inf


def test_sign_pattern_advisory():
    r = analyze(tf([2, 3, 1], [1, -1]))
    assert "sign_pattern_mixed" in r.flags
    assert r.unbounded_stabilizing == "none"


def test_degenerate_fallback():
    t = tf([0, 0, 1], [1])
    with pytest.raises(PhiIdenticallyZero):
        continuous_critical_gains(t)
    r = analyze(t)
    assert r.degraded
    assert "degraded_oracle_fallback" in r.flags
    assert r.num_stabilizing_components == 0


def test_shared_boundary_root():
    # den and num share the roots +-i
    den = np.polynomial.polynomial.polyfromroots([1j, -1j, -1]).real
    num = np.polynomial.polynomial.polyfromroots([1j, -1j]).real
    with pytest.raises(EmptyStabilizingSet):
        analyze(tf(den, num))


def test_analyze_rejects_non_minimal():
    from stabgain.lti import NonMinimal, StateSpaceSiso

    with pytest.raises(NonMinimal):
        analyze(StateSpaceSiso(np.zeros((2, 2)), [1, 0], [1, 0]))


def test_huge_dedup_merges():
    r = analyze(TransferFraction.from_coeffs([0.133, 1.125, 0.625, 1.0], [12.5, 7.5, 1.0]), AnalysisOptions(dedup_tol=10.0))
    assert len(r.critical_gains) == 1
    assert "near_coincident_gains_merged" in r.flags


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.sampled_from(["continuous", "discrete"]), st.integers(0, 2**31))
def test_report_invariants(n, domain, seed):
    t = to_transfer(random_minimal_system(n, domain, seed))
    r = analyze(t)
    assert r.num_stabilizing_components <= math.ceil(n / 2)
    ks = [g.k for g in r.critical_gains]
    assert ks == sorted(ks)
    for g in r.critical_gains:
        for br in g.boundary_roots:
            lam = boundary_point(br.param, domain)
            p = closed_loop_poly(t, g.k)
            assert abs(complex(evaluate(p, lam))) <= 1e-6 * (1 + np.sum(np.abs(p.coeffs)))
            assert gain_at(t, lam.conjugate()) == pytest.approx(g.k, rel=1e-9, abs=1e-9)
    if domain == "discrete":
        assert r.unbounded_stabilizing == "none"
    else:
        assert r.unbounded_stabilizing != "both"
        phi = phi_poly(t).coeffs
        assert np.all(np.abs(phi[0::2]) <= 1e-9 * np.abs(phi).max())
    for iv in r.intervals:
        assert iv.stabilizing == (iv.unstable_count == 0)


@pytest.mark.parametrize(
    "num, unbounded",
    [
        ([1.0, 2.0, 3.0, 1.0], True),  # c3 c2 c1 = 6 > c3^2 c0 = 1
        ([5.0, 1.0, 1.0, 1.0], False),  # 1 < 5
    ],
)
def test_positive_numerator_unboundedness(num, unbounded):
    r = analyze(tf([1.0, 4.0, 6.0, 4.0, 1.0], num))
    assert (r.unbounded_stabilizing == "right") == unbounded
    if unbounded:
        assert r.intervals[-1].stabilizing
