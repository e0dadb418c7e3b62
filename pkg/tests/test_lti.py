import numpy as np
import pytest

from stabgain.lti import (
    ComplexTargets,
    NonMinimal,
    StateSpaceSiso,
    TransferFraction,
    closed_loop_poly,
    companion_realization,
    is_minimal,
    place_poles,
    to_canonical,
    to_transfer,
)
from stabgain.oracle import random_minimal_system


def test_example3_transfer():
    A = np.eye(4, k=1)
    sys = StateSpaceSiso(A, [0, 0, 0, 1], [0.5184, -2.448, 4.33, -3.4], "discrete")
    tf = to_transfer(sys)
    np.testing.assert_allclose(tf.den.coeffs, [0, 0, 0, 0, 1], atol=1e-15)
    np.testing.assert_allclose(tf.num.coeffs, [0.5184, -2.448, 4.33, -3.4])


def test_remark_transfer(remark_sys):
    tf = to_transfer(remark_sys)
    np.testing.assert_allclose(tf.den.coeffs, [0.133, 1.125, 0.625, 1.0])
    np.testing.assert_allclose(tf.num.coeffs, [12.5, 7.5, 1.0])


@pytest.mark.parametrize("seed", range(10))
def test_closed_loop_identity(seed):
    sys = random_minimal_system(4, "continuous", seed)
    tf = to_transfer(sys)
    for k in (-2.0, 0.3, 5.0):
        expected = np.poly(sys.closed_loop_matrix(k))[::-1]
        np.testing.assert_allclose(closed_loop_poly(tf, k).coeffs, expected, rtol=1e-8, atol=1e-8)


def test_non_minimal():
    sys = StateSpaceSiso(np.zeros((2, 2)), [1.0, 0.0], [1.0, 0.0])
    assert not is_minimal(sys)
    with pytest.raises(NonMinimal, match="system is not minimal"):
        to_transfer(sys)


def test_fraction_requires_monic():
    with pytest.raises(ValueError):
        TransferFraction([1.0, 2.0], [1.0])
    tf = TransferFraction.from_coeffs([2.0, 4.0], [2.0])
    np.testing.assert_allclose(tf.den.coeffs, [0.5, 1.0])
    np.testing.assert_allclose(tf.num.coeffs, [0.5])


def test_fraction_rejects_proper_num():
    with pytest.raises(ValueError):
        TransferFraction.from_coeffs([1.0, 1.0], [1.0, 1.0])


def test_companion_realization_round_trip(walk_tf):
    tf2 = to_transfer(companion_realization(walk_tf))
    np.testing.assert_allclose(tf2.den.coeffs, walk_tf.den.coeffs)
    np.testing.assert_allclose(tf2.num.coeffs, walk_tf.num.coeffs)


def test_canonical_form_structure(remark_sys):
    sys = StateSpaceSiso(np.array([[1.0, 2.0, 0.0], [0.0, -1.0, 1.0], [1.0, 0.0, 0.5]]), [1.0, 0.0, 1.0], [1, 1, 0])
    cf = to_canonical(sys)
    n = 3
    np.testing.assert_allclose(cf.A_flat[:-1], np.eye(n, k=1)[:-1], atol=1e-10)
    np.testing.assert_allclose(cf.b_flat, [0, 0, 1], atol=1e-10)
    tf = to_transfer(sys)
    np.testing.assert_allclose(cf.char_coeffs, tf.den.coeffs[:n], atol=1e-10)
    np.testing.assert_allclose(cf.c_tilde, tf.num.coeffs, atol=1e-10)


def test_place_poles():
    sys = random_minimal_system(3, "continuous", 5)
    cf = to_canonical(sys)
    targets = [-1.0, -2.0 + 1j, -2.0 - 1j]
    g = place_poles(cf, targets)
    ev = np.linalg.eigvals(sys.A - np.outer(sys.b, g @ cf.T))
    np.testing.assert_allclose(np.sort_complex(ev), np.sort_complex(targets), atol=1e-8)


def test_place_poles_complex_targets():
    cf = to_canonical(random_minimal_system(2, "continuous", 1))
    with pytest.raises(ComplexTargets):
        place_poles(cf, [-1 + 1j, -2.0])


def test_shape_validation():
    with pytest.raises(ValueError):
        StateSpaceSiso(np.eye(2), [1.0], [1.0, 0.0])
    with pytest.raises(ValueError):
        StateSpaceSiso(np.eye(2), [1.0, 0.0], [1.0, 0.0], "hybrid")
