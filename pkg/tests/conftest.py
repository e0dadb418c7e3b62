import numpy as np
import pytest

from stabgain.lti import StateSpaceSiso, TransferFraction

WALK_DEN = [625919 / 4800000, 1.21, 0.825, 1.0]
WALK_NUM = [12.5, 7.5, 1.0]
REMARK_DEN = [0.133, 1.125, 0.625, 1.0]
DISC_DEN = [-0.9217272705, 2.83, -2.909, 1.0]
DISC_NUM = [0.06229, -0.1846, 0.1343]
EX3_DEN = [0.0, 0.0, 0.0, 0.0, 1.0]
EX3_NUM = [0.5184, -2.448, 4.33, -3.4]


@pytest.fixture
def walk_tf():
    return TransferFraction.from_coeffs(WALK_DEN, WALK_NUM, "continuous")


@pytest.fixture
def remark_sys():
    A = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-0.133, -1.125, -0.625]])
    return StateSpaceSiso(A, [0.0, 0.0, 1.0], [12.5, 7.5, 1.0], "continuous")


@pytest.fixture
def disc_tf():
    return TransferFraction.from_coeffs(DISC_DEN, DISC_NUM, "discrete")


@pytest.fixture
def ex3_tf():
    return TransferFraction.from_coeffs(EX3_DEN, EX3_NUM, "discrete")
