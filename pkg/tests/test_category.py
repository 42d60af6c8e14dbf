import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fibwrt import category
from fibwrt.category import PHI, D, f_matrix, f_symbol, fusion_allowed, s_block, s_symbol, twist_phase

labels = st.sampled_from([0, 1])


def test_fusion_table():
    allowed = {t for t in itertools.product((0, 1), repeat=3) if fusion_allowed(*t)}
    assert allowed == {(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0), (1, 1, 1)}


@given(labels, labels, labels)
def test_fusion_symmetric(a, b, c):
    assert len({fusion_allowed(*p) for p in itertools.permutations((a, b, c))}) == 1


def test_golden_relation():
    assert PHI**2 == pytest.approx(PHI + 1)
    assert D == pytest.approx(math.sqrt(1 + PHI**2))


def test_f_all_tau_block():
    f = f_matrix(1, 1, 1, 1)
    expected = np.array([[1 / PHI, PHI**-0.5], [PHI**-0.5, -1 / PHI]])
    np.testing.assert_allclose(f, expected, atol=1e-15)
    # Real symmetric orthogonal: its own inverse.
    np.testing.assert_allclose(f @ f, np.eye(2), atol=1e-14)


def test_f_symbol_admissibility():
    for i, j, m, k, l, n in itertools.product((0, 1), repeat=6):
        admissible = fusion_allowed(i, j, m) and fusion_allowed(m, k, l) and fusion_allowed(j, k, n) and fusion_allowed(i, n, l)
        val = f_symbol(i, j, m, k, l, n)
        if not admissible:
            assert val == 0.0
        elif (i, j, k, l) != (1, 1, 1, 1):
            assert val == 1.0


def test_pentagon():
    assert category.pentagon_residual() < 1e-10


def test_s_table_values():
    omega = cmath.exp(4j * math.pi / 5)
    assert s_symbol(0, 0, 0) == pytest.approx(1 / D)
    assert s_symbol(0, 1, 0) == pytest.approx(PHI / D)
    assert s_symbol(0, 1, 1) == pytest.approx((1 + PHI * omega) / D)
    assert s_symbol(1, 1, 1) == pytest.approx(math.sqrt(PHI) * (1 - omega) / D)
    assert s_symbol(1, 0, 0) == 0


def test_tabulated_s_is_not_unitary():
    # Evidence for using a different handle-move block in the representation.
    s = s_block(0)
    assert np.linalg.norm(s.conj().T @ s - np.eye(2), ord=2) > 0.5
    # The stem-1 block is a single entry of modulus != 1.
    assert abs(abs(s_symbol(1, 1, 1)) - 1) > 0.1


def test_twist_phases():
    assert twist_phase(0) == 1
    assert twist_phase(1) == pytest.approx(cmath.exp(3j * math.pi / 5))
    assert twist_phase(1) ** 10 == pytest.approx(1)


@pytest.mark.parametrize("bad", [2, -1, "1", None])
def test_bad_labels(bad):
    with pytest.raises(ValueError):
        twist_phase(bad)
