import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fibwrt import representation as rep
from fibwrt.category import PHI, twist_phase
from fibwrt.checks import intersecting_pairs
from fibwrt.representation import Family, GeneratorId, HandleConvention, MCGWord, wrt_invariant

THETA = cmath.exp(3j * math.pi / 5)


def test_generator_families():
    fam = [GeneratorId(3, k).family for k in range(1, 9)]
    assert fam == [Family.MERIDIAN] * 3 + [Family.CHAIN] * 2 + [Family.THROUGH] * 3
    assert [GeneratorId(3, k).cut_edge for k in (1, 2, 3, 4, 5)] == [1, 3, 6, 2, 5]


@pytest.mark.parametrize("index", [0, 6, -1])
def test_bad_generator_index(index):
    with pytest.raises(ValueError):
        GeneratorId(2, index)


def test_genus_two_diagonals():
    # Labelings (L, H, R): 000, 001, 100, 101, 111.
    np.testing.assert_allclose(np.diag(rep.generator_matrix(GeneratorId(2, 1))), [1, 1, THETA, THETA, THETA])
    np.testing.assert_allclose(np.diag(rep.generator_matrix(GeneratorId(2, 3))), [1, 1, 1, 1, THETA])
    np.testing.assert_allclose(np.diag(rep.generator_matrix(GeneratorId(2, 2))), [1, THETA, 1, THETA, THETA])


def test_wrt_anchors():
    assert wrt_invariant(MCGWord(2)) == (5, 1)
    assert wrt_invariant(MCGWord.from_pairs(2, [(3, 1)]))[0] == pytest.approx(4 + THETA, abs=1e-12)
    assert wrt_invariant(MCGWord.from_pairs(2, [(1, 1)]))[0] == pytest.approx(2 + 3 * THETA, abs=1e-12)


def test_end_handle_block_oracle():
    # Left through-handle twist at genus 2, by hand.  With h = 0 the loop
    # label is free and the twist is F diag(1, theta) F for the golden block
    # F; with h = 1 the loop must be 1 and the twist is the phase theta.
    f = np.array([[1 / PHI, PHI**-0.5], [PHI**-0.5, -1 / PHI]])
    local = f @ np.diag([1, THETA]) @ f
    m = rep.generator_matrix(GeneratorId(2, 4))
    labs = rep.representation(2).labelings
    for r in (0, 1):
        idx = [labs.index((0, 0, r)), labs.index((1, 0, r))]
        np.testing.assert_allclose(m[np.ix_(idx, idx)], local, atol=1e-12)
    k = labs.index((1, 1, 1))
    assert m[k, k] == pytest.approx(THETA)


@pytest.mark.parametrize("g", [2, 3, 4])
def test_unitary_and_spectra(g):
    for k in range(1, 3 * g):
        m = rep.generator_matrix(GeneratorId(g, k))
        assert rep.unitarity_error(m) < 1e-10
        eig = np.linalg.eigvals(m)
        assert all(min(abs(e - 1), abs(e - THETA)) < 1e-9 for e in eig)


@pytest.mark.parametrize("g", [2, 3, 4])
def test_through_twist_conjugate_to_meridian(g):
    # Both curves are non-separating, so their images share a spectrum.
    for h in range(1, g + 1):
        a = np.sort_complex(np.round(np.linalg.eigvals(rep.generator_matrix(GeneratorId(g, h))), 9))
        b = np.sort_complex(np.round(np.linalg.eigvals(rep.generator_matrix(GeneratorId(g, 2 * g - 1 + h))), 9))
        np.testing.assert_allclose(a, b, atol=1e-8)


@pytest.mark.parametrize("g", [2, 3, 4])
def test_relations(g):
    mats = {k: rep.generator_matrix(GeneratorId(g, k)) for k in range(1, 3 * g)}
    meet = {frozenset(p) for p in intersecting_pairs(g)}
    for a in mats:
        for b in mats:
            if a >= b:
                continue
            if frozenset((a, b)) in meet:
                assert rep.braid_defect(mats[a], mats[b]) < 1e-8
                assert rep.commutator_norm(mats[a], mats[b]) > 0.1
            else:
                assert rep.commutator_norm(mats[a], mats[b]) < 1e-10


def test_convention_evidence():
    # Only the golden handle block yields unitary generators satisfying the braid relation.
    m = lambda conv, k: rep.generator_matrix(GeneratorId(2, k), conv)
    assert rep.unitarity_error(m(HandleConvention.TABULATED, 4)) > 0.1
    std = HandleConvention.STANDARD
    assert rep.unitarity_error(m(std, 4)) < 1e-10
    assert rep.braid_defect(m(std, 1), m(std, 4)) > 0.1
    gold = HandleConvention.GOLDEN
    assert rep.braid_defect(m(gold, 1), m(gold, 4)) < 1e-12


def test_word_inverse_and_powers():
    rng = np.random.default_rng(3)
    w = rep.random_word(3, 12, rng)
    np.testing.assert_allclose(rep.evaluate_word(w * w.inverse()), np.eye(15), atol=1e-9)
    w2 = MCGWord.from_pairs(3, [(7, -3)])
    g7 = rep.generator_matrix(GeneratorId(3, 7))
    np.testing.assert_allclose(rep.evaluate_word(w2) @ np.linalg.matrix_power(g7, 3), np.eye(15), atol=1e-12)


def test_word_order_left_to_right():
    a, b = rep.generator_matrix(GeneratorId(2, 1)), rep.generator_matrix(GeneratorId(2, 4))
    np.testing.assert_allclose(rep.evaluate_word(MCGWord.from_pairs(2, [(1, 1), (4, 1)])), a @ b)


def test_word_validation():
    with pytest.raises(ValueError):
        MCGWord.from_pairs(2, [(1, 0)])
    with pytest.raises(ValueError):
        MCGWord(2) * MCGWord(3)
    assert str(MCGWord(2)) == "identity"
    assert str(MCGWord.from_pairs(2, [(1, -2), (3, 1)])) == "T1^-2 T3"


def test_generator_cache_is_read_only():
    m = rep.generator_matrix(GeneratorId(2, 4))
    with pytest.raises(ValueError):
        m[0, 0] = 0


def test_dimension_cap():
    with pytest.raises(ValueError):
        rep.Representation(5, max_dimension=100)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 3), st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_trace_class_function(g, length, seed):
    rng = np.random.default_rng(seed)
    w = rep.random_word(g, length, rng)
    t = wrt_invariant(w)[0]
    k = int(rng.integers(0, length))
    shifted = MCGWord(g, w.letters[k:] + w.letters[:k])
    c = rep.random_word(g, 3, rng)
    assert abs(wrt_invariant(shifted)[0] - t) < 1e-9
    assert abs(wrt_invariant(c * w * c.inverse())[0] - t) < 1e-9
