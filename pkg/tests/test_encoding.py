import itertools
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from fibwrt import encoding as enc
from fibwrt import spine
from fibwrt.category import twist_phase
from fibwrt.representation import GeneratorId, MCGWord, generator_matrix, random_word, representation, wrt_invariant


def test_round_half_up():
    assert enc.round_half_up(5, 2) == 3
    assert enc.round_half_up(7, 2) == 4
    assert enc.round_half_up(1, 3) == 0
    assert enc.round_half_up(2, 3) == 1


def _frequency(g, i, prev2, prev):
    labs = spine.enumerate_labelings(spine.standard_spine(g))
    ctx = [x for x in labs if (i < 3 or x[i - 3] == prev2) and (i < 2 or x[i - 2] == prev)]
    return Fraction(sum(1 for x in ctx if x[i - 1] == 0), len(ctx)) if ctx else None


@pytest.mark.parametrize("g,beta", [(2, 4), (3, 3), (4, 5)])
def test_thresholds_from_enumeration(g, beta):
    table = enc.thresholds(g, beta)
    for (i, (p2, p1)), t in table.thresholds.items():
        p = _frequency(g, i, p2, p1)
        if p is None:
            continue  # context never occurs in a consistent labeling
        assert table.probabilities[(i, (p2, p1))] == p
        assert abs(t - p * 2**beta) <= Fraction(1, 2)


def test_genus_two_threshold_values():
    t = enc.thresholds(2, 4)
    assert t.threshold(1, None, None) == 6  # round(16 * 2/5)
    assert t.threshold(2, None, 0) == 16
    assert t.threshold(2, None, 1) == 11  # round(16 * 2/3)
    assert t.threshold(3, 1, 0) == 8
    assert t.threshold(3, 1, 1) == 0


def test_decode_rule():
    t = enc.thresholds(2, 4)
    assert enc.decode((5, 0, 0), t) == (0, 0, 0)
    assert enc.decode((6, 11, 0), t) == (1, 1, 1)
    assert enc.decode((6, 10, 8), t) == (1, 0, 1)
    with pytest.raises(ValueError):
        enc.decode((16, 0, 0), t)
    with pytest.raises(ValueError):
        enc.decode((0, 0), t)


@pytest.mark.parametrize("g,beta", [(2, 3), (2, 5), (3, 2)])
def test_decode_total_and_preimages(g, beta):
    table = enc.thresholds(g, beta)
    n = 3 * g - 3
    counts = Counter(enc.decode(x, table) for x in itertools.product(range(2**beta), repeat=n))
    labs = spine.enumerate_labelings(spine.standard_spine(g))
    sp_ = spine.standard_spine(g)
    assert all(sp_.is_consistent(lab) for lab in counts)
    assert sum(counts.values()) == 2 ** (n * beta)
    for lab in labs:
        assert counts[lab] == enc.preimage_size(lab, table)


def test_deviation_shrinks():
    devs = [enc.preimage_deviation(2, b) for b in (4, 6, 8, 10)]
    assert all(b < a for a, b in zip(devs, devs[1:]))


def test_spine_probabilities_are_never_dyadic():
    # P(s1 = 0) = 2/5 at genus 2, so rounding always leaves a nonzero deviation.
    table = enc.thresholds(2, 4)
    dens = {p.denominator for p in table.probabilities.values()}
    assert dens == {1, 2, 3, 5}
    assert all(enc.preimage_deviation(2, b) > 0 for b in (2, 8, 12))


def test_beta_validation():
    for beta in (1, 17, 2.5):
        with pytest.raises(ValueError):
            enc.build_thresholds(2, beta)


def _logical_check(g, beta, index):
    """Each register string is either moved like the generator's column or left alone."""
    table = enc.thresholds(g, beta)
    op = enc.encoded_word_operator(MCGWord.from_pairs(g, [(index, 1)]), beta).tocsc()
    labs = representation(g).labelings
    pos = {lab: k for k, lab in enumerate(labs)}
    gen = generator_matrix(GeneratorId(g, index))
    n = 3 * g - 3
    strings = enc.full_string_set(table)
    decoded = [pos[tuple(r)] for r in strings.labels]
    idle = 0
    for col in range(op.shape[1]):
        rows = op.indices[op.indptr[col]:op.indptr[col + 1]]
        vals = op.data[op.indptr[col]:op.indptr[col + 1]]
        by_label = np.zeros(len(labs), dtype=complex)
        for r, v in zip(rows, vals):
            by_label[decoded[r]] += v
        src = decoded[col]
        if len(rows) == 1 and rows[0] == col and vals[0] == 1 and abs(gen[src, src] - 1) > 1e-12:
            idle += 1
            continue
        np.testing.assert_allclose(by_label, gen[:, src], atol=1e-12)
    return idle / op.shape[1]


@pytest.mark.parametrize("index", range(1, 6))
def test_encoded_generators_act_logically(index):
    idle = _logical_check(2, 4, index)
    assert idle < 0.25


@pytest.mark.parametrize("g,beta,index", [(2, 4, 4), (3, 2, 7), (3, 2, 6)])
def test_encoded_generators_unitary(g, beta, index):
    op = enc.encoded_word_operator(MCGWord.from_pairs(g, [(index, 1)]), beta)
    err = abs(op.conj().T @ op - sp.identity(op.shape[0])).max()
    assert err < 1e-12


def test_diagonal_word_trace_oracle():
    # Diagonal letters act by phases on the decoded label, so the encoded
    # trace is the preimage-weighted sum of phases.
    g, beta = 2, 5
    table = enc.thresholds(g, beta)
    w = MCGWord.from_pairs(g, [(1, 2), (3, -1), (2, 1)])
    expected = 0j
    for lab in spine.enumerate_labelings(spine.standard_spine(g)):
        phase = twist_phase(lab[0]) ** 2 * twist_phase(lab[1]).conjugate() * twist_phase(lab[2])
        expected += enc.preimage_size(lab, table) * phase
    expected /= 2**table.num_qubits
    assert enc.encoded_word_trace(w, beta) == pytest.approx(expected, abs=1e-14)


@settings(max_examples=12, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**31))
def test_factorized_trace_matches_full(length, seed):
    w = random_word(2, length, np.random.default_rng(seed))
    full = enc.encoded_word_operator(w, 4).diagonal().sum() / 2**12
    assert enc.encoded_word_trace(w, 4) == pytest.approx(full, abs=1e-12)


def test_factorized_trace_matches_full_genus_three():
    w = random_word(3, 4, np.random.default_rng(5))
    full = enc.encoded_word_operator(w, 2).diagonal().sum() / 2**12
    assert enc.encoded_word_trace(w, 2) == pytest.approx(full, abs=1e-12)


def test_identity_encodes_exactly():
    assert enc.encoded_word_trace(MCGWord(3), 6) == pytest.approx(1)


def test_encoding_error_within_bias_bound():
    rng = np.random.default_rng(9)
    for beta in (4, 6, 8):
        for length in (1, 3, 5):
            w = random_word(2, length, rng)
            weight = sum(abs(e) for _, e in w.letters)
            assert enc.encoding_error(w, beta) <= enc.bias_bound(2, weight, beta)


def test_bias_bound_halves_per_bit():
    assert enc.bias_bound(2, 3, 6) == pytest.approx(2 * enc.bias_bound(2, 3, 7))


def test_larger_genus_trace_is_close():
    w = MCGWord.from_pairs(4, [(2, 1), (9, -1), (6, 1)])
    err = abs(enc.encoded_word_trace(w, 7) - wrt_invariant(w)[1])
    assert err < enc.bias_bound(4, 3, 7)
    with pytest.raises(ValueError):
        enc.encoded_word_trace(w, 8)  # an interior unit would need 24 qubits
