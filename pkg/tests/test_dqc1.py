import cmath
import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from fibwrt import dqc1
from fibwrt.dqc1 import CircuitError, Gate, GateCircuit, gate
from fibwrt.representation import MCGWord


def _diag_circuit(*phases):
    return GateCircuit(1, (Gate(np.diag(phases).astype(complex), (0,)),))


def test_p0_examples():
    assert dqc1.exact_p0(GateCircuit(2, (gate("I", 0),))) == pytest.approx(1)
    assert dqc1.exact_p0(GateCircuit(1, (gate("Z", 0),))) == pytest.approx(0.5)
    c = _diag_circuit(1, cmath.exp(1j * math.pi / 3))
    assert dqc1.exact_p0(c) == pytest.approx(0.875)
    assert dqc1.density_matrix_p0(c) == pytest.approx(0.875)
    assert dqc1.exact_p0(c, "imag") == pytest.approx(0.5 + math.sin(math.pi / 3) / 4)


def test_bad_part():
    with pytest.raises(ValueError):
        dqc1.exact_p0(GateCircuit(1, (gate("Z", 0),)), "phase")


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(1, 10), st.integers(0, 2**31))
def test_three_routes_agree(n, ngates, seed):
    c = dqc1.random_circuit(n, ngates, np.random.default_rng(seed))
    for part in ("real", "imag"):
        a = dqc1.exact_p0(c, part)
        assert dqc1.density_matrix_p0(c, part) == pytest.approx(a, abs=1e-10)
        assert dqc1.p0_by_state_averaging(c, part, chunk=8) == pytest.approx(a, abs=1e-10)


def test_state_averaging_independent_of_threads(monkeypatch):
    c = dqc1.random_circuit(5, 8, np.random.default_rng(0))
    monkeypatch.setenv(dqc1.THREADS_ENV, "1")
    one = dqc1.p0_by_state_averaging(c, chunk=4)
    monkeypatch.setenv(dqc1.THREADS_ENV, "4")
    assert dqc1.p0_by_state_averaging(c, chunk=4) == one


def test_gate_embedding_order():
    # CNOT with control 1, target 0 on |01> (qubit 0 most significant) gives |11>.
    c = GateCircuit(2, (gate("CNOT", 1, 0),))
    u = dqc1.circuit_unitary(c).toarray()
    assert u[3, 1] == 1


def test_validation():
    with pytest.raises(CircuitError):
        GateCircuit(1, (Gate(np.array([[1, 1], [0, 1]], dtype=complex), (0,)),))
    with pytest.raises(CircuitError):
        GateCircuit(2, (gate("H", 2),))
    with pytest.raises(CircuitError):
        GateCircuit(2, (gate("CNOT", 0, 0),))
    with pytest.raises(CircuitError):
        gate("FOO", 0)
    with pytest.raises(CircuitError):
        dqc1.circuit_unitary(GateCircuit(21, (), check=False))


def test_sampling_degenerate_and_deterministic():
    ident = GateCircuit(2, (gate("I", 0),))
    for seed in range(5):
        r = dqc1.sample_estimate(ident, 10_000, seed)
        assert r.p0_hat_real == 1
        assert r.normalized_estimate.real == 1
        assert r.standard_error_real == 0
    z = GateCircuit(1, (gate("Z", 0),))
    a, b = dqc1.sample_estimate(z, 10_000, 42), dqc1.sample_estimate(z, 10_000, 42)
    assert a == b
    assert abs(a.normalized_estimate.real) <= 4 * 2 * a.standard_error_real
    assert a.trace_estimate == 2 * a.normalized_estimate
    with pytest.raises(ValueError):
        dqc1.sample_estimate(z, 0, 1)


def test_standard_error_formula():
    r = dqc1.sample_estimate(GateCircuit(1, (gate("H", 0),)), 2000, 3)
    assert r.standard_error_real == pytest.approx(math.sqrt(r.p0_hat_real * (1 - r.p0_hat_real) / 2000))


def test_absolute_trace_identity_example():
    ident = GateCircuit(2, (gate("I", 0),))
    red = dqc1.absolute_trace_reduction(ident)
    assert red.num_qubits == 4
    tr = dqc1.circuit_unitary(red).diagonal().sum()
    assert tr == pytest.approx(8)
    assert 2 * tr.real / 2**4 == pytest.approx(dqc1.dqc1_p0(ident)) == pytest.approx(1)


def test_absolute_trace_pauli_x():
    # X maps the clean |0> to |1> with certainty, so both sides give 0.
    x = GateCircuit(1, (gate("X", 0),))
    tr = dqc1.circuit_unitary(dqc1.absolute_trace_reduction(x)).diagonal().sum()
    assert dqc1.dqc1_p0(x) == 0
    assert tr == pytest.approx(0)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(1, 8), st.integers(0, 2**31))
def test_absolute_trace_identity(n, ngates, seed):
    c = dqc1.random_circuit(n, ngates, np.random.default_rng(seed))
    tr = complex(dqc1.circuit_unitary(dqc1.absolute_trace_reduction(c)).diagonal().sum())
    assert abs(tr.imag) < 1e-10
    # Direct plain experiment on the dense unitary: probability qubit 0 stays 0.
    u = dqc1.circuit_unitary(c).toarray()
    half = 2 ** (n - 1)
    p0 = np.sum(np.abs(u[:half, :half]) ** 2) / half
    assert 2 * tr.real / 2 ** (n + 2) == pytest.approx(p0, abs=1e-9)


def test_json_round_trip():
    c = GateCircuit(2, (gate("H", 0), gate("T", 1), Gate(dqc1.NAMED_GATES["SWAP"].astype(complex), (0, 1))))
    back = dqc1.circuit_from_json(dqc1.circuit_to_json(c))
    np.testing.assert_allclose(dqc1.circuit_unitary(back).toarray(), dqc1.circuit_unitary(c).toarray())
    red = dqc1.absolute_trace_reduction(c)
    assert [g.name for g in red.gates][:3] == ["", "TDG", "H"]
    with pytest.raises(CircuitError):
        dqc1.circuit_from_json({"gates": []})
    with pytest.raises(CircuitError):
        dqc1.circuit_from_json({"num_qubits": 1, "gates": [{"targets": [0]}]})


def test_wrt_estimation_identity():
    r = dqc1.run_wrt_estimation(MCGWord(2), 4, 1000, seed=1)
    assert r.report.normalized_estimate.real == 1
    assert r.encoded_normalized == pytest.approx(1)


def test_wrt_estimation_chain_cut():
    r = dqc1.run_wrt_estimation(MCGWord.from_pairs(2, [(3, 1)]), 5, 100_000, seed=3)
    theta = cmath.exp(3j * math.pi / 5)
    assert r.exact_normalized == pytest.approx((4 + theta) / 5)
    assert r.within_bounds(4.0)
    assert r.report.num_qubits == 15


def test_wrt_estimation_size_limit():
    with pytest.raises(CircuitError):
        dqc1.run_wrt_estimation(MCGWord(3), 4, 10, seed=0)  # 24 qubits


def test_encoded_circuit_matches_operator():
    from fibwrt.encoding import encoded_word_operator

    w = MCGWord.from_pairs(2, [(4, 1), (3, -2), (5, 1)])
    c = dqc1.encoded_word_circuit(w, 3)
    diff = dqc1.circuit_unitary(c) - encoded_word_operator(w, 3)
    assert abs(diff).max() < 1e-12
