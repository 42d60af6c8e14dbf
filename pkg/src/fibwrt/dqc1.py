"""One-clean-qubit experiments: Hadamard-test trace estimation and the
absolute-trace reduction.

Qubit 0 is the most significant bit of a basis index.  Gates are dense
unitaries on a few qubits, or sparse operators on every qubit of the circuit
(used for encoded Dehn-twist words).
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np
import scipy.sparse as sp

MAX_QUBITS = 20
#: Register qubits allowed for encoded-word estimation.
MAX_WRT_QUBITS = 19
UNITARY_TOL = 1e-10
THREADS_ENV = "FIBWRT_THREADS"

_S2 = 1 / math.sqrt(2)
NAMED_GATES = {
    "I": np.eye(2),
    "H": np.array([[_S2, _S2], [_S2, -_S2]]),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1, -1]),
    "S": np.diag([1, 1j]),
    "SDG": np.diag([1, -1j]),
    "T": np.diag([1, np.exp(1j * math.pi / 4)]),
    "TDG": np.diag([1, np.exp(-1j * math.pi / 4)]),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]),
    "CZ": np.diag([1, 1, 1, -1]),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]),
}
_INVERSE_NAME = {"S": "SDG", "SDG": "S", "T": "TDG", "TDG": "T"}

Matrix = Union[np.ndarray, sp.spmatrix]


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    matrix: Matrix
    targets: tuple[int, ...]
    name: str = ""

    @property
    def arity(self) -> int:
        return len(self.targets)

    def dagger(self) -> "Gate":
        if self.name in NAMED_GATES:
            inv = _INVERSE_NAME.get(self.name, self.name)
            return Gate(NAMED_GATES[inv].astype(complex), self.targets, inv)
        return Gate(self.matrix.conj().T, self.targets)


def gate(name: str, *targets: int) -> Gate:
    key = name.upper()
    if key not in NAMED_GATES:
        raise CircuitError(f"unknown gate {name!r}")
    return Gate(NAMED_GATES[key].astype(complex), tuple(targets), key)


@dataclass(frozen=True)
class GateCircuit:
    num_qubits: int
    gates: tuple[Gate, ...] = ()
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if self.num_qubits < 1:
            raise CircuitError("a circuit needs at least one qubit")
        if self.check:
            for k, g in enumerate(self.gates):
                _validate_gate(g, self.num_qubits, k)

    def dagger(self) -> "GateCircuit":
        return GateCircuit(self.num_qubits, tuple(g.dagger() for g in reversed(self.gates)), check=False)


def _validate_gate(g: Gate, n: int, k: int) -> None:
    if len(set(g.targets)) != len(g.targets) or not all(0 <= t < n for t in g.targets):
        raise CircuitError(f"gate {k}: targets {g.targets} invalid for {n} qubits")
    dim = 2 ** len(g.targets)
    if g.matrix.shape != (dim, dim):
        raise CircuitError(f"gate {k}: matrix shape {g.matrix.shape} does not match {len(g.targets)} targets")
    m = g.matrix
    if sp.issparse(m):
        err = abs(m.conj().T @ m - sp.identity(dim)).max() if m.nnz else 1.0
    else:
        err = np.abs(m.conj().T @ m - np.eye(dim)).max()
    if err > UNITARY_TOL:
        raise CircuitError(f"gate {k} is not unitary (deviation {err:.2e})")


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


# --- simulation ------------------------------------------------------------


def embed(g: Gate, n: int) -> sp.csr_matrix:
    """The gate as a sparse operator on all ``n`` qubits."""
    k = g.arity
    if k == n and g.targets == tuple(range(n)):
        return sp.csr_matrix(g.matrix)
    rest = [q for q in range(n) if q not in g.targets]
    full = sp.kron(sp.csr_matrix(g.matrix), sp.identity(2 ** (n - k)), format="coo")
    # Index in (targets..., rest...) order -> standard index.
    order = list(g.targets) + rest
    idx = np.arange(2**n)
    perm = np.zeros(2**n, dtype=np.int64)
    for pos, q in enumerate(order):
        bit = (idx >> (n - 1 - pos)) & 1
        perm |= bit << (n - 1 - q)
    return sp.csr_matrix((full.data, (perm[full.row], perm[full.col])), shape=(2**n, 2**n))


def circuit_unitary(circuit: GateCircuit) -> sp.csr_matrix:
    n = circuit.num_qubits
    if n > MAX_QUBITS:
        raise CircuitError(f"{n} qubits exceed the simulator limit of {MAX_QUBITS}")
    u = sp.identity(2**n, dtype=complex, format="csr")
    for g in circuit.gates:
        u = (embed(g, n) @ u).tocsr()
    return u


def normalized_trace(circuit: GateCircuit) -> complex:
    u = circuit_unitary(circuit)
    return complex(u.diagonal().sum()) / 2**circuit.num_qubits


def exact_p0(circuit: GateCircuit, part: str = "real") -> float:
    """Probability of outcome 0 in the Hadamard test on the circuit.

    ``part="real"`` prepares the clean qubit in (|0>+|1>)/sqrt2 and gives
    (1 + Re tr U / 2^n) / 2; ``"imag"`` prepares (|0>-i|1>)/sqrt2.
    """
    t = normalized_trace(circuit)
    return _p0_from_trace(t, part)


def _p0_from_trace(t: complex, part: str) -> float:
    if part == "real":
        return (1 + t.real) / 2
    if part == "imag":
        return (1 + t.imag) / 2
    raise ValueError(f"part must be 'real' or 'imag', got {part!r}")


def apply_gates(states: np.ndarray, circuit: GateCircuit) -> np.ndarray:
    """Apply the circuit to each column of ``states`` (shape (2^n, batch))."""
    n = circuit.num_qubits
    batch = states.shape[1]
    psi = states.astype(complex)
    for g in circuit.gates:
        if sp.issparse(g.matrix) or g.arity == n:
            psi = embed(g, n) @ psi if g.targets != tuple(range(n)) else g.matrix @ psi
            continue
        k = g.arity
        t = psi.reshape((2,) * n + (batch,))
        t = np.moveaxis(t, g.targets, range(k))
        shape = t.shape
        t = (np.asarray(g.matrix) @ t.reshape(2**k, -1)).reshape(shape)
        psi = np.moveaxis(t, range(k), g.targets).reshape(2**n, batch)
    return psi


def p0_by_state_averaging(circuit: GateCircuit, part: str = "real", chunk: int = 256) -> float:
    """Hadamard test simulated on pure states, averaged over the mixed register's basis."""
    n = circuit.num_qubits
    dim = 2**n
    phase = 1 if part == "real" else -1j
    if part not in ("real", "imag"):
        raise ValueError(f"part must be 'real' or 'imag', got {part!r}")

    def run(lo: int) -> float:
        hi = min(lo + chunk, dim)
        basis = np.zeros((dim, hi - lo), dtype=complex)
        basis[np.arange(lo, hi), np.arange(hi - lo)] = 1
        # Clean qubit: a|0>|x> + b|1>U|x>, then H: amplitude on |0> is (a|x> + bU|x>)/sqrt2.
        zero_branch = (basis + phase * apply_gates(basis, circuit)) / 2
        return float(np.sum(np.abs(zero_branch) ** 2))

    starts = range(0, dim, chunk)
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        parts = list(pool.map(run, starts))
    return math.fsum(parts) / dim


def density_matrix_p0(circuit: GateCircuit, part: str = "real") -> float:
    """Evolve |0><0| (x) I/2^n through H (and S^dagger), controlled-U, H and measure."""
    n = circuit.num_qubits
    if n > 8:
        raise CircuitError("density-matrix route is limited to 8 register qubits")
    dim = 2**n
    u = circuit_unitary(circuit).toarray()
    rho = np.kron(np.diag([1, 0]), np.eye(dim) / dim).astype(complex)
    h = np.kron(NAMED_GATES["H"], np.eye(dim))
    prep = h if part == "real" else np.kron(NAMED_GATES["SDG"], np.eye(dim)) @ h
    cu = np.block([[np.eye(dim), np.zeros((dim, dim))], [np.zeros((dim, dim)), u]])
    step = h @ cu @ prep
    rho = step @ rho @ step.conj().T
    return float(np.real(np.trace(rho[:dim, :dim])))


def dqc1_p0(circuit: GateCircuit) -> float:
    """p0 of the plain experiment: qubit 0 clean, the rest mixed, U, measure qubit 0."""
    n = circuit.num_qubits
    u = circuit_unitary(circuit)
    half = 2 ** (n - 1)
    block = u[:half, :half]
    return float(np.real((block.multiply(block.conj())).sum())) / half


# --- sampling --------------------------------------------------------------


@dataclass(frozen=True)
class EstimationReport:
    samples: int
    seed: int
    num_qubits: int
    p0_exact_real: float
    p0_exact_imag: float
    p0_hat_real: float
    p0_hat_imag: float

    @property
    def trace_estimate(self) -> complex:
        return 2**self.num_qubits * self.normalized_estimate

    @property
    def normalized_estimate(self) -> complex:
        return complex(2 * self.p0_hat_real - 1, 2 * self.p0_hat_imag - 1)

    @property
    def standard_error_real(self) -> float:
        return math.sqrt(self.p0_hat_real * (1 - self.p0_hat_real) / self.samples)

    @property
    def standard_error_imag(self) -> float:
        return math.sqrt(self.p0_hat_imag * (1 - self.p0_hat_imag) / self.samples)

    def as_dict(self) -> dict:
        est = self.normalized_estimate
        return {
            "samples": self.samples,
            "seed": self.seed,
            "num_qubits": self.num_qubits,
            "p0_exact_real": self.p0_exact_real,
            "p0_exact_imag": self.p0_exact_imag,
            "p0_hat_real": self.p0_hat_real,
            "p0_hat_imag": self.p0_hat_imag,
            "standard_error_real": self.standard_error_real,
            "standard_error_imag": self.standard_error_imag,
            "normalized_estimate_re": est.real,
            "normalized_estimate_im": est.imag,
            "trace_estimate_re": self.trace_estimate.real,
            "trace_estimate_im": self.trace_estimate.imag,
        }


def sample_from_p0(p0_real: float, p0_imag: float, num_qubits: int, samples: int, seed: int) -> EstimationReport:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng_re, rng_im = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2))
    clip = lambda p: min(1.0, max(0.0, p))
    k_re = int(rng_re.binomial(samples, clip(p0_real)))
    k_im = int(rng_im.binomial(samples, clip(p0_imag)))
    return EstimationReport(samples, seed, num_qubits, p0_real, p0_imag, k_re / samples, k_im / samples)


def sample_estimate(circuit: GateCircuit, samples: int, seed: int) -> EstimationReport:
    """Simulate ``samples`` Hadamard-test shots per part with a seeded generator."""
    t = normalized_trace(circuit)
    return sample_from_p0(_p0_from_trace(t, "real"), _p0_from_trace(t, "imag"), circuit.num_qubits, samples, seed)


# --- absolute-trace reduction ---------------------------------------------


def absolute_trace_reduction(circuit: GateCircuit) -> GateCircuit:
    """U' = CNOT(0 -> n+1) . U . CNOT(0 -> n) . U^dagger on n + 2 qubits.

    For the plain experiment on U (qubit 0 clean), p0 = 2 tr U' / 2^(n+2).
    """
    n = circuit.num_qubits
    gates = list(circuit.dagger().gates)
    gates.append(gate("CNOT", 0, n))
    gates.extend(circuit.gates)
    gates.append(gate("CNOT", 0, n + 1))
    return GateCircuit(n + 2, tuple(gates), check=False)


# --- JSON gate lists -------------------------------------------------------


def circuit_to_json(circuit: GateCircuit) -> dict:
    out = []
    for g in circuit.gates:
        if g.name:
            out.append({"gate": g.name, "targets": list(g.targets)})
        else:
            m = g.matrix.toarray() if sp.issparse(g.matrix) else np.asarray(g.matrix)
            out.append(
                {"matrix": [[[float(z.real), float(z.imag)] for z in row] for row in m], "targets": list(g.targets)}
            )
    return {"num_qubits": circuit.num_qubits, "gates": out}


def circuit_from_json(data: dict) -> GateCircuit:
    try:
        n = int(data["num_qubits"])
        gates = []
        for k, item in enumerate(data.get("gates", [])):
            targets = tuple(int(t) for t in item["targets"])
            if "gate" in item:
                gates.append(gate(item["gate"], *targets))
            elif "matrix" in item:
                m = np.array([[complex(*z) if isinstance(z, list) else complex(z) for z in row] for row in item["matrix"]])
                gates.append(Gate(m, targets))
            else:
                raise CircuitError(f"gate {k} needs 'gate' or 'matrix'")
    except (KeyError, TypeError) as exc:
        raise CircuitError(f"malformed circuit JSON: {exc}") from exc
    return GateCircuit(n, tuple(gates))


def load_circuit(path: Union[str, Path]) -> GateCircuit:
    with open(path) as fh:
        return circuit_from_json(json.load(fh))


def random_circuit(num_qubits: int, num_gates: int, rng: np.random.Generator) -> GateCircuit:
    """Haar-ish random one- and two-qubit gates (QR of complex Gaussians)."""
    gates = []
    for _ in range(num_gates):
        k = 1 if num_qubits == 1 else int(rng.integers(1, 3))
        targets = tuple(int(q) for q in rng.choice(num_qubits, size=k, replace=False))
        z = rng.normal(size=(2**k, 2**k)) + 1j * rng.normal(size=(2**k, 2**k))
        q, r = np.linalg.qr(z)
        q = q * (np.diag(r) / np.abs(np.diag(r)))
        gates.append(Gate(q, targets))
    return GateCircuit(num_qubits, tuple(gates))


# --- end to end ------------------------------------------------------------


@dataclass(frozen=True)
class WRTEstimate:
    word: str
    genus: int
    beta: int
    report: EstimationReport
    exact_normalized: complex
    encoded_normalized: complex
    bias_bound: float

    def within_bounds(self, sigmas: float = 4.0) -> bool:
        est = self.report.normalized_estimate
        # The normalized estimate is 2 p_hat - 1, so its standard error doubles.
        ok_re = abs(est.real - self.exact_normalized.real) <= sigmas * 2 * self.report.standard_error_real + self.bias_bound
        ok_im = abs(est.imag - self.exact_normalized.imag) <= sigmas * 2 * self.report.standard_error_imag + self.bias_bound
        return ok_re and ok_im


def encoded_word_circuit(word, beta: int) -> GateCircuit:
    """One full-width sparse gate per letter power of the encoded word."""
    from .encoding import encode_generator, full_string_set, thresholds

    g = word.genus
    n = beta * (3 * g - 3)
    if n > MAX_WRT_QUBITS:
        raise CircuitError(f"beta*(3g-3) = {n} exceeds {MAX_WRT_QUBITS}")
    strings = full_string_set(thresholds(g, beta))
    gates = []
    for gen, exp in word.letters:
        op = strings.operator(encode_generator(gen, strings.table))
        if exp < 0:
            op = op.conj().T.tocsr()
        gates.extend(Gate(op, tuple(range(n)), "") for _ in range(abs(exp)))
    return GateCircuit(n, tuple(gates), check=False)



def run_wrt_estimation(word, beta: int, samples: int, seed: int) -> WRTEstimate:
    """Hadamard-test estimate of the normalized WRT invariant of ``word``."""
    from .encoding import bias_bound, encoded_word_trace
    from .representation import wrt_invariant

    g = word.genus
    if beta < 1 or beta * (3 * g - 3) > MAX_WRT_QUBITS:
        raise CircuitError(f"beta*(3g-3) must be at most {MAX_WRT_QUBITS}, got {beta * (3 * g - 3)}")
    circuit = encoded_word_circuit(word, beta)
    t = normalized_trace(circuit)
    report = sample_from_p0(_p0_from_trace(t, "real"), _p0_from_trace(t, "imag"), circuit.num_qubits, samples, seed)
    weight = sum(abs(e) for _, e in word.letters)
    return WRTEstimate(
        word=str(word),
        genus=g,
        beta=beta,
        report=report,
        exact_normalized=wrt_invariant(word)[1],
        encoded_normalized=encoded_word_trace(word, beta),
        bias_bound=bias_bound(g, weight, beta),
    )
