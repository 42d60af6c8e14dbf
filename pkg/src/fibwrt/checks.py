"""Property suites run by ``fibwrt check`` and by the acceptance tests.

Each suite returns a :class:`SuiteResult`; ``detail`` holds the measured
quantities so a failure can be read without rerunning.
"""
from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import dqc1, encoding, qudits, spine
from .category import pentagon_residual, twist_phase
from .representation import (
    GeneratorId,
    MCGWord,
    braid_defect,
    commutator_norm,
    generator_matrix,
    random_word,
    unitarity_error,
    wrt_invariant,
)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    seconds: float = 0.0
    time_limit: float = math.inf
    detail: dict = field(default_factory=dict)

    @property
    def in_time(self) -> bool:
        return self.seconds <= self.time_limit

    @property
    def ok(self) -> bool:
        return self.passed and self.in_time

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        facts = ", ".join(f"{k}={_fmt(v)}" for k, v in self.detail.items())
        return f"{status} {self.name} ({self.seconds:.1f}s / {self.time_limit:g}s): {facts}"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.3g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def fusion_counting() -> SuiteResult:
    counts = {g: spine.labeling_count(g) for g in range(2, 9)}
    brute = {g: spine.brute_force_count(spine.standard_spine(g)) for g in range(2, 9)}
    base = spine.completion_vector(1)
    passed = counts[2] == 5 and (base.z0, base.z1) == (2, 1) and counts == brute
    return SuiteResult(
        "fusion counting", passed, detail={"counts": list(counts.values()), "brute": list(brute.values()), "base": (base.z0, base.z1)}
    )


def punctured_counts() -> SuiteResult:
    pairs = {(l, r): spine.count_punctured(4, (l, r)) for l in (0, 1) for r in (0, 1)}
    total = sum(pairs.values())
    segments = []
    for h_in in (0, 1):
        for h_out in (0, 1):
            segments.append(spine.count_punctured(3, (h_in, h_out)))
    quotients = sorted({c // 5 for c in segments})
    passed = (
        pairs[(0, 0)] == 50
        and pairs[(0, 1)] == 75
        and total == 325
        and all(c % 5 == 0 for c in segments)
        and set(quotients) <= {3, 4, 7}
    )
    return SuiteResult(
        "punctured counts",
        passed,
        detail={"g4_pairs": [pairs[k] for k in sorted(pairs)], "total": total, "g3_segments": segments, "quotients": quotients},
    )


def intersecting_pairs(g: int) -> list[tuple[int, int]]:
    """Generator pairs whose curves meet once: each handle's meridian with its
    through-handle twist.  Chain-cut curves are dual to bridge edges of the
    spine, hence separating, so every other pair of curves is disjoint."""
    return [(h, 2 * g - 1 + h) for h in range(1, g + 1)]


def representation_suite(genera=(2, 3, 4)) -> SuiteResult:
    unit, comm, braid = 0.0, 0.0, 0.0
    for g in genera:
        mats = {k: generator_matrix(GeneratorId(g, k)) for k in range(1, 3 * g)}
        unit = max(unit, max(unitarity_error(m) for m in mats.values()))
        meet = {frozenset(p) for p in intersecting_pairs(g)}
        for a in range(1, 3 * g):
            for b in range(a + 1, 3 * g):
                if frozenset((a, b)) in meet:
                    braid = max(braid, braid_defect(mats[a], mats[b]))
                else:
                    comm = max(comm, commutator_norm(mats[a], mats[b]))
    pent = pentagon_residual()
    passed = unit < 1e-10 and comm < 1e-10 and braid < 1e-8 and pent < 1e-10
    return SuiteResult(
        "representation", passed, detail={"unitarity": unit, "commutator": comm, "braid": braid, "pentagon": pent}
    )


def wrt_anchors(num_words: int = 100, seed: int = 2024) -> SuiteResult:
    ident = wrt_invariant(MCGWord(2))[0]
    chain = wrt_invariant(MCGWord.from_pairs(2, [(3, 1)]))[0]
    chain_ref = 4 + twist_phase(1)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(num_words):
        g = int(rng.integers(2, 4))
        w = random_word(g, int(rng.integers(1, 21)), rng)
        t = abs(wrt_invariant(w)[0])
        k = int(rng.integers(0, len(w)))
        shifted = MCGWord(g, w.letters[k:] + w.letters[:k])
        c = random_word(g, int(rng.integers(1, 6)), rng)
        conj = c * w * c.inverse()
        worst = max(worst, abs(abs(wrt_invariant(shifted)[0]) - t), abs(abs(wrt_invariant(conj)[0]) - t))
    passed = abs(ident - 5) < 1e-10 and abs(chain - chain_ref) < 1e-10 and worst < 1e-9
    return SuiteResult(
        "WRT anchors",
        passed,
        detail={"identity": ident.real, "chain_err": abs(chain - chain_ref), "shift_conj_max": worst},
    )


def encoding_words(seed: int = 7, count: int = 30) -> list[MCGWord]:
    """Every single generator (both signs) plus seeded random words of length 1..5 at genus 2."""
    words = [MCGWord.from_pairs(2, [(k, e)]) for k in range(1, 6) for e in (1, -1)]
    rng = np.random.default_rng(seed)
    words += [random_word(2, 1 + i % 5, rng) for i in range(count)]
    return words


def encoding_convergence(betas=(4, 6, 8, 10)) -> SuiteResult:
    words = encoding_words()
    devs = [encoding.preimage_deviation(2, b) for b in betas]
    errs = np.array([[encoding.encoding_error(w, b) for b in betas] for w in words])
    max_err = errs.max(axis=0).tolist()
    per_word = int(np.sum(np.all(np.diff(errs, axis=1) < 0, axis=1)))
    dec = lambda xs: all(y < x for x, y in zip(xs, xs[1:]))
    passed = dec(devs) and dec(max_err) and devs[-1] < 0.02 and max_err[-1] < 0.02
    return SuiteResult(
        "encoding convergence",
        passed,
        detail={
            "betas": list(betas),
            "max_deviation": devs,
            "max_trace_error": max_err,
            "words": len(words),
            "words_individually_monotone": per_word,
        },
    )


def dqc1_suite(num_circuits: int = 50, seed: int = 11) -> SuiteResult:
    rng = np.random.default_rng(seed)
    oracle = 0.0
    for k in range(num_circuits):
        c = dqc1.random_circuit(1 + k % 6, int(rng.integers(1, 12)), rng)
        for part in ("real", "imag"):
            oracle = max(oracle, abs(dqc1.exact_p0(c, part) - dqc1.density_matrix_p0(c, part)))
    # Sampling: |p_hat - p0| within 4 standard errors at fixed seeds.
    zs = []
    circuits = [dqc1.GateCircuit(1, (dqc1.gate("Z", 0),))]
    circuits += [dqc1.random_circuit(1 + k % 4, 6, rng) for k in range(10)]
    for k, c in enumerate(circuits):
        r = dqc1.sample_estimate(c, 10_000, seed=100 + k)
        for hat, exact in ((r.p0_hat_real, r.p0_exact_real), (r.p0_hat_imag, r.p0_exact_imag)):
            se = math.sqrt(exact * (1 - exact) / r.samples)
            zs.append(abs(hat - exact) / se if se > 0 else (0.0 if hat == exact else math.inf))
    e2e = dqc1.run_wrt_estimation(MCGWord.from_pairs(2, [(3, 1)]), 5, 100_000, seed=5)
    passed = oracle < 1e-10 and max(zs) < 4 and e2e.within_bounds(4.0)
    est = e2e.report.normalized_estimate
    return SuiteResult(
        "DQC1 simulation",
        passed,
        detail={
            "oracle_max": oracle,
            "max_z": max(zs),
            "e2e_estimate": (round(est.real, 5), round(est.imag, 5)),
            "e2e_exact": (round(e2e.exact_normalized.real, 5), round(e2e.exact_normalized.imag, 5)),
            "e2e_ok": e2e.within_bounds(4.0),
        },
    )


def _dqc1_p0_by_states(c: dqc1.GateCircuit) -> float:
    """Plain experiment by pure-state simulation over the mixed register."""
    n = c.num_qubits
    half = 2 ** (n - 1)
    basis = np.zeros((2**n, half), dtype=complex)
    basis[np.arange(half), np.arange(half)] = 1
    out = dqc1.apply_gates(basis, c)
    return float(np.sum(np.abs(out[:half]) ** 2)) / half


def absolute_trace_suite(num_circuits: int = 50, seed: int = 13) -> SuiteResult:
    rng = np.random.default_rng(seed)
    ident_err, imag = 0.0, 0.0
    for k in range(num_circuits):
        c = dqc1.random_circuit(1 + k % 3, int(rng.integers(1, 10)), rng)
        reduced = dqc1.absolute_trace_reduction(c)
        tr = complex(dqc1.circuit_unitary(reduced).diagonal().sum())
        p0 = _dqc1_p0_by_states(c)
        ident_err = max(ident_err, abs(p0 - 2 * tr.real / 2**reduced.num_qubits), abs(p0 - dqc1.dqc1_p0(c)))
        imag = max(imag, abs(tr.imag))
    passed = ident_err < 1e-9 and imag < 1e-10
    return SuiteResult("absolute-trace reduction", passed, detail={"identity_err": ident_err, "imag_max": imag})


def planner_suite(draws: int = 200, seed: int = 17) -> SuiteResult:
    p = qudits.plan(5, 2, 10, Fraction(1, 100))
    anchor = (p.d, p.c) == (14, 3276) and p.c * p.a == 16380
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for _ in range(draws):
        a, b = int(rng.integers(2, 8)), int(rng.integers(2, 6))
        n = int(rng.integers(1, 40))
        delta = Fraction(int(rng.integers(1, 1000)), 1000)
        pl = qudits.plan(a, b, n, delta)
        t = cmath.rect(float(rng.uniform(0, 1)), float(rng.uniform(0, 2 * math.pi)))
        disc = qudits.trace_discrepancy(pl, t)
        bound = qudits.discrepancy_bound(pl)
        worst = max(worst, disc - bound, bound - float(delta))
    passed = anchor and worst <= 1e-15
    return SuiteResult(
        "qudit planner", passed, detail={"d": p.d, "c": p.c, "max_violation": worst, "draws": draws}
    )


#: (suite, time limit in seconds), in acceptance order.
SUITES: dict[str, tuple[Callable[[], SuiteResult], float]] = {
    "fusion": (fusion_counting, 1),
    "punctures": (punctured_counts, 10),
    "representation": (representation_suite, 30),
    "wrt": (wrt_anchors, 30),
    "encoding": (encoding_convergence, 120),
    "dqc1": (dqc1_suite, 300),
    "abs-trace": (absolute_trace_suite, 60),
    "planner": (planner_suite, 10),
}


def run_suite(name: str) -> SuiteResult:
    fn, limit = SUITES[name]
    start = time.perf_counter()
    result = fn()
    result.seconds = time.perf_counter() - start
    result.time_limit = limit
    return result
