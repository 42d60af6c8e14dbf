"""Many-to-one encoding of spine labelings into beta-bit registers.

Each spine edge ``i`` owns a register ``x_i`` in ``[0, 2**beta)``.  Decoding is
sequential: ``s_i = 0`` iff ``x_i < T_i(s_{i-2}, s_{i-1})`` where the threshold
is ``2**beta`` times the conditional probability of a 0 label, rounded to
nearest (ties up).  Exactly ``T`` register values therefore encode a 0.

Registers are packed most-significant first: register 1 holds the top
``beta`` bits of the full index, so lexicographic order of register tuples is
numeric order of indices.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .category import twist_phase
from .representation import (
    Family,
    GeneratorId,
    MCGWord,
    handle_edges,
    local_move,
    wrt_invariant,
)
from .spine import completions_after_prefix, enumerate_labelings, standard_spine

MAX_BETA = 16
#: Largest register block (in qubits) an encoded generator may act on densely.
MAX_BLOCK_QUBITS = 22
#: Fitted once: |encoded - exact| normalized trace <= BIAS_CONSTANT * g * |w| * 2^-beta.
BIAS_CONSTANT = 1.0

_NONE = -1  # missing context label in integer arrays


def round_half_up(num: int, den: int) -> int:
    """Nearest integer to num/den for nonnegative num, den > 0; ties go up."""
    return (2 * num + den) // (2 * den)


@dataclass(frozen=True)
class ThresholdTable:
    genus: int
    beta: int
    #: T[(i, (s_{i-2}, s_{i-1}))], with None for contexts before edge 1.
    thresholds: dict
    probabilities: dict = field(repr=False)
    # Per edge, a 3x3 array over (s_{i-2}+1, s_{i-1}+1); -1 marks unused contexts.
    _arrays: tuple = field(repr=False, default=())

    @property
    def num_edges(self) -> int:
        return 3 * self.genus - 3

    @property
    def num_qubits(self) -> int:
        return self.beta * self.num_edges

    def threshold(self, i: int, prev2: Optional[int], prev: Optional[int]) -> int:
        return self.thresholds[(i, (prev2, prev))]

    def threshold_array(self, i: int, prev2: np.ndarray, prev: np.ndarray) -> np.ndarray:
        return self._arrays[i - 1][prev2 + 1, prev + 1]


def _contexts(i: int):
    if i == 1:
        return [(None, None)]
    if i == 2:
        return [(None, a) for a in (0, 1)]
    return list(itertools.product((0, 1), (0, 1)))


def build_thresholds(g: int, beta: int) -> ThresholdTable:
    if not isinstance(beta, int) or not 2 <= beta <= MAX_BETA:
        raise ValueError(f"beta must be an integer in [2, {MAX_BETA}], got {beta!r}")
    n = 3 * g - 3
    scale = 2**beta
    thresholds, probs = {}, {}
    arrays = []
    for i in range(1, n + 1):
        arr = np.full((3, 3), -1, dtype=np.int64)
        for ctx in _contexts(i):
            window = tuple(c for c in ctx if c is not None)
            c0 = completions_after_prefix(g, i, window + (0,))
            c1 = completions_after_prefix(g, i, window + (1,))
            if c0 + c1 == 0:
                continue
            t = round_half_up(scale * c0, c0 + c1)
            thresholds[(i, ctx)] = t
            probs[(i, ctx)] = Fraction(c0, c0 + c1)
            arr[(ctx[0] if ctx[0] is not None else _NONE) + 1, (ctx[1] if ctx[1] is not None else _NONE) + 1] = t
        arrays.append(arr)
    return ThresholdTable(g, beta, thresholds, probs, tuple(arrays))


@functools.lru_cache(maxsize=64)
def thresholds(g: int, beta: int) -> ThresholdTable:
    return build_thresholds(g, beta)


def decode(x: Sequence[int], table: ThresholdTable) -> tuple[int, ...]:
    """Labeling encoded by register values ``x`` (total on all inputs)."""
    if len(x) != table.num_edges:
        raise ValueError(f"expected {table.num_edges} registers, got {len(x)}")
    labels: list[int] = []
    for i, xi in enumerate(x, start=1):
        if not 0 <= xi < 2**table.beta:
            raise ValueError(f"register {i} value {xi} outside [0, 2^{table.beta})")
        prev2 = labels[-2] if len(labels) >= 2 else None
        prev = labels[-1] if labels else None
        labels.append(0 if xi < table.threshold(i, prev2, prev) else 1)
    return tuple(labels)


def decode_array(regs: np.ndarray, table: ThresholdTable, first_edge: int = 1, prefix=(_NONE, _NONE)) -> np.ndarray:
    """Vectorised :func:`decode` over rows of ``regs`` (registers first_edge..).

    ``prefix`` gives the labels (or arrays) of the two edges before
    ``first_edge``.  Rows whose context is unused by the table decode with
    label -1 in that column and afterwards.
    """
    rows, cols = regs.shape
    out = np.empty((rows, cols), dtype=np.int64)
    prev2 = np.broadcast_to(np.asarray(prefix[0], dtype=np.int64), (rows,))
    prev = np.broadcast_to(np.asarray(prefix[1], dtype=np.int64), (rows,))
    for j in range(cols):
        t = table.threshold_array(first_edge + j, prev2, prev)
        lab = np.where(regs[:, j] >= t, 1, 0)
        lab = np.where((t < 0) | (prev == -2) | (prev2 == -2), -2, lab)
        out[:, j] = lab
        prev2, prev = prev, lab
    return out


def interval(table: ThresholdTable, i: int, prev2, prev, label: int) -> tuple[int, int]:
    """Register values [start, stop) that decode edge ``i`` to ``label``."""
    t = table.threshold(i, prev2, prev)
    return (0, t) if label == 0 else (t, 2**table.beta)


def preimage_size(labeling: Sequence[int], table: ThresholdTable) -> int:
    size = 1
    for i, s in enumerate(labeling, start=1):
        prev2 = labeling[i - 3] if i >= 3 else None
        prev = labeling[i - 2] if i >= 2 else None
        a, b = interval(table, i, prev2, prev, s)
        size *= b - a
    return size


def preimage_deviation(g: int, beta: int) -> float:
    """max over labelings of |preimage fraction - 1/N| * N."""
    table = thresholds(g, beta)
    labs = enumerate_labelings(standard_spine(g))
    total = 2**table.num_qubits
    n = len(labs)
    return float(max(abs(Fraction(preimage_size(lab, table), total) - Fraction(1, n)) * n for lab in labs))


# --- encoded generators ---------------------------------------------------


@dataclass(frozen=True)
class EncodedUnitary:
    """A generator lifted to the registers.

    ``blocks[c]`` is the sparse unitary on the target registers (packed as in
    the module docstring) used when the control edges carry labels ``c``.
    """

    gen: GeneratorId
    beta: int
    targets: tuple[int, ...]
    controls: tuple[int, ...]
    blocks: dict = field(repr=False)

    @property
    def target_qubits(self) -> int:
        return self.beta * len(self.targets)

    @property
    def control_qubits(self) -> int:
        return self.beta * len(self.controls)


def _dependent_targets(table: ThresholdTable, changed: tuple[int, ...]) -> list[int]:
    """Edges after ``changed`` whose threshold depends on a changed label."""
    out = []
    last = max(changed)
    for j in (last + 1, last + 2):
        if j > table.num_edges:
            break
        arr = table._arrays[j - 1]
        varies = False
        for pos, e in ((0, j - 2), (1, j - 1)):
            if e not in changed:
                continue
            for other in range(3):
                vals = arr[:, other] if pos == 0 else arr[other, :]
                used = vals[vals >= 0]
                if len(set(used.tolist())) > 1:
                    varies = True
        if varies:
            out.append(j)
    return out


def _layout(gen: GeneratorId, table: ThresholdTable):
    move = local_move(gen)
    if gen.is_diagonal:
        targets = (gen.cut_edge,)
    else:
        targets = tuple(sorted(set(move.changed) | set(_dependent_targets(table, move.changed))))
        assert targets == tuple(range(targets[0], targets[-1] + 1)), targets
    first = targets[0]
    controls = tuple(e for e in (first - 2, first - 1) if e >= 1)
    return move, targets, controls


def _components(matrix: np.ndarray, tol: float = 1e-13) -> list[list[int]]:
    n = matrix.shape[0]
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for r in range(n):
        for c in range(n):
            if abs(matrix[r, c]) > tol:
                parent[find(r)] = find(c)
    groups: dict[int, list[int]] = {}
    for a in range(n):
        groups.setdefault(find(a), []).append(a)
    return list(groups.values())


def _target_block(move, targets, controls, control_labels, table) -> Optional[sp.csr_matrix]:
    beta = table.beta
    t = len(targets)
    size = 2 ** (beta * t)
    idx = np.arange(size, dtype=np.int64)
    mask = 2**beta - 1
    regs = np.stack([(idx >> (beta * (t - 1 - j))) & mask for j in range(t)], axis=1)
    known = dict(zip(controls, control_labels))
    first = targets[0]
    prefix = (known.get(first - 2, _NONE), known.get(first - 1, _NONE))
    labels = decode_array(regs, table, first, prefix)
    if (labels < 0).any():
        return None
    lab_of = {e: labels[:, j] for j, e in enumerate(targets)}

    rows, cols, vals = [], [], []
    code = np.zeros(size, dtype=np.int64)
    for j in range(t):
        code = (code << 1) | labels[:, j]
    members = {int(c): np.flatnonzero(code == c) for c in np.unique(code)}

    def edge_label(e, target_tuple):
        return target_tuple[targets.index(e)] if e in targets else known[e]

    tuples = {c: tuple((c >> (t - 1 - j)) & 1 for j in range(t)) for c in members}
    by_stem: dict[tuple, list[int]] = {}
    for c, tup in tuples.items():
        by_stem.setdefault(tuple(edge_label(e, tup) for e in move.stems), []).append(c)

    for stem_labels, codes in by_stem.items():
        states, block = move.block(stem_labels)
        state_of = {c: states.index(tuple(tuples[c][targets.index(e)] for e in move.changed)) for c in codes}
        code_of = {s: c for c, s in state_of.items()}
        for comp in _components(block):
            comp_codes = [code_of[s] for s in comp if s in code_of]
            # A state with no strings cannot be paired, so the whole component idles.
            paired = min(len(members[c]) for c in comp_codes) if len(comp_codes) == len(comp) else 0
            for src in comp_codes:
                src_idx = members[src]
                for dst in comp_codes:
                    amp = block[state_of[dst], state_of[src]]
                    if abs(amp) == 0:
                        continue
                    rows.append(members[dst][:paired])
                    cols.append(src_idx[:paired])
                    vals.append(np.full(paired, amp, dtype=complex))
                surplus = src_idx[paired:]
                rows.append(surplus)
                cols.append(surplus)
                vals.append(np.ones(len(surplus), dtype=complex))
    m = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
    )
    return m


@functools.lru_cache(maxsize=256)
def _encode_cached(gen: GeneratorId, g: int, beta: int) -> EncodedUnitary:
    table = thresholds(g, beta)
    move, targets, controls = _layout(gen, table)
    if beta * len(targets) > MAX_BLOCK_QUBITS:
        raise ValueError(
            f"generator {gen.index} acts on {beta * len(targets)} qubits; cap is {MAX_BLOCK_QUBITS}"
        )
    blocks = {}
    for ctl in itertools.product((0, 1), repeat=len(controls)):
        b = _target_block(move, targets, controls, ctl, table)
        if b is not None:
            blocks[ctl] = b
    return EncodedUnitary(gen, beta, targets, controls, blocks)


def encode_generator(gen: GeneratorId, table: ThresholdTable) -> EncodedUnitary:
    if gen.genus != table.genus:
        raise ValueError("generator and table genus differ")
    return _encode_cached(gen, table.genus, table.beta)


# --- applying encoded generators to sets of register strings --------------


class StringSet:
    """Register strings differing only in the registers ``vary`` (0-based).

    Rows are ordered by the packed value of the varying registers.
    """

    def __init__(self, regs: np.ndarray, vary: Sequence[int], table: ThresholdTable):
        self.table = table
        self.vary = tuple(vary)
        beta = table.beta
        key = np.zeros(len(regs), dtype=np.int64)
        for r in self.vary:
            key = (key << beta) | regs[:, r]
        order = np.argsort(key, kind="stable")
        self.regs = regs[order]
        self.key = key[order]
        self.labels = decode_array(self.regs, table)

    def __len__(self) -> int:
        return len(self.regs)

    def operator(self, eu: EncodedUnitary) -> sp.csr_matrix:
        beta = self.table.beta
        n = len(self)
        tcols = [e - 1 for e in eu.targets]
        local = np.zeros(n, dtype=np.int64)
        for c in tcols:
            local = (local << beta) | self.regs[:, c]
        rows, cols, vals = [], [], []
        ctl = self.labels[:, [e - 1 for e in eu.controls]] if eu.controls else np.zeros((n, 0), dtype=np.int64)
        ctl_code = np.zeros(n, dtype=np.int64)
        for j in range(ctl.shape[1]):
            ctl_code = (ctl_code << 1) | ctl[:, j]
        t = len(tcols)
        mask = 2**beta - 1
        for key_tuple, block in eu.blocks.items():
            code = 0
            for v in key_tuple:
                code = (code << 1) | v
            sel = np.flatnonzero(ctl_code == code)
            if len(sel) == 0:
                continue
            csc = block.tocsc()
            start, stop = csc.indptr[local[sel]], csc.indptr[local[sel] + 1]
            counts = stop - start
            src = np.repeat(sel, counts)
            offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
            ptr = np.repeat(start, counts) + offsets
            out_local = csc.indices[ptr]
            new_regs = self.regs[src].copy()
            for j, c in enumerate(tcols):
                new_regs[:, c] = (out_local >> (beta * (t - 1 - j))) & mask
            new_key = np.zeros(len(src), dtype=np.int64)
            for r in self.vary:
                new_key = (new_key << beta) | new_regs[:, r]
            pos = np.searchsorted(self.key, new_key)
            if (pos >= n).any() or (self.key[np.minimum(pos, n - 1)] != new_key).any():
                raise RuntimeError("encoded generator left the string set")
            rows.append(pos)
            cols.append(src)
            vals.append(csc.data[ptr])
        if len(np.unique(np.concatenate(cols))) != n:
            raise RuntimeError("some strings have no applicable control context")
        return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


def full_string_set(table: ThresholdTable) -> StringSet:
    n, beta = table.num_edges, table.beta
    total = 2 ** (n * beta)
    if n * beta > MAX_BLOCK_QUBITS:
        raise ValueError(f"{n * beta} qubits exceed the materialization cap {MAX_BLOCK_QUBITS}")
    idx = np.arange(total, dtype=np.int64)
    mask = 2**beta - 1
    regs = np.stack([(idx >> (beta * (n - 1 - j))) & mask for j in range(n)], axis=1)
    return StringSet(regs, range(n), table)


def _word_operator(word: MCGWord, strings: StringSet, letters=None) -> sp.csr_matrix:
    table = strings.table
    result = sp.identity(len(strings), dtype=complex, format="csr")
    for gen, exp in letters if letters is not None else word.letters:
        op = strings.operator(encode_generator(gen, table))
        if exp < 0:
            op = op.conj().T.tocsr()
        for _ in range(abs(exp)):
            result = (result @ op).tocsr()
    return result


def encoded_word_operator(word: MCGWord, beta: int) -> sp.csr_matrix:
    """The full encoded unitary on all ``beta * (3g - 3)`` qubits (small sizes only)."""
    return _word_operator(word, full_string_set(thresholds(word.genus, beta)))


# --- exact trace by conserved horizontal labels ---------------------------


def _units(g: int) -> list[tuple[int, ...]]:
    """Register groups: (L, h1), then (U, Lw, h_out) per bubble, then (R,)."""
    units = [(1, 2)]
    for handle in range(2, g):
        u, lw = handle_edges(g, handle)
        units.append((u, lw, lw + 1))
    units.append((3 * g - 3,))
    return units


def _unit_of(gen: GeneratorId) -> Optional[int]:
    if gen.family is Family.CHAIN:
        return None
    return gen.handle - 1


def _prefix_registers(table: ThresholdTable, first_edge: int, h_in: int) -> Optional[np.ndarray]:
    """Register values for edges before ``first_edge`` decoding to a labeling with that horizontal label."""
    g = table.genus
    for lab in enumerate_labelings(standard_spine(g)):
        if lab[first_edge - 2] != h_in:
            continue
        regs = []
        for i in range(1, first_edge):
            prev2 = lab[i - 3] if i >= 3 else None
            prev = lab[i - 2] if i >= 2 else None
            regs.append(interval(table, i, prev2, prev, lab[i - 1])[0])
        return np.array(regs, dtype=np.int64)
    return None


def _unit_dimension(table: ThresholdTable, unit: tuple[int, ...], h_in: Optional[int], h_out: Optional[int]) -> int:
    """Number of unit register strings in the (h_in, h_out) sector, by interval products."""
    total = 0
    first = unit[0]
    for local in itertools.product((0, 1), repeat=len(unit)):
        labels = {}
        if first >= 2:
            labels[first - 1] = h_in
        ok = True
        size = 1
        for e, s in zip(unit, local):
            labels[e] = s
            prev2, prev = labels.get(e - 2), labels.get(e - 1)
            if e == first and first >= 3:
                prev2 = _any_prev2(table, e, prev)
                if prev2 is None:
                    ok = False
                    break
            key = (e, (prev2, prev))
            if key not in table.thresholds:
                ok = False
                break
            a, b = interval(table, e, prev2, prev, s)
            size *= b - a
        if ok and (h_out is None or labels[unit[-1]] == h_out) and size:
            total += size
    return total


def _any_prev2(table, e, prev):
    vals = {table.thresholds[(e, (p2, prev))] for p2 in (0, 1) if (e, (p2, prev)) in table.thresholds}
    if not vals:
        return None
    assert len(vals) == 1, "threshold depends on an edge outside its unit"
    return next(p2 for p2 in (0, 1) if (e, (p2, prev)) in table.thresholds)


def _unit_trace(table, unit, letters, h_in, h_out) -> complex:
    if not letters:
        return complex(_unit_dimension(table, unit, h_in, h_out))
    n = table.num_edges
    beta = table.beta
    first = unit[0]
    prefix = _prefix_registers(table, first, h_in) if first > 1 else np.zeros(0, dtype=np.int64)
    if prefix is None:
        return 0j
    k = len(unit)
    if beta * k > MAX_BLOCK_QUBITS:
        raise ValueError(f"unit of {beta * k} qubits exceeds the cap {MAX_BLOCK_QUBITS}")
    size = 2 ** (beta * k)
    idx = np.arange(size, dtype=np.int64)
    mask = 2**beta - 1
    regs = np.zeros((size, n), dtype=np.int64)
    regs[:, : first - 1] = prefix
    for j, e in enumerate(unit):
        regs[:, e - 1] = (idx >> (beta * (k - 1 - j))) & mask
    labels = decode_array(regs[:, : unit[-1]], table)
    keep = labels[:, unit[-1] - 1] == h_out if h_out is not None else np.ones(size, dtype=bool)
    keep &= (labels >= 0).all(axis=1)
    if not keep.any():
        return 0j
    strings = StringSet(regs[keep], [e - 1 for e in unit], table)
    op = _word_operator(None, strings, letters)
    return complex(op.diagonal().sum())


def encoded_word_trace(word: MCGWord, beta: int) -> complex:
    """Normalized trace of the encoded word, exact, without the full matrix.

    Every generator preserves the horizontal labels and acts inside one unit
    of registers, so the trace is a sum over horizontal label sequences of
    products of per-unit traces.
    """
    g = word.genus
    table = thresholds(g, beta)
    units = _units(g)
    per_unit: list[list] = [[] for _ in units]
    chain = []
    for gen, exp in word.letters:
        u = _unit_of(gen)
        if u is None:
            chain.append((gen.cut_edge, exp))
        else:
            per_unit[u].append((gen, exp))

    cache: dict = {}

    def unit_trace(u, h_in, h_out):
        key = (u, h_in, h_out)
        if key not in cache:
            cache[key] = _unit_trace(table, units[u], per_unit[u], h_in, h_out)
        return cache[key]

    total = 0j
    for hs in itertools.product((0, 1), repeat=g - 1):
        h_of = {3 * k - 1: hs[k - 1] for k in range(1, g)}
        term = complex(np.prod([twist_phase(h_of[e]) ** exp for e, exp in chain])) if chain else 1
        for u in range(len(units)):
            h_in = hs[u - 1] if u >= 1 else None
            h_out = hs[u] if u < g - 1 else None
            term *= unit_trace(u, h_in, h_out)
            if term == 0:
                break
        total += term
    return total / 2**table.num_qubits


def bias_bound(g: int, word_length: int, beta: int) -> float:
    return BIAS_CONSTANT * g * max(word_length, 1) * 2.0**-beta


def encoding_error(word: MCGWord, beta: int) -> float:
    """|encoded normalized trace - normalized WRT|."""
    return abs(encoded_word_trace(word, beta) - wrt_invariant(word)[1])
