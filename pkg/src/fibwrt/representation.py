"""Fibonacci representation of the Dehn-twist generators and WRT traces.

Generator numbering for genus g (3g - 1 generators):

* ``1..g``        MeridianCut: twist about the curve dual to a handle edge
                  (LeftLoop, the Upper edge of each bubble, RightLoop).
* ``g+1..2g-1``   ChainCut: twist about the curve dual to a Horizontal edge.
* ``2g..3g-1``    ThroughHandle: twist about the curve running through a handle.

Cut twists are diagonal in the standard-spine basis.  A ThroughHandle twist is
``B^-1 diag(theta) B`` where ``B`` is an F-move (interior handles only) that
turns the bubble into a loop on a stem, followed by a handle move on the loop.
"""
from __future__ import annotations

import enum
import functools
import itertools
import threading
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import category
from .category import LABELS, fusion_allowed, twist_phase
from .spine import enumerate_labelings, standard_spine

DEFAULT_MAX_DIMENSION = 2250  # genus 7


class Family(enum.Enum):
    MERIDIAN = "MeridianCut"
    CHAIN = "ChainCut"
    THROUGH = "ThroughHandle"


class HandleConvention(enum.Enum):
    """Which 2x2 block moves a one-holed torus to its dual loop.

    ``GOLDEN`` (default) is the real involution [[1/phi, 1/sqrt(phi)],
    [1/sqrt(phi), -1/phi]]; it is the only choice, up to diagonal phases,
    that keeps the handle twists unitary and braid-related for the twist
    phases (1, e^{3 pi i/5}).  ``TABULATED`` uses :func:`category.s_block`
    verbatim and ``STANDARD`` the textbook D^-1 [[1, phi], [phi, -1]]; both
    are kept for comparison.
    """

    GOLDEN = "golden"
    TABULATED = "tabulated"
    STANDARD = "standard"


def handle_block(stem: int, convention: HandleConvention = HandleConvention.GOLDEN) -> np.ndarray:
    """2x2 array ``B[k, j]`` taking loop label j to dual loop label k, for a given stem."""
    convention = HandleConvention(convention)
    if stem == 1:
        # Only the loop label 1 survives a stem labeled 1.
        value = category.s_symbol(1, 1, 1) if convention is HandleConvention.TABULATED else 1.0
        return np.array([[0, 0], [0, value]], dtype=complex)
    if convention is HandleConvention.TABULATED:
        return category.s_block(0).T.astype(complex)
    if convention is HandleConvention.STANDARD:
        return np.array([[1, category.PHI], [category.PHI, -1]], dtype=complex) / category.D
    return category.f_matrix(1, 1, 1, 1).astype(complex)


@dataclass(frozen=True, order=True)
class GeneratorId:
    genus: int
    index: int

    def __post_init__(self):
        if not isinstance(self.genus, int) or self.genus < 2:
            raise ValueError(f"genus must be an integer >= 2, got {self.genus!r}")
        top = 3 * self.genus - 1
        if not isinstance(self.index, int) or not 1 <= self.index <= top:
            raise ValueError(f"generator index {self.index!r} outside 1..{top} for genus {self.genus}")

    @property
    def family(self) -> Family:
        g = self.genus
        if self.index <= g:
            return Family.MERIDIAN
        if self.index <= 2 * g - 1:
            return Family.CHAIN
        return Family.THROUGH

    @property
    def handle(self) -> int:
        """Handle number 1..g for meridian and through-handle generators."""
        if self.family is Family.MERIDIAN:
            return self.index
        if self.family is Family.THROUGH:
            return self.index - (2 * self.genus - 1)
        raise AttributeError("chain-cut generators are not attached to a handle")

    @property
    def cut_edge(self) -> int:
        """Spine edge dual to the cut curve (diagonal generators only)."""
        g = self.genus
        if self.family is Family.MERIDIAN:
            return handle_edges(g, self.index)[0]
        if self.family is Family.CHAIN:
            k = self.index - g
            return 3 * k - 1
        raise AttributeError("through-handle twists are not diagonal")

    @property
    def is_diagonal(self) -> bool:
        return self.family is not Family.THROUGH


def handle_edges(g: int, handle: int) -> tuple[int, ...]:
    """Edges of a handle: ``(loop,)`` at the ends, ``(upper, lower)`` for bubbles."""
    if handle == 1:
        return (1,)
    if handle == g:
        return (3 * g - 3,)
    return (3 * handle - 3, 3 * handle - 2)


@dataclass(frozen=True)
class LocalMove:
    """A generator's action on the labels it changes, for fixed stem labels.

    ``changed`` are spine edges whose labels move, ``stems`` the edges whose
    labels select the block; ``block(stem_labels)`` returns the admissible
    local states (tuples over ``changed``) and the matrix acting on them.
    """

    changed: tuple[int, ...]
    stems: tuple[int, ...]
    gen: GeneratorId
    convention: HandleConvention

    def block(self, stem_labels: Sequence[int]) -> tuple[list[tuple[int, ...]], np.ndarray]:
        return _local_block(self.gen, self.convention, tuple(stem_labels))


def local_move(gen: GeneratorId, convention=HandleConvention.GOLDEN) -> LocalMove:
    convention = HandleConvention(convention)
    g = gen.genus
    if gen.is_diagonal:
        return LocalMove((), (gen.cut_edge,), gen, convention)
    h = gen.handle
    if h == 1:
        return LocalMove((1,), (2,), gen, convention)
    if h == g:
        n = 3 * g - 3
        return LocalMove((n,), (n - 1,), gen, convention)
    u, lw = handle_edges(g, h)
    return LocalMove((u, lw), (u - 1, lw + 1), gen, convention)


@functools.lru_cache(maxsize=None)
def _local_block(gen: GeneratorId, convention: HandleConvention, stems: tuple[int, ...]):
    theta = np.diag([twist_phase(0), twist_phase(1)])
    if gen.is_diagonal:
        return [()], np.array([[twist_phase(stems[0])]])
    g = gen.genus
    if gen.handle in (1, g):
        (stem,) = stems
        states = [(a,) for a in LABELS if fusion_allowed(a, a, stem)]
        idx = [s[0] for s in states]
        b = handle_block(stem, convention)[np.ix_(idx, idx)]
        return states, np.linalg.inv(b) @ theta[np.ix_(idx, idx)] @ b
    h_in, h_out = stems
    states = [
        (u, lw)
        for u, lw in itertools.product(LABELS, LABELS)
        if fusion_allowed(h_in, u, lw) and fusion_allowed(u, lw, h_out)
    ]
    # F-move: bubble (u, lw) -> loop u on a stem n joining h_in and h_out.
    moved = [(u, n) for u, n in itertools.product(LABELS, LABELS) if fusion_allowed(u, u, n) and fusion_allowed(h_in, n, h_out)]
    f = np.array([[category.f_symbol(h_in, u, lw, u2, h_out, n) if u == u2 else 0.0 for (u, lw) in states] for (u2, n) in moved])
    # Handle move on loop u with stem n, then twist the dual loop label k.
    s = np.zeros((len(moved), len(moved)), dtype=complex)
    t = np.zeros(len(moved), dtype=complex)
    for r, (k, n_out) in enumerate(moved):
        t[r] = twist_phase(k)
        for c, (u, n_in) in enumerate(moved):
            if n_in == n_out:
                s[r, c] = handle_block(n_in, convention)[k, u]
    basis_change = s @ f
    return states, np.linalg.inv(basis_change) @ np.diag(t) @ basis_change


class Representation:
    """Generator matrices for one genus over the lexicographic labeling basis."""

    def __init__(self, genus: int, convention=HandleConvention.GOLDEN, max_dimension: int = DEFAULT_MAX_DIMENSION):
        self.genus = genus
        self.convention = HandleConvention(convention)
        self.labelings = enumerate_labelings(standard_spine(genus))
        if len(self.labelings) > max_dimension:
            raise ValueError(
                f"genus {genus} has dimension {len(self.labelings)} > cap {max_dimension}"
            )
        self.index = {lab: i for i, lab in enumerate(self.labelings)}
        self._cache: dict[int, np.ndarray] = {}
        self._lock = threading.Lock()

    @property
    def dimension(self) -> int:
        return len(self.labelings)

    def generator(self, index: int) -> np.ndarray:
        m = self._cache.get(index)
        if m is None:
            m = self._build(GeneratorId(self.genus, index))
            m.setflags(write=False)
            with self._lock:
                m = self._cache.setdefault(index, m)
        return m

    def _build(self, gen: GeneratorId) -> np.ndarray:
        n = self.dimension
        move = local_move(gen, self.convention)
        if gen.is_diagonal:
            e = gen.cut_edge - 1
            return np.diag([twist_phase(lab[e]) for lab in self.labelings])
        m = np.zeros((n, n), dtype=complex)
        for col, lab in enumerate(self.labelings):
            states, block = move.block([lab[e - 1] for e in move.stems])
            src = states.index(tuple(lab[e - 1] for e in move.changed))
            for r, state in enumerate(states):
                new = list(lab)
                for e, v in zip(move.changed, state):
                    new[e - 1] = v
                m[self.index[tuple(new)], col] = block[r, src]
        return m

    def power(self, index: int, exponent: int) -> np.ndarray:
        m = self.generator(index)
        if exponent < 0:
            m = m.conj().T if self.convention is HandleConvention.GOLDEN else np.linalg.inv(m)
            exponent = -exponent
        return np.linalg.matrix_power(m, exponent)

    def evaluate(self, word: "MCGWord") -> np.ndarray:
        if word.genus != self.genus:
            raise ValueError(f"word genus {word.genus} != representation genus {self.genus}")
        result = np.eye(self.dimension, dtype=complex)
        for gen, exp in word.letters:
            result = result @ self.power(gen.index, exp)
        return result


@dataclass(frozen=True)
class MCGWord:
    """A product of Dehn twists, read left to right."""

    genus: int
    letters: tuple[tuple[GeneratorId, int], ...] = ()

    @classmethod
    def from_pairs(cls, genus: int, pairs) -> "MCGWord":
        letters = []
        for index, exp in pairs:
            if not isinstance(exp, int) or exp == 0:
                raise ValueError(f"exponent must be a nonzero integer, got {exp!r}")
            letters.append((GeneratorId(genus, index), exp))
        return cls(genus, tuple(letters))

    def inverse(self) -> "MCGWord":
        return MCGWord(self.genus, tuple((g, -e) for g, e in reversed(self.letters)))

    def __mul__(self, other: "MCGWord") -> "MCGWord":
        if other.genus != self.genus:
            raise ValueError("cannot multiply words of different genus")
        return MCGWord(self.genus, self.letters + other.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def pairs(self) -> list[tuple[int, int]]:
        return [(g.index, e) for g, e in self.letters]

    def __str__(self) -> str:
        if not self.letters:
            return "identity"
        return " ".join(f"T{g.index}" + (f"^{e}" if e != 1 else "") for g, e in self.letters)


_REPS: dict[tuple[int, HandleConvention], Representation] = {}
_REPS_LOCK = threading.Lock()


def representation(genus: int, convention=HandleConvention.GOLDEN) -> Representation:
    key = (genus, HandleConvention(convention))
    rep = _REPS.get(key)
    if rep is None:
        rep = Representation(genus, key[1])
        with _REPS_LOCK:
            rep = _REPS.setdefault(key, rep)
    return rep


def generator_matrix(gen: GeneratorId, convention=HandleConvention.GOLDEN) -> np.ndarray:
    return representation(gen.genus, convention).generator(gen.index)


def evaluate_word(word: MCGWord, convention=HandleConvention.GOLDEN) -> np.ndarray:
    return representation(word.genus, convention).evaluate(word)


def wrt_invariant(word: MCGWord, convention=HandleConvention.GOLDEN) -> tuple[complex, complex]:
    """Trace of the word's representation matrix and the trace divided by the dimension."""
    m = evaluate_word(word, convention)
    tr = complex(np.trace(m))
    return tr, tr / m.shape[0]


def unitarity_error(m: np.ndarray) -> float:
    return float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0]), ord=2))


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a @ b - b @ a, ord=2))


def braid_defect(a: np.ndarray, b: np.ndarray) -> float:
    """min over unit scalars lambda of ||ABA - lambda BAB||."""
    x, y = a @ b @ a, b @ a @ b
    inner = np.vdot(y, x)
    lam = inner / abs(inner) if abs(inner) > 0 else 1.0
    return float(np.linalg.norm(x - lam * y, ord=2))


def random_word(genus: int, length: int, rng: np.random.Generator, max_exponent: int = 2) -> MCGWord:
    pairs = []
    for _ in range(length):
        exp = 0
        while exp == 0:
            exp = int(rng.integers(-max_exponent, max_exponent + 1))
        pairs.append((int(rng.integers(1, 3 * genus)), exp))
    return MCGWord.from_pairs(genus, pairs)
