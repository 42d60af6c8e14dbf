"""Standard spines of closed and punctured surfaces and their labelings.

The standard spine of the genus-g surface is a chain: a self-loop at each
end, ``g - 2`` interior "bubbles" (an Upper and a Lower edge joining the same
two vertices) and ``g - 1`` Horizontal connectors.  Edges are numbered from 1
in the order LeftLoop, Horizontal, then (Upper, Lower, Horizontal) per bubble,
and RightLoop last, so every vertex constraint involves an edge and at most
the two edges before it.

A punctured end replaces the end loop by a bubble whose outer vertex carries
an external edge with a fixed label.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .category import check_label, fusion_allowed

TRANSFER = ((2, 1), (1, 3))
#: Number of end-handle completions given the adjacent horizontal label; the
#: same vector describes a puncture labeled 0 (index 0) or 1 (index 1).
END_VECTOR = {0: (2, 1), 1: (1, 3)}


class EdgeClass(enum.Enum):
    LEFT_LOOP = "L"
    RIGHT_LOOP = "R"
    UPPER = "U"
    LOWER = "Lw"
    HORIZONTAL = "H"


@dataclass(frozen=True)
class Edge:
    index: int
    kind: EdgeClass
    ends: tuple[int, int]


@dataclass(frozen=True)
class Puncture:
    vertex: int
    label: int


@dataclass(frozen=True)
class SpineGraph:
    genus: int
    edges: tuple[Edge, ...]
    punctures: tuple[Puncture, ...] = ()
    # Per vertex: edge indices (loops appear twice) and fixed puncture labels.
    vertices: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...] = field(default=(), repr=False)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def edge(self, index: int) -> Edge:
        return self.edges[index - 1]

    def kinds(self) -> list[str]:
        return [e.kind.value for e in self.edges]

    def is_consistent(self, labels: Sequence[int]) -> bool:
        return all(_vertex_ok(v, labels) for v in self.vertices)


def _vertex_ok(vertex, labels) -> bool:
    edge_ids, fixed = vertex
    return fusion_allowed(*([labels[i - 1] for i in edge_ids] + list(fixed)))


class _Builder:
    def __init__(self):
        self.edges: list[Edge] = []
        self.nverts = 0

    def vertex(self) -> int:
        self.nverts += 1
        return self.nverts - 1

    def add(self, kind: EdgeClass, u: int, v: int) -> None:
        self.edges.append(Edge(len(self.edges) + 1, kind, (u, v)))


def standard_spine(g: int, punctures: Optional[Sequence[Optional[int]]] = None) -> SpineGraph:
    """Standard spine of the genus-``g`` surface.

    ``punctures`` is an optional ``(left, right)`` pair; a non-None entry puts
    an external edge with that fixed label at the corresponding end vertex.
    """
    if not isinstance(g, int) or g < 2:
        raise ValueError(f"genus must be an integer >= 2, got {g!r}")
    left, right = punctures if punctures is not None else (None, None)
    b = _Builder()
    fixed: list[Puncture] = []

    if left is None:
        cur = b.vertex()
        b.add(EdgeClass.LEFT_LOOP, cur, cur)
    else:
        outer = b.vertex()
        fixed.append(Puncture(outer, check_label(left)))
        cur = b.vertex()
        b.add(EdgeClass.UPPER, outer, cur)
        b.add(EdgeClass.LOWER, outer, cur)
    for _ in range(g - 2):
        a = b.vertex()
        b.add(EdgeClass.HORIZONTAL, cur, a)
        c = b.vertex()
        b.add(EdgeClass.UPPER, a, c)
        b.add(EdgeClass.LOWER, a, c)
        cur = c
    end = b.vertex()
    b.add(EdgeClass.HORIZONTAL, cur, end)
    if right is None:
        b.add(EdgeClass.RIGHT_LOOP, end, end)
    else:
        outer = b.vertex()
        b.add(EdgeClass.UPPER, end, outer)
        b.add(EdgeClass.LOWER, end, outer)
        fixed.append(Puncture(outer, check_label(right)))

    incident: list[list[int]] = [[] for _ in range(b.nverts)]
    for e in b.edges:
        incident[e.ends[0]].append(e.index)
        incident[e.ends[1]].append(e.index)
    fixed_at: list[list[int]] = [[] for _ in range(b.nverts)]
    for p in fixed:
        fixed_at[p.vertex].append(p.label)
    vertices = tuple((tuple(incident[v]), tuple(fixed_at[v])) for v in range(b.nverts))
    assert all(len(i) + len(f) == 3 for i, f in vertices)
    return SpineGraph(g, tuple(b.edges), tuple(fixed), vertices)


def enumerate_labelings(spine: SpineGraph) -> list[tuple[int, ...]]:
    """All fusion-consistent labelings, in lexicographic order."""
    n = spine.num_edges
    # Check each vertex as soon as its last edge is assigned.
    due: list[list] = [[] for _ in range(n + 1)]
    for v in spine.vertices:
        due[max(v[0])].append(v)
    out: list[tuple[int, ...]] = []
    labels = [0] * n

    def extend(i: int) -> None:
        if i == n:
            out.append(tuple(labels))
            return
        for s in (0, 1):
            labels[i] = s
            if all(_vertex_ok(v, labels) for v in due[i + 1]):
                extend(i + 1)

    extend(0)
    return out


def brute_force_count(spine: SpineGraph) -> int:
    """Count consistent labelings by testing every one of the 2^E strings."""
    n = spine.num_edges
    codes = np.arange(2**n, dtype=np.int64)
    ok = np.ones(len(codes), dtype=bool)
    for edge_ids, fixed in spine.vertices:
        zeros = np.full(len(codes), sum(f == 0 for f in fixed), dtype=np.int8)
        for i in edge_ids:
            zeros += ((codes >> (n - i)) & 1 == 0).astype(np.int8)
        ok &= zeros != 2
    return int(ok.sum())


@dataclass(frozen=True)
class CompletionVector:
    z0: int
    z1: int

    def __getitem__(self, b: int) -> int:
        return (self.z0, self.z1)[b]


def _matmul2(a, b):
    return (
        (a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]),
        (a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]),
    )


def _matpow2(m, p: int):
    result = ((1, 0), (0, 1))
    while p:
        if p & 1:
            result = _matmul2(result, m)
        m = _matmul2(m, m)
        p >>= 1
    return result


def completion_vector(n: int) -> CompletionVector:
    """(Z0, Z1): completions right of the n-th horizontal edge counted from the right."""
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"depth must be an integer >= 1, got {n!r}")
    m = _matpow2(TRANSFER, n - 1)
    v0, v1 = END_VECTOR[0]
    return CompletionVector(m[0][0] * v0 + m[0][1] * v1, m[1][0] * v0 + m[1][1] * v1)


def labeling_count(g: int) -> int:
    """Number of consistent labelings of the closed genus-g spine."""
    if g < 2:
        raise ValueError(f"genus must be >= 2, got {g}")
    z = completion_vector(g - 1)
    return END_VECTOR[0][0] * z.z0 + END_VECTOR[0][1] * z.z1


def edge_class(g: int, i: int) -> EdgeClass:
    """Class of edge ``i`` on the closed genus-g standard spine."""
    n = 3 * g - 3
    if not 1 <= i <= n:
        raise ValueError(f"edge index {i} out of range 1..{n}")
    if i == 1:
        return EdgeClass.LEFT_LOOP
    if i == n:
        return EdgeClass.RIGHT_LOOP
    return (EdgeClass.UPPER, EdgeClass.LOWER, EdgeClass.HORIZONTAL)[i % 3]


def horizontal_depth(g: int, i: int) -> int:
    """For a horizontal edge, its position counted from the right (1 = rightmost)."""
    k = (i + 1) // 3  # k-th horizontal from the left
    return g - k


def completions_after_prefix(g: int, i: int, window: Sequence[Optional[int]]) -> int:
    """Consistent full labelings extending a prefix ending at edge ``i``.

    ``window`` holds ``(s_{i-2}, s_{i-1}, s_i)``; shorter windows are read
    right-aligned and earlier labels are never consulted.
    """
    window = tuple(window)
    s = window[-1]
    prev = window[-2] if len(window) >= 2 else None
    prev2 = window[-3] if len(window) >= 3 else None
    kind = edge_class(g, i)

    def tail(h_label: int, depth: int) -> int:
        return completion_vector(depth)[h_label]

    if kind is EdgeClass.LEFT_LOOP:
        return sum(tail(h, g - 1) for h in (0, 1) if fusion_allowed(s, s, h))
    if kind is EdgeClass.RIGHT_LOOP:
        return int(fusion_allowed(prev, s, s))
    if kind is EdgeClass.HORIZONTAL:
        ok = fusion_allowed(prev, prev, s) if i == 2 else fusion_allowed(prev2, prev, s)
        return tail(s, horizontal_depth(g, i)) if ok else 0
    h_in = prev if kind is EdgeClass.UPPER else prev2
    depth = horizontal_depth(g, i + (2 if kind is EdgeClass.UPPER else 1))
    uppers = (s,) if kind is EdgeClass.UPPER else (prev,)
    lowers = (0, 1) if kind is EdgeClass.UPPER else (s,)
    total = 0
    for u, lw in itertools.product(uppers, lowers):
        if not fusion_allowed(h_in, u, lw):
            continue
        total += sum(tail(h, depth) for h in (0, 1) if fusion_allowed(u, lw, h))
    return total


def conditional_probability(g: int, i: int, context: Sequence[Optional[int]], s: int) -> Fraction:
    """P(s_i = s | s_{i-2}, s_{i-1}) under the uniform distribution on labelings."""
    context = tuple(context)[-2:]
    counts = [completions_after_prefix(g, i, context + (b,)) for b in (0, 1)]
    total = sum(counts)
    if total == 0:
        raise ValueError(f"context {context} at edge {i} admits no completion")
    return Fraction(counts[check_label(s)], total)


def count_punctured(genus: int, labels: Sequence[Optional[int]]) -> int:
    """Consistent labelings of the genus spine with end punctures ``(left, right)``."""
    return len(enumerate_labelings(standard_spine(genus, punctures=labels)))


def punctured_count_by_transfer(genus: int, left: int, right: int) -> int:
    """Same count as :func:`count_punctured` for two punctures, via the 2x2 transfer matrix."""
    m = _matpow2(TRANSFER, genus - 2)
    a, b = END_VECTOR[left], END_VECTOR[right]
    return sum(a[x] * m[x][y] * b[y] for x in (0, 1) for y in (0, 1))
