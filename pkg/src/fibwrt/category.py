"""Algebraic data of the Fibonacci anyon model.

Labels are the integers 0 (vacuum) and 1 (the tau anyon).  The only fusion
rule is that a trivalent vertex may not carry exactly two 0-labels.
"""
from __future__ import annotations

import cmath
import itertools
import math

import numpy as np

PHI = (1 + math.sqrt(5)) / 2
#: Total quantum dimension sqrt(1 + phi^2).
D = math.sqrt(1 + PHI**2)

LABELS = (0, 1)

IDENTITY_TOL = 1e-10
TABLE_TOL = 1e-12

_TWIST = (1 + 0j, cmath.exp(3j * math.pi / 5))
_OMEGA = cmath.exp(4j * math.pi / 5)

# D * S^i_{jk}, keyed by (i, j, k).
_S_TIMES_D = {
    (0, 0, 0): 1 + 0j,
    (0, 1, 0): PHI + 0j,
    (0, 0, 1): PHI + 0j,
    (0, 1, 1): 1 + PHI * _OMEGA,
    (1, 1, 1): math.sqrt(PHI) * (1 - _OMEGA),
}

_GOLDEN_BLOCK = np.array(
    [[1 / PHI, 1 / math.sqrt(PHI)], [1 / math.sqrt(PHI), -1 / PHI]]
)


def check_label(a: int) -> int:
    if a not in LABELS:
        raise ValueError(f"anyon label must be 0 or 1, got {a!r}")
    return a


def fusion_allowed(a: int, b: int, c: int) -> bool:
    """True unless exactly two of the three labels are 0."""
    return (a, b, c).count(0) != 2


def f_symbol(i: int, j: int, m: int, k: int, l: int, n: int) -> float:
    """F-move amplitude between the two fusion trees of outer legs (i, j, k; l).

    ``m`` is the channel of ``(i, j)`` (then ``(m, k) -> l``) and ``n`` the
    channel of ``(j, k)`` (then ``(i, n) -> l``).
    """
    if not (fusion_allowed(i, j, m) and fusion_allowed(m, k, l)):
        return 0.0
    if not (fusion_allowed(j, k, n) and fusion_allowed(i, n, l)):
        return 0.0
    if i == j == k == l == 1:
        return float(_GOLDEN_BLOCK[m, n])
    return 1.0


def f_matrix(i: int, j: int, k: int, l: int) -> np.ndarray:
    """2x2 array ``F[m, n]`` for fixed outer legs (zero rows/cols where inadmissible)."""
    return np.array([[f_symbol(i, j, m, k, l, n) for n in LABELS] for m in LABELS])


def s_symbol(i: int, j: int, k: int) -> complex:
    """Tabulated S-move amplitude S^i_{jk} (outer label i, loop labels j -> k)."""
    return _S_TIMES_D.get((i, j, k), 0j) / D


def s_block(i: int) -> np.ndarray:
    """The tabulated S^i as a 2x2 array over loop labels (j, k)."""
    return np.array([[s_symbol(i, j, k) for k in LABELS] for j in LABELS])


def twist_phase(label: int) -> complex:
    return _TWIST[check_label(label)]


def pentagon_residual() -> float:
    """Largest violation of the pentagon equation over all 2^9 label tuples.

    Uses F^{abc}_{d;ef} = f_symbol(a, b, e, c, d, f) and checks
    F^{fcd}_{e;gl} F^{abl}_{e;fk} = sum_h F^{abc}_{g;fh} F^{ahd}_{e;gk} F^{bcd}_{k;hl}.
    """

    def F(a, b, c, d, e, f):
        return f_symbol(a, b, e, c, d, f)

    worst = 0.0
    for a, b, c, d, e, f, g, k, l in itertools.product(LABELS, repeat=9):
        lhs = F(f, c, d, e, g, l) * F(a, b, l, e, f, k)
        rhs = sum(F(a, b, c, g, f, h) * F(a, h, d, e, g, k) * F(b, c, d, k, h, l) for h in LABELS)
        worst = max(worst, abs(lhs - rhs))
    return worst
