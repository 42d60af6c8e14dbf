"""Parameters for embedding a-dimensional qudits into d b-dimensional qudits.

Each a-level qudit is stored in ``d`` b-level registers: a subspace of size
``c * a`` carries the qudit tensored with a c-dimensional gauge factor, and
the remaining ``b**d - c*a`` states are left alone by the encoded circuit.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

import mpmath

_DPS = 60


@dataclass(frozen=True)
class EncodingPlan:
    a: int
    b: int
    n: int
    delta_target: Fraction
    d: int
    c: int

    @property
    def fill(self) -> Fraction:
        """c*a / b^d, the fraction of register states carrying the qudit."""
        return Fraction(self.c * self.a, self.b**self.d)

    @property
    def delta(self) -> Fraction:
        return 1 - self.fill

    def as_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "n": self.n,
            "delta_target": float(self.delta_target),
            "d": self.d,
            "c": self.c,
            "ca": self.c * self.a,
            "b_pow_d": self.b**self.d,
            "delta": float(self.delta),
        }


def _exact(x) -> Fraction:
    return Fraction(x) if not isinstance(x, float) else Fraction(repr(x))


def plan(a: int, b: int, n: int, delta) -> EncodingPlan:
    """Smallest d with b^d >= 2na/delta, and c = floor(b^d / a)."""
    if not (isinstance(a, int) and isinstance(b, int) and a >= 2 and b >= 2):
        raise ValueError(f"a and b must be integers >= 2, got a={a!r}, b={b!r}")
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n!r}")
    if not isinstance(delta, (Real, Fraction)):
        raise ValueError(f"delta must be a real number, got {delta!r}")
    dt = _exact(delta)
    if not 0 < dt < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")
    need = 2 * n * a / dt
    d, power = 0, 1
    while power < need:
        d += 1
        power *= b
    return EncodingPlan(a, b, n, dt, d, power // a)


def trace_discrepancy(p: EncodingPlan, normalized_trace_a: complex) -> float:
    """|normalized trace of the encoded circuit - normalized trace of the original|.

    The encoded trace is (c^n tr_a a^n + b^(dn) - (ca)^n) / b^(dn) with
    tr_a the normalized trace; every power is formed exactly.
    """
    if abs(normalized_trace_a) > 1 + 1e-12:
        raise ValueError(f"normalized trace must have modulus <= 1, got {normalized_trace_a!r}")
    r = p.fill**p.n  # (ca / b^d)^n, exact
    with mpmath.workdps(_DPS):
        t = mpmath.mpc(normalized_trace_a)
        rr = mpmath.mpf(r.numerator) / r.denominator
        value = (rr - 1) * t + (1 - rr)
        return float(abs(value))


def discrepancy_bound(p: EncodingPlan) -> float:
    """2 |(1 - delta)^n - 1|."""
    return float(2 * abs(p.fill**p.n - 1))
