"""Worst-case-optimal linear rebates for homogeneous objects.

Coefficients, per-agent rebates, and the optimal redistribution index, all in
exact rational arithmetic (binomials grow past 64 bits quickly).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Optional, Sequence

from .core import BidProfile


@dataclass(frozen=True)
class RebateCoefficients:
    """The c-vector of a linear homogeneous rebate rule, indexed p+1 .. n-1."""

    n: int
    p: int
    c: tuple  # Fractions; c[idx] is the coefficient c_{p+1+idx}

    def coefficient(self, i: int) -> Fraction:
        """c_i for i in p+1 .. n-1."""
        if not self.p + 1 <= i <= self.n - 1:
            raise IndexError(f"coefficient index {i} outside [{self.p + 1}, {self.n - 1}]")
        return self.c[i - self.p - 1]


def _check_np(n: int, p: int):
    if not (isinstance(n, int) and isinstance(p, int) and n > p >= 1):
        raise ValueError(f"need integers n > p >= 1, got n={n}, p={p}")


def wco_coefficients(n: int, p: int) -> RebateCoefficients:
    """Exact coefficients c_{p+1} .. c_{n-1} of the WCO rebate rule."""
    _check_np(n, p)
    tail_total = sum(comb(n - 1, j) for j in range(p, n))
    coeffs = []
    for i in range(p + 1, n):
        tail_i = sum(comb(n - 1, j) for j in range(i, n))
        sign = -1 if (i + p - 1) % 2 else 1
        num = sign * (n - p) * comb(n - 1, p - 1) * tail_i
        den = i * comb(n - 1, i) * tail_total
        coeffs.append(Fraction(num, den))
    return RebateCoefficients(n, p, tuple(coeffs))


def wco_index(n: int, p: int) -> Fraction:
    """The optimal worst-case redistribution fraction e* for (n, p)."""
    _check_np(n, p)
    tail_total = sum(comb(n - 1, j) for j in range(p, n))
    return 1 - Fraction(comb(n - 1, p), tail_total)


def wco_rebate(others: Sequence, n: int, p: int,
               coeffs: Optional[RebateCoefficients] = None):
    """Rebate to an agent given the other n-1 agents' scalar values.

    The rebate is sum_{j=p+1}^{n-1} c_j y_j with y the others sorted
    descending; it never touches the agent's own value.
    """
    if len(others) != n - 1:
        raise ValueError(f"expected {n - 1} other values, got {len(others)}")
    if coeffs is None:
        coeffs = wco_coefficients(n, p)
    y = sorted(others, reverse=True)
    return sum(c * y[j] for j, c in zip(range(p, n - 1), coeffs.c))


def wco_rebates(profile: BidProfile,
                coeffs: Optional[RebateCoefficients] = None) -> tuple:
    """Per-agent WCO rebates for a homogeneous (constant-row) bid profile."""
    values = profile.homogeneous_values()
    if values is None:
        raise ValueError("WCO requires a homogeneous profile (constant rows)")
    n, p = profile.n, profile.p
    if coeffs is None:
        coeffs = wco_coefficients(n, p)
    return tuple(
        wco_rebate(values[:i] + values[i + 1:], n, p, coeffs)
        for i in range(n))


def prefix_dominance(a: Sequence) -> bool:
    """True iff sum(a_i x_i) >= 0 for every sorted nonnegative x.

    Equivalent to all prefix sums of ``a`` being nonnegative.
    """
    total = 0
    for x in a:
        total += x
        if total < 0:
            return False
    return True


def prefix_violation_witness(a: Sequence):
    """A sorted nonnegative x with sum(a_i x_i) < 0, or None if none exists.

    The witness is the indicator vector of the first violating prefix.
    """
    total = 0
    for j, x in enumerate(a):
        total += x
        if total < 0:
            return [1] * (j + 1) + [0] * (len(a) - j - 1)
    return None
