"""Non-linear rebate rules for heterogeneous objects.

BAILEY-CAVALLO shares out each agent's leave-one-out surplus; HETERO forms an
alpha-weighted sum of leave-k-out average surpluses, with the alphas
calibrated so that the rule coincides with WCO whenever the objects are
identical.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Optional, Sequence

from .clarke import SurplusCache, averaged_surplus, mask_of
from .core import BidProfile
from .wco import wco_coefficients


@dataclass(frozen=True)
class HeteroCoefficients:
    """The alpha-vector of the HETERO rebate rule; L = n - p - 1 weights."""

    n: int
    p: int
    alpha: tuple  # Fractions, alpha[0] = alpha_1 .. alpha[L-1] = alpha_L

    @property
    def L(self) -> int:
        return self.n - self.p - 1


def bailey_cavallo_rebates(profile: BidProfile,
                           cache: Optional[SurplusCache] = None) -> tuple:
    """Rebates r_i = t^{-i} / n.

    Individually rational (surpluses are nonnegative) and feasible (revenue
    monotonicity gives t^{-i} <= t).  Exact rationals for exact profiles.
    """
    n = profile.n
    if cache is None:
        cache = SurplusCache(profile)
    full = (1 << n) - 1
    exact = profile.is_exact()
    out = []
    for i in range(n):
        t_minus_i = cache.surplus(full ^ (1 << i))
        if exact:
            out.append(Fraction(t_minus_i, 1) / n)
        else:
            out.append(t_minus_i / n)
    return tuple(out)


def _averaged_surplus_weight(n: int, p: int, l: int, k: int) -> Fraction:
    """Coefficient of the (p+1+l)-th highest value in the homogeneous t^{-i,k-1}.

    Removing agent i plus k-1 of the other n-1 agents leaves the surplus
    p * (p+1-th highest remaining value); averaging over removal choices
    weights the (p+1+l)-th of the others by
    p * C(p+l, l) * C(n-p-2-l, k-1-l) / C(n-1, k-1).
    """
    if not 0 <= k - 1 - l <= n - p - 2 - l:
        return Fraction(0)
    return Fraction(p * comb(p + l, l) * comb(n - p - 2 - l, k - 1 - l),
                    comb(n - 1, k - 1))


def hetero_alphas(n: int, p: int) -> HeteroCoefficients:
    """Alpha weights making HETERO agree with WCO on homogeneous profiles.

    On a homogeneous profile, each t^{-i,k-1} is a fixed linear combination of
    the other agents' sorted values, so matching WCO's coefficients
    c_{p+1} .. c_{n-1} term by term gives a lower-triangular system; it is
    solved back to front in exact rationals.
    """
    if not (isinstance(n, int) and isinstance(p, int) and p >= 1 and n > p + 1):
        raise ValueError(f"HETERO needs n > p+1 >= 2, got n={n}, p={p}")
    L = n - p - 1
    c = wco_coefficients(n, p)
    alpha = [Fraction(0)] * (L + 1)  # 1-based
    for l in range(L - 1, -1, -1):
        # coefficient of the (p+1+l)-th sorted value: known alphas k > l+1 first
        acc = Fraction(0)
        for k in range(l + 2, L + 1):
            acc += alpha[k] * _averaged_surplus_weight(n, p, l, k)
        lead = _averaged_surplus_weight(n, p, l, l + 1)
        alpha[l + 1] = (c.coefficient(p + 1 + l) - acc) / lead
    return HeteroCoefficients(n, p, tuple(alpha[1:]))


def hetero_rebates(profile: BidProfile, coefficients: HeteroCoefficients,
                   cache: Optional[SurplusCache] = None) -> tuple:
    """Rebates r_i^H = sum_k alpha_k t^{-i,k-1} via exact subset enumeration.

    For bulk float evaluation use the table-based path in ``experiments``.
    """
    n, p = profile.n, profile.p
    if (coefficients.n, coefficients.p) != (n, p):
        raise ValueError(
            f"coefficients are for (n={coefficients.n}, p={coefficients.p}), "
            f"profile has (n={n}, p={p})")
    if cache is None:
        cache = SurplusCache(profile)
    cache.populate_all()
    out = []
    for i in range(n):
        r = sum(a_k * averaged_surplus(profile, i, k, cache)
                for k, a_k in enumerate(coefficients.alpha))
        out.append(r)
    return tuple(out)


def gamma_chain(profile: BidProfile, i: int,
                cache: Optional[SurplusCache] = None) -> list:
    """[Gamma_1, ..., Gamma_L] for agent i, Gamma_j = t^{-i,j-1}.

    Non-increasing and nonnegative; Gamma_2/Gamma_1 is the ratio tracked
    (never asserted) by the simulation harness.
    """
    if cache is None:
        cache = SurplusCache(profile)
    L = profile.n - profile.p - 1
    return [averaged_surplus(profile, i, j - 1, cache) for j in range(1, L + 1)]


def homogeneous_averaged_surplus_closed_form(n: int, p: int, k: int,
                                             others_sorted: Sequence):
    """Closed form for t^{-i,k-1} in the homogeneous case.

    ``others_sorted`` holds the n-1 values excluding the pivot agent, sorted
    descending.  Cross-check oracle for subset-enumeration averaging.
    """
    if len(others_sorted) != n - 1:
        raise ValueError(f"expected {n - 1} values, got {len(others_sorted)}")
    total = 0
    for l in range(k):
        w = _averaged_surplus_weight(n, p, l, k)
        if w:
            total += w * others_sorted[p + l]
    return total
