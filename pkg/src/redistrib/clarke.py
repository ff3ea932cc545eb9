"""Clarke pivotal payments, leave-k-out surpluses, and the subset-surplus cache.

Two engines compute optimal-assignment values over agent subsets:

* a pure-Python one (exact for int/Fraction bids), used by :class:`SurplusCache`;
* a vectorized numpy one (``subset_value_table`` / ``subset_surplus_table``)
  for the simulation harness.  With bids that are integers, or dyadic
  rationals on a coarse enough grid, the float64 results are exact because
  every intermediate sum fits in the 53-bit mantissa.

Agent subsets are encoded as bitmasks over 0-indexed agents: bit i set means
agent i is PRESENT.
"""
from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional

import numpy as np

from .core import Allocation, BidProfile, optimal_allocation

MAX_SUBSET_AGENTS = 16


def mask_of(agents: Iterable[int]) -> int:
    m = 0
    for a in agents:
        m |= 1 << a
    return m


def agents_of(mask: int) -> list:
    out = []
    while mask:
        bit = mask & -mask
        out.append(bit.bit_length() - 1)
        mask ^= bit
    return out


class SurplusCache:
    """Memoizes optimal-assignment values and Clarke surpluses per agent subset.

    Keyed by the PRESENT set, so leave-k-out computations for different pivot
    agents share entries.  Exact when the profile's bids are ints/Fractions.
    """

    def __init__(self, profile: BidProfile):
        if profile.n > MAX_SUBSET_AGENTS:
            raise ValueError(
                f"subset-surplus work is exponential in n; n={profile.n} exceeds "
                f"the supported maximum {MAX_SUBSET_AGENTS}")
        self.profile = profile
        self._values = {0: 0}
        self._surpluses = {}
        self._full = False

    def value(self, present_mask: int):
        """Optimal assignment value restricted to the present agents."""
        v = self._values.get(present_mask)
        if v is None:
            agents = agents_of(present_mask)
            excluded = set(range(self.profile.n)) - set(agents)
            v = optimal_allocation(self.profile, excluded).value
            self._values[present_mask] = v
        return v

    def surplus(self, present_mask: int):
        """Total Clarke payment collected from the present agents.

        Uses the identity t = sum_i v(k*_{-i}) - (|S|-1) v(k*), which depends
        only on optimal values and hence not on any tie-breaking rule.
        """
        if present_mask == 0:
            raise ValueError("present set must be non-empty")
        s = self._surpluses.get(present_mask)
        if s is None:
            size = present_mask.bit_count()
            total = -(size - 1) * self.value(present_mask)
            m = present_mask
            while m:
                bit = m & -m
                total += self.value(present_mask ^ bit)
                m ^= bit
            s = total
            self._surpluses[present_mask] = s
        return s

    def populate_all(self):
        """Fill the value table for every agent subset in one DP sweep."""
        if self._full:
            return
        bids = self.profile.bids
        n, p = self.profile.n, self.profile.p
        size = 1 << n
        f = [0] * size
        for j in range(p):
            g = f
            f = g[:]
            for mask in range(1, size):
                best = f[mask]
                m = mask
                while m:
                    bit = m & -m
                    a = bit.bit_length() - 1
                    cand = bids[a][j] + g[mask ^ bit]
                    if cand > best:
                        best = cand
                    m ^= bit
                f[mask] = best
        self._values = dict(enumerate(f))
        self._full = True


def clarke_payments(profile: BidProfile, present: Optional[Iterable[int]] = None,
                    cache: Optional[SurplusCache] = None,
                    tie_break: str = "min"):
    """Per-agent Clarke pivotal payments and the total surplus.

    Returns ``(payments, surplus)`` where payments maps each present agent i
    to t_i = v_i(k*) - (v(k*) - v(k*_{-i})).  Individual payments depend on
    the allocation tie-break; the surplus does not.
    """
    present = set(range(profile.n)) if present is None else set(present)
    if not present:
        raise ValueError("present set must be non-empty")
    excluded = set(range(profile.n)) - present
    alloc = optimal_allocation(profile, excluded, tie_break=tie_break)
    base = alloc.value
    payments = {}
    for i in sorted(present):
        if cache is not None:
            without = cache.value(mask_of(present - {i}))
        else:
            without = optimal_allocation(profile, excluded | {i}).value
        obj = alloc.object_of(i)
        vi = profile.bids[i][obj] if obj is not None else 0
        payments[i] = vi - (base - without)
    return payments, sum(payments.values())


def clarke_surplus(profile: BidProfile, present: Optional[Iterable[int]] = None,
                   cache: Optional[SurplusCache] = None):
    """Total Clarke payment for the given present set (tie-break independent)."""
    present = set(range(profile.n)) if present is None else set(present)
    if not present:
        raise ValueError("present set must be non-empty")
    if cache is None:
        cache = SurplusCache(profile)
    return cache.surplus(mask_of(present))


def averaged_surplus(profile: BidProfile, i: int, k: int,
                     cache: Optional[SurplusCache] = None):
    """Mean Clarke surplus over all ways of removing agent i and k others.

    Written t^{-i,k}; k=0 reduces to the leave-one-out surplus t^{-i}.  Exact rational
    when the profile is exact (the division by C(n-1, k) is done in
    Fraction arithmetic).
    """
    n, p = profile.n, profile.p
    if not 0 <= i < n:
        raise ValueError(f"agent {i} out of range")
    if not 0 <= k <= n - p - 2:
        raise ValueError(f"k={k} outside [0, n-p-2] for n={n}, p={p}")
    if cache is None:
        cache = SurplusCache(profile)
    others = [a for a in range(n) if a != i]
    total = 0
    count = 0
    for removed in combinations(others, k):
        present = mask_of(set(others) - set(removed))
        total += cache.surplus(present)
        count += 1
    if isinstance(total, (int, Fraction)):
        return Fraction(total, 1) / count
    return total / count


def pivotal_agent_count(profile: BidProfile,
                        cache: Optional[SurplusCache] = None) -> int:
    """Number of agents i with t^{-i} != t (never more than 2p)."""
    if cache is None:
        cache = SurplusCache(profile)
    full = (1 << profile.n) - 1
    t = cache.surplus(full)
    return sum(1 for i in range(profile.n)
               if cache.surplus(full ^ (1 << i)) != t)


# ---------------------------------------------------------------------------
# Vectorized float engine

_INDEX_CACHE: dict = {}


def _mask_indices(n: int):
    """Per-agent arrays of masks containing / not containing each agent."""
    cached = _INDEX_CACHE.get(n)
    if cached is None:
        masks = np.arange(1 << n, dtype=np.int64)
        popcount = np.zeros(1 << n, dtype=np.int64)
        for a in range(n):
            popcount += (masks >> a) & 1
        with_bit = [np.nonzero(masks & (1 << a))[0] for a in range(n)]
        without_bit = [np.nonzero((masks & (1 << a)) == 0)[0] for a in range(n)]
        cached = (popcount, with_bit, without_bit)
        _INDEX_CACHE[n] = cached
    return cached


def subset_value_table(bids: np.ndarray) -> np.ndarray:
    """Optimal assignment value for every present-set mask, shape (2^n,)."""
    bids = np.asarray(bids, dtype=np.float64)
    n, p = bids.shape
    if n > MAX_SUBSET_AGENTS:
        raise ValueError(f"n={n} exceeds the supported maximum {MAX_SUBSET_AGENTS}")
    _, with_bit, _ = _mask_indices(n)
    f = np.zeros(1 << n)
    for j in range(p):
        g = f
        f = g.copy()
        for a in range(n):
            idx = with_bit[a]
            f[idx] = np.maximum(f[idx], bids[a, j] + g[idx ^ (1 << a)])
    return f


def subset_surplus_table(values: np.ndarray, n: int) -> np.ndarray:
    """Clarke surplus for every present-set mask, from the value table."""
    popcount, with_bit, _ = _mask_indices(n)
    s = -(popcount - 1).astype(np.float64) * values
    for a in range(n):
        idx = with_bit[a]
        s[idx] += values[idx ^ (1 << a)]
    s[0] = 0.0
    return s


def removal_surplus_sums(surpluses: np.ndarray, n: int) -> np.ndarray:
    """sums[i][m] = sum of surpluses over present sets of size m excluding agent i.

    Gives t^{-i,k} = sums[i][n-1-k] / C(n-1, k) for 0 <= k <= n-2.
    """
    popcount, _, without_bit = _mask_indices(n)
    out = np.zeros((n, n))
    for i in range(n):
        idx = without_bit[i]
        out[i] = np.bincount(popcount[idx], weights=surpluses[idx], minlength=n)[:n]
    return out


def profile_surplus_tables(profile: BidProfile):
    """(values, surpluses) float tables for all present-set masks of a profile."""
    bids = np.array([[float(x) for x in row] for row in profile.bids])
    values = subset_value_table(bids)
    return values, subset_surplus_table(values, profile.n)
