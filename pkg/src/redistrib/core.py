"""Domain types and the exact optimal-assignment engine.

Agents and objects are 0-indexed throughout.  Bid entries may be ints,
floats, or :class:`fractions.Fraction`; all value arithmetic stays in the
input's numeric type so that integer/rational instances are computed
exactly.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Iterable, Sequence

DEFAULT_ENUMERATION_CAP = 10**6


class EnumerationCapError(ValueError):
    """Raised when an instance is too large for exhaustive enumeration."""


def _is_finite(x) -> bool:
    if isinstance(x, float):
        return math.isfinite(x)
    return isinstance(x, Real)


@dataclass(frozen=True)
class BidProfile:
    """An n x p matrix of nonnegative bids, row i = agent i's bids."""

    bids: tuple

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.bids)
        object.__setattr__(self, "bids", rows)
        if not rows:
            raise ValueError("at least one agent required")
        p = len(rows[0])
        if p < 1:
            raise ValueError("at least one object required")
        for row in rows:
            if len(row) != p:
                raise ValueError("ragged bid matrix")
            for x in row:
                if not _is_finite(x) or x < 0:
                    raise ValueError(f"bids must be nonnegative and finite, got {x!r}")

    @property
    def n(self) -> int:
        return len(self.bids)

    @property
    def p(self) -> int:
        return len(self.bids[0])

    def is_exact(self) -> bool:
        """True when every entry is an int or Fraction (exact arithmetic)."""
        return all(isinstance(x, (int, Fraction)) for row in self.bids for x in row)

    def homogeneous_values(self):
        """Per-agent scalar values, or None if any row is not constant."""
        values = []
        for row in self.bids:
            if any(x != row[0] for x in row):
                return None
            values.append(row[0])
        return values

    def to_json_dict(self) -> dict:
        return {"n": self.n, "p": self.p,
                "bids": [[float(x) for x in row] for row in self.bids]}

    @classmethod
    def from_json_dict(cls, data: dict) -> "BidProfile":
        profile = cls(tuple(tuple(row) for row in data["bids"]))
        if profile.n != data.get("n", profile.n) or profile.p != data.get("p", profile.p):
            raise ValueError("declared (n, p) does not match the bid matrix")
        return profile


@dataclass(frozen=True)
class Allocation:
    """An injective agent->object assignment and its total bid value."""

    pairs: tuple
    value: object

    def __post_init__(self):
        pairs = tuple(sorted(tuple(pr) for pr in self.pairs))
        object.__setattr__(self, "pairs", pairs)
        agents = [a for a, _ in pairs]
        objects = [o for _, o in pairs]
        if len(set(agents)) != len(agents) or len(set(objects)) != len(objects):
            raise ValueError("allocation must be injective in agents and objects")

    def winners(self) -> frozenset:
        return frozenset(a for a, _ in self.pairs)

    def object_of(self, agent: int):
        for a, o in self.pairs:
            if a == agent:
                return o
        return None


@dataclass(frozen=True)
class MechanismOutcome:
    """Allocation, Clarke payments, rebates, and the redistributed fraction."""

    allocation: Allocation
    payments: tuple
    rebates: tuple
    surplus: object

    @property
    def fraction(self):
        """Redistributed fraction sum(r)/t, or None when the surplus is zero."""
        if self.surplus == 0:
            return None
        total = sum(self.rebates)
        if isinstance(total, Fraction) or isinstance(self.surplus, Fraction):
            return Fraction(total) / Fraction(self.surplus)
        return total / self.surplus


def _assignment_dp(bids, agents: Sequence[int], p: int):
    """DP table D[idx][T]: best value assigning objects in mask T to agents[idx:].

    Objects may be left unassigned (needed when fewer agents than objects);
    with nonnegative bids this never changes the optimal value otherwise.
    """
    m = len(agents)
    size = 1 << p
    table = [[0] * size for _ in range(m + 1)]
    for idx in range(m - 1, -1, -1):
        row = bids[agents[idx]]
        nxt = table[idx + 1]
        cur = table[idx]
        for mask in range(1, size):
            best = nxt[mask]
            t = mask
            while t:
                bit = t & -t
                j = bit.bit_length() - 1
                cand = row[j] + nxt[mask ^ bit]
                if cand > best:
                    best = cand
                t ^= bit
            cur[mask] = best
    return table


def optimal_allocation(profile: BidProfile, excluded: Iterable[int] = (),
                       tie_break: str = "min") -> Allocation:
    """Maximum-value injective assignment over the non-excluded agents.

    Among ties, returns the allocation whose sorted (agent, object) pair list
    is lexicographically smallest.  ``tie_break='max'`` instead resolves ties
    toward the largest agent/object indices (used to check that the total
    surplus does not depend on the tie-break).
    """
    if tie_break == "max":
        n, p = profile.n, profile.p
        excluded = set(excluded)
        flipped = BidProfile(tuple(
            tuple(profile.bids[n - 1 - i][p - 1 - j] for j in range(p))
            for i in range(n)))
        alloc = optimal_allocation(flipped, {n - 1 - i for i in excluded})
        return Allocation(tuple((n - 1 - a, p - 1 - o) for a, o in alloc.pairs),
                          alloc.value)
    if tie_break != "min":
        raise ValueError(f"unknown tie_break {tie_break!r}")

    excluded = set(excluded)
    if not excluded <= set(range(profile.n)):
        raise ValueError("excluded agents out of range")
    agents = [i for i in range(profile.n) if i not in excluded]
    p = profile.p
    if not agents:
        return Allocation((), 0)
    table = _assignment_dp(profile.bids, agents, p)

    pairs = []
    mask = (1 << p) - 1
    needed = table[0][mask]
    value = needed
    start = 0
    n_pairs = min(len(agents), p)
    while len(pairs) < n_pairs:
        found = False
        for idx in range(start, len(agents)):
            row = profile.bids[agents[idx]]
            for j in range(p):
                bit = 1 << j
                if mask & bit and row[j] + table[idx + 1][mask ^ bit] == needed:
                    pairs.append((agents[idx], j))
                    needed = table[idx + 1][mask ^ bit]
                    mask ^= bit
                    start = idx + 1
                    found = True
                    break
            if found:
                break
        assert found, "optimal allocation reconstruction failed"
    return Allocation(tuple(pairs), value)


def enumerate_allocations(profile: BidProfile,
                          cap: int = DEFAULT_ENUMERATION_CAP) -> list:
    """All injective assignments of the objects to distinct agents.

    Brute-force oracle; guarded by an enumeration cap on the count
    n!/(n-p)! (or p!/(p-n)! when p > n).
    """
    n, p = profile.n, profile.p
    count = math.perm(n, p) if n >= p else math.perm(p, n)
    if count > cap:
        raise EnumerationCapError(
            f"{count} allocations exceeds the enumeration cap {cap}")
    out = []
    if n >= p:
        for agents in itertools.permutations(range(n), p):
            pairs = tuple(zip(agents, range(p)))
            out.append(Allocation(pairs, sum(profile.bids[a][o] for a, o in pairs)))
    else:
        for objs in itertools.permutations(range(p), n):
            pairs = tuple(zip(range(n), objs))
            out.append(Allocation(pairs, sum(profile.bids[a][o] for a, o in pairs)))
    return out
