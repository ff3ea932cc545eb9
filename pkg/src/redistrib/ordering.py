"""Total preorder over agents induced by a heterogeneous bid profile.

Two agents are compared by repeatedly discarding the allocations that contain
both, then asking whose best remaining allocation is strictly more valuable;
value ties knock out the whole tied band and the question is asked again.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import (Allocation, BidProfile, DEFAULT_ENUMERATION_CAP,
                   enumerate_allocations)

VALUE_TIE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class AgentRanking:
    """Ordered equivalence classes of agents, best class first."""

    classes: tuple  # tuple of frozensets

    def position(self, agent: int) -> int:
        for idx, cls in enumerate(self.classes):
            if agent in cls:
                return idx
        raise KeyError(agent)

    def compare(self, i: int, j: int) -> int:
        """-1 if i ranks above j, 0 if equivalent, 1 if below."""
        pi, pj = self.position(i), self.position(j)
        return (pi > pj) - (pi < pj)


def _values_equal(a, b, exact: bool) -> bool:
    if exact:
        return a == b
    return abs(a - b) <= VALUE_TIE_TOLERANCE


def pairwise_relation(profile: BidProfile, i: int, j: int,
                      allocations: Optional[list] = None,
                      cap: int = DEFAULT_ENUMERATION_CAP) -> int:
    """-1 for i above j, 1 for j above i, 0 for equivalent."""
    if allocations is None:
        allocations = sorted(enumerate_allocations(profile, cap),
                             key=lambda a: a.value, reverse=True)
    exact = profile.is_exact()
    pool = [a for a in allocations
            if not (i in a.winners() and j in a.winners())]
    while pool:
        first = next((a for a in pool if i in a.winners() or j in a.winners()),
                     None)
        if first is None:
            return 0
        v = first.value
        best_i = next((a.value for a in pool if i in a.winners()), None)
        best_j = next((a.value for a in pool if j in a.winners()), None)
        has_i = best_i is not None and _values_equal(best_i, v, exact)
        has_j = best_j is not None and _values_equal(best_j, v, exact)
        if has_i and not has_j:
            return -1
        if has_j and not has_i:
            return 1
        # both agents tie at this value band; drop the band and recur
        pool = [a for a in pool if not _values_equal(a.value, v, exact)]
    return 0


def rank_agents(profile: BidProfile,
                cap: int = DEFAULT_ENUMERATION_CAP) -> AgentRanking:
    """Run the pairwise procedure for all agent pairs and form ordered classes.

    Transitivity of the induced relation is checked rather than assumed; a
    violation raises (it would make the class order ill-defined).
    """
    n = profile.n
    allocations = sorted(enumerate_allocations(profile, cap),
                         key=lambda a: a.value, reverse=True)
    rel = {}
    for i in range(n):
        for j in range(i + 1, n):
            rel[(i, j)] = pairwise_relation(profile, i, j, allocations)
            rel[(j, i)] = -rel[(i, j)]

    def above(i, j):
        return i != j and rel[(i, j)] == -1

    for i in range(n):
        for j in range(n):
            for k in range(n):
                if len({i, j, k}) == 3 and above(i, j) and above(j, k) \
                        and not above(i, k):
                    raise ValueError(
                        f"ranking is not transitive: {i} > {j} > {k} but not {i} > {k}")

    # sort agents by how many rank strictly above them; equivalents share a class
    dominated = {i: sum(1 for j in range(n) if above(j, i)) for i in range(n)}
    classes = []
    for i in sorted(range(n), key=lambda a: dominated[a]):
        if classes and dominated[next(iter(classes[-1]))] == dominated[i]:
            classes[-1].add(i)
        else:
            classes.append({i})
    # equivalence within a class must be genuine, not an artifact of counting
    for cls in classes:
        for a in cls:
            for b in cls:
                if a < b and rel[(a, b)] != 0:
                    raise ValueError("inconsistent pairwise relations")
    return AgentRanking(tuple(frozenset(c) for c in classes))
