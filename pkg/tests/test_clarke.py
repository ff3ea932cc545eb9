import random
from fractions import Fraction

import numpy as np
import pytest

from redistrib.clarke import (SurplusCache, averaged_surplus, clarke_payments,
                              clarke_surplus, mask_of, pivotal_agent_count,
                              profile_surplus_tables, removal_surplus_sums)
from redistrib.core import BidProfile

from conftest import random_int_profile

WORKED_PROFILE = BidProfile(((4, 5), (2, 1), (1, 4), (1, 0)))


def homogeneous(values, p=1):
    return BidProfile(tuple((v,) * p for v in values))


class TestClarkePayments:
    def test_worked_example(self):
        payments, surplus = clarke_payments(WORKED_PROFILE)
        assert payments == {0: 2, 1: 0, 2: 3, 3: 0}
        assert surplus == 5

    def test_homogeneous_winner_pays_next_value(self):
        payments, _ = clarke_payments(homogeneous((10, 8, 5)))
        assert payments == {0: 8, 1: 0, 2: 0}

    def test_staircase_profile_total(self):
        prof = BidProfile(((3, 2), (2, 1), (0, 0), (0, 0)))
        _, surplus = clarke_payments(prof)
        assert surplus == 1

    def test_payments_nonnegative_nonwinners_zero(self, rng):
        from redistrib.core import optimal_allocation
        for _ in range(60):
            prof = random_int_profile(rng, 5, 2)
            payments, _ = clarke_payments(prof)
            winners = optimal_allocation(prof).winners()
            for i, t in payments.items():
                assert t >= 0
                if i not in winners:
                    assert t == 0


class TestClarkeSurplus:
    def test_worked_example_subset(self):
        assert clarke_surplus(WORKED_PROFILE, present={1, 2, 3}) == 1

    def test_all_zero(self):
        prof = BidProfile(((0, 0),) * 4)
        assert clarke_surplus(prof) == 0
        assert clarke_surplus(prof, present={0, 2}) == 0

    def test_homogeneous_subset(self):
        assert clarke_surplus(homogeneous((10, 8, 5, 3)), present={1, 2, 3}) == 5

    def test_matches_payment_sum(self, rng):
        for _ in range(40):
            prof = random_int_profile(rng, 6, 2)
            cache = SurplusCache(prof)
            _, surplus = clarke_payments(prof, cache=cache)
            assert clarke_surplus(prof, cache=cache) == surplus

    def test_cache_matches_fresh(self, rng):
        prof = random_int_profile(rng, 6, 2)
        cache = SurplusCache(prof)
        cache.populate_all()
        for _ in range(20):
            present = {i for i in range(6) if rng.random() < 0.6} or {0}
            assert cache.surplus(mask_of(present)) == \
                clarke_surplus(prof, present=present)


class TestAveragedSurplus:
    def test_homogeneous_example(self):
        prof = homogeneous((10, 8, 5, 3))
        assert averaged_surplus(prof, 0, 1) == Fraction(11, 3)

    def test_k_zero_is_leave_one_out(self, rng):
        prof = random_int_profile(rng, 6, 2)
        for i in range(6):
            assert averaged_surplus(prof, i, 0) == \
                clarke_surplus(prof, present=set(range(6)) - {i})

    def test_zero_profile(self):
        prof = BidProfile(((0, 0),) * 6)
        assert averaged_surplus(prof, 2, 1) == 0

    def test_precondition(self):
        prof = homogeneous((1, 2, 3, 4))
        with pytest.raises(ValueError):
            averaged_surplus(prof, 0, 2)  # only k <= n-p-2 = 1 allowed
        with pytest.raises(ValueError):
            averaged_surplus(prof, 9, 0)

    def test_gamma_chain_monotone(self, rng):
        for _ in range(30):
            prof = random_int_profile(rng, 7, 2)
            cache = SurplusCache(prof)
            for i in range(7):
                chain = [averaged_surplus(prof, i, k, cache)
                         for k in range(7 - 2 - 1)]
                assert all(a >= b for a, b in zip(chain, chain[1:]))
                assert chain[-1] >= 0


class TestStructuralProperties:
    def test_revenue_monotonicity(self, rng):
        for _ in range(60):
            prof = random_int_profile(rng, 6, 2)
            cache = SurplusCache(prof)
            full = (1 << 6) - 1
            t = cache.surplus(full)
            for i in range(6):
                assert cache.surplus(full ^ (1 << i)) <= t

    def test_pivotal_agent_bound(self, rng):
        for _ in range(60):
            n, p = rng.randint(3, 7), rng.randint(1, 3)
            prof = random_int_profile(rng, n, p)
            assert pivotal_agent_count(prof) <= 2 * p

    def test_surplus_tie_break_invariance(self, rng):
        for _ in range(60):
            prof = random_int_profile(rng, 5, 2, hi=3)  # small range forces ties
            _, s_min = clarke_payments(prof, tie_break="min")
            _, s_max = clarke_payments(prof, tie_break="max")
            assert s_min == s_max

    def test_reoptimization_keeps_winners(self, rng):
        from redistrib.core import optimal_allocation
        for _ in range(60):
            n, p = rng.randint(3, 7), rng.randint(2, 3)
            if n <= p:
                continue
            prof = random_int_profile(rng, n, p)
            base = optimal_allocation(prof)
            for dropped in base.winners():
                # some optimal allocation without the dropped winner keeps
                # at least p-1 original winners; check via value equality
                keep = base.winners() - {dropped}
                best_keeping = optimal_allocation(prof, excluded={dropped})
                retained = len(keep & best_keeping.winners())
                if retained < p - 1:
                    # existence is guaranteed; verify another optimum does it
                    from redistrib.core import enumerate_allocations
                    target = best_keeping.value
                    assert any(
                        a.value == target and dropped not in a.winners()
                        and len(keep & a.winners()) >= p - 1
                        for a in enumerate_allocations(prof))


class TestFloatTables:
    def test_tables_match_exact_cache(self, rng):
        for _ in range(20):
            prof = random_int_profile(rng, 6, 2)
            cache = SurplusCache(prof)
            cache.populate_all()
            values, surpluses = profile_surplus_tables(prof)
            for mask in range(1, 1 << 6):
                assert values[mask] == cache.value(mask)
                assert surpluses[mask] == cache.surplus(mask)

    def test_removal_sums_match_averaged(self, rng):
        prof = random_int_profile(rng, 6, 2)
        _, surpluses = profile_surplus_tables(prof)
        sums = removal_surplus_sums(surpluses, 6)
        from math import comb
        for i in range(6):
            for k in range(0, 6 - 2 - 1):
                expected = averaged_surplus(prof, i, k)
                assert sums[i][6 - 1 - k] / comb(5, k) == pytest.approx(float(expected), abs=1e-12)
