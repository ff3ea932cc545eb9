import math
from fractions import Fraction

import numpy as np
import pytest

from redistrib.clarke import clarke_surplus
from redistrib.core import BidProfile
from redistrib.experiments import (ExperimentConfig, adversarial_profile,
                                   binary_profiles, linear_form_rebates,
                                   evaluate, figure1_experiment,
                                   random_profile, worst_case_index)
from redistrib.wco import wco_index

WORKED_PROFILE = BidProfile(((4, 5), (2, 1), (1, 4), (1, 0)))


class TestGenerators:
    def test_random_profile_deterministic(self):
        a = random_profile(5, 2, 0.0, 100.0, seed=3, index=17)
        b = random_profile(5, 2, 0.0, 100.0, seed=3, index=17)
        assert a == b
        c = random_profile(5, 2, 0.0, 100.0, seed=3, index=18)
        assert a != c

    def test_random_profile_range_and_mean(self):
        draws = []
        for index in range(400):
            prof = random_profile(4, 2, 10.0, 20.0, seed=1, index=index)
            for row in prof.bids:
                draws.extend(row)
        assert all(10.0 <= x < 20.0 for x in draws)
        mean = sum(draws) / len(draws)
        # CLT: sd of the sample mean is (10/sqrt(12))/sqrt(3200) ~ 0.051
        assert abs(mean - 15.0) < 0.3

    def test_binary_profile_count(self):
        profs = list(binary_profiles(3, 2))
        assert len(profs) == 64
        assert len(set(profs)) == 64
        assert profs[0] == BidProfile(((0, 0),) * 3)
        assert profs[-1] == BidProfile(((1, 1),) * 3)

    def test_binary_cap(self):
        with pytest.raises(ValueError):
            list(binary_profiles(7, 4))

    def test_file_generator(self, tmp_path):
        import json
        path = tmp_path / "profiles.json"
        profiles = [[[1, 1], [1, 1], [1, 1], [0, 0]],
                    [[2, 2], [2, 2], [0, 0], [0, 0]]]
        path.write_text(json.dumps(profiles))
        config = ExperimentConfig(n=4, p=2, mechanism="hetero",
                                  generator="file", source=str(path))
        report = worst_case_index(config)
        assert report.profiles_evaluated == 2
        assert report.zero_surplus_skipped == 1  # second profile has t = 0
        assert report.min_fraction == pytest.approx(0.25, abs=1e-9)

    def test_file_generator_shape_mismatch(self, tmp_path):
        import json
        path = tmp_path / "profiles.json"
        path.write_text(json.dumps([[[1], [0], [0]]]))
        config = ExperimentConfig(n=4, p=2, mechanism="hetero",
                                  generator="file", source=str(path))
        with pytest.raises(ValueError):
            worst_case_index(config)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(n=5, p=2, mechanism="nope")
        with pytest.raises(ValueError):
            ExperimentConfig(n=5, p=2, mechanism="wco", lo=3.0, hi=1.0)
        with pytest.raises(ValueError):
            ExperimentConfig(n=5, p=2, mechanism="scaling")
        with pytest.raises(ValueError):
            ExperimentConfig(n=9, p=3, mechanism="hetero", generator="binary")
        with pytest.raises(ValueError):
            ExperimentConfig(n=5, p=2, mechanism="hetero", generator="file")


class TestEvaluate:
    def test_bailey_cavallo_on_worked_example(self):
        out = evaluate(WORKED_PROFILE, "bailey_cavallo")
        assert out.surplus == 5
        assert sum(out.rebates) == Fraction(5, 2)
        assert out.fraction == Fraction(1, 2)
        assert out.payments == (2, 0, 3, 0)

    def test_zero_surplus_fraction_none(self):
        prof = BidProfile(((1, 1), (0, 0), (0, 0)))
        out = evaluate(prof, "bailey_cavallo")
        assert out.surplus == 0
        assert out.fraction is None

    def test_hetero_matches_wco_on_homogeneous(self):
        prof = BidProfile(tuple((v, v) for v in (5, 4, 3, 2, 1)))
        hetero = evaluate(prof, "hetero")
        wco = evaluate(prof, "wco")
        assert hetero.rebates == wco.rebates
        assert hetero.surplus == wco.surplus == 6

    def test_scaling_requires_gamma(self):
        prof = BidProfile(tuple((2 * v, v) for v in (3, 2, 1, 0, 0)))
        with pytest.raises(ValueError):
            evaluate(prof, "scaling")
        out = evaluate(prof, "scaling", gamma=(2, 1))
        assert all(r >= 0 for r in out.rebates)
        assert sum(out.rebates) <= out.surplus

    def test_unknown_mechanism(self):
        with pytest.raises(ValueError):
            evaluate(WORKED_PROFILE, "vickrey")


class TestWorstCaseIndex:
    def test_binary_homogeneous_hits_wco_index(self):
        config = ExperimentConfig(n=5, p=2, mechanism="wco",
                                  generator="binary_homogeneous")
        report = worst_case_index(config)
        assert report.profiles_evaluated == 32
        assert report.min_fraction == pytest.approx(float(wco_index(5, 2)),
                                                    abs=1e-12)
        assert report.ir_violations == 0
        assert report.feasibility_violations == 0

    def test_worker_count_invariance(self):
        config = ExperimentConfig(n=6, p=2, mechanism="hetero",
                                  generator="uniform", trials=300, seed=11)
        serial = worst_case_index(config, workers=1, chunk_size=64)
        parallel = worst_case_index(config, workers=3, chunk_size=64)
        assert serial.min_fraction == parallel.min_fraction
        assert serial.mean_fraction == parallel.mean_fraction
        assert serial.worst_profile == parallel.worst_profile

    def test_bailey_cavallo_uniform_respects_bound(self):
        config = ExperimentConfig(n=8, p=2, mechanism="bailey_cavallo",
                                  generator="uniform", trials=500, seed=5)
        report = worst_case_index(config)
        assert report.min_fraction >= (8 - 4) / 8 - 1e-9
        assert report.conjecture_counterexamples == []

    def test_hetero_histogram_present(self):
        config = ExperimentConfig(n=6, p=2, mechanism="hetero",
                                  generator="uniform", trials=100, seed=2)
        report = worst_case_index(config)
        assert report.gamma_ratio_histogram is not None
        assert sum(report.gamma_ratio_histogram) > 0
        assert report.to_json_dict()["gamma_ratio_histogram"] == \
            report.gamma_ratio_histogram

    def test_engines_match_evaluate(self):
        # fast float path agrees with the exact per-profile evaluation
        for mech in ("bailey_cavallo", "hetero"):
            config = ExperimentConfig(n=5, p=2, mechanism=mech,
                                      generator="uniform", trials=20, seed=7)
            report = worst_case_index(config)
            worst = BidProfile(tuple(map(tuple, report.worst_profile)))
            out = evaluate(worst, mech)
            assert float(out.fraction) == pytest.approx(report.min_fraction,
                                                        abs=1e-9)


class TestAdversarialProfile:
    def test_small_cases(self):
        prof = adversarial_profile(4, 2)
        assert prof.bids == ((3, 2), (2, 1), (0, 0), (0, 0))
        assert clarke_surplus(prof) == 1

    def test_surplus_formula(self):
        for p in range(2, 6):
            prof = adversarial_profile(p + 2, p)
            assert clarke_surplus(prof) == p * (p - 1) // 2

    def test_preconditions(self):
        with pytest.raises(ValueError):
            adversarial_profile(5, 1)
        with pytest.raises(ValueError):
            adversarial_profile(2, 2)


class TestLinearRebates:
    def test_zero_on_adversarial(self, rng):
        # every coefficient choice redistributes exactly nothing here
        for p in (2, 3):
            n = p + 2
            prof = adversarial_profile(n, p)
            for _ in range(25):
                vectors = [[Fraction(rng.randint(-5, 5)) for _ in range(p)]
                           for _ in range(n - 1 - p)]
                rebates = linear_form_rebates(prof, vectors)
                assert sum(rebates) == 0

    def test_vector_count_checked(self):
        with pytest.raises(ValueError):
            linear_form_rebates(adversarial_profile(5, 2), [[1, 1]])

    def test_wco_form_on_homogeneous(self):
        # with c_j = (c_j^wco, 0, ..., 0) the general form reduces to the
        # homogeneous rule
        from redistrib.wco import wco_coefficients, wco_rebates
        prof = BidProfile(tuple((v, v) for v in (5, 4, 3, 2, 1)))
        c = wco_coefficients(5, 2).c
        vectors = [[cj, Fraction(0)] for cj in c]
        assert tuple(linear_form_rebates(prof, vectors)) == wco_rebates(prof)


class TestFigure1:
    def test_table_shape_and_reference(self):
        rows = figure1_experiment(n=6, p_range=(2, 3), trials=40, seed=1)
        assert len(rows) == 6
        mechs = [r["mech"] for r in rows]
        assert mechs == ["bailey_cavallo", "hetero", "wco_reference"] * 2
        ref = [r for r in rows if r["mech"] == "wco_reference"]
        assert ref[0]["worst_fraction"] == pytest.approx(float(wco_index(6, 2)))
        for r in rows:
            if r["mech"] != "wco_reference":
                assert 0.0 <= r["worst_fraction"] <= 1.0 + 1e-12
