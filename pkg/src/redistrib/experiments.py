"""Simulation harness: profile generators, mechanism evaluation, worst-case
index estimation, and the agents-vs-objects comparison table.

Profile randomness is counter-based: entry (seed, index) fully determines a
profile, so parallel evaluation cannot reorder the stream.  Uniform draws
land on a dyadic grid (multiples of 2^-26), which keeps every sum and
comparison in the float64 subset tables exact for bids below ~100.
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterable, Optional, Sequence

import numpy as np

from . import scaling as scaling_mod
from .clarke import (SurplusCache, clarke_payments, removal_surplus_sums,
                     subset_surplus_table, subset_value_table)
from .core import BidProfile, MechanismOutcome, optimal_allocation
from .ordering import AgentRanking, rank_agents
from .rebates import (HeteroCoefficients, bailey_cavallo_rebates,
                      hetero_alphas, hetero_rebates)
from .wco import wco_coefficients, wco_index, wco_rebates

MECHANISMS = ("wco", "scaling", "bailey_cavallo", "hetero")
BINARY_CAP_BITS = 26
UNIFORM_GRID_BITS = 26
CONJECTURE_TOLERANCE = 1e-9
GAMMA_RATIO_BINS = 10


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    p: int
    mechanism: str
    generator: str = "uniform"        # uniform | uniform_homogeneous | binary | binary_homogeneous | file
    lo: float = 0.0
    hi: float = 100.0
    trials: int = 10_000
    seed: int = 0
    gamma: Optional[tuple] = None     # scaling only
    source: Optional[str] = None      # file generator only

    def __post_init__(self):
        if self.mechanism not in MECHANISMS:
            raise ValueError(f"unknown mechanism {self.mechanism!r}")
        if self.generator.startswith("uniform") and not self.lo < self.hi:
            raise ValueError("uniform generator needs lo < hi")
        if self.generator.startswith("binary") and self.n * self.p > BINARY_CAP_BITS:
            raise ValueError(
                f"binary enumeration needs n*p <= {BINARY_CAP_BITS}")
        if self.generator == "file" and not self.source:
            raise ValueError("file generator needs a source path")
        if self.mechanism == "scaling" and self.gamma is None:
            raise ValueError("scaling mechanism needs a gamma vector")


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    profiles_evaluated: int = 0
    zero_surplus_skipped: int = 0
    min_fraction: Optional[float] = None
    mean_fraction: Optional[float] = None
    ir_violations: int = 0
    feasibility_violations: int = 0
    worst_profile: Optional[list] = None
    conjecture_counterexamples: list = field(default_factory=list)
    gamma_ratio_histogram: Optional[list] = None

    def to_json_dict(self) -> dict:
        return {
            "config": {
                "n": self.config.n, "p": self.config.p,
                "mechanism": self.config.mechanism,
                "generator": self.config.generator,
                "lo": self.config.lo, "hi": self.config.hi,
                "trials": self.config.trials, "seed": self.config.seed,
                "gamma": [float(g) for g in self.config.gamma] if self.config.gamma else None,
            },
            "profiles_evaluated": self.profiles_evaluated,
            "zero_surplus_skipped": self.zero_surplus_skipped,
            "min_fraction": self.min_fraction,
            "mean_fraction": self.mean_fraction,
            "ir_violations": self.ir_violations,
            "feasibility_violations": self.feasibility_violations,
            "worst_profile": self.worst_profile,
            "conjecture_counterexamples": len(self.conjecture_counterexamples),
            "gamma_ratio_histogram": self.gamma_ratio_histogram,
        }


# ---------------------------------------------------------------------------
# Generators

def random_profile(n: int, p: int, lo: float, hi: float,
                   seed: int, index: int) -> BidProfile:
    """Uniform [lo, hi) profile fully determined by (seed, index)."""
    return BidProfile(tuple(map(tuple, _random_bids(n, p, lo, hi, seed, index))))


def _random_bids(n: int, p: int, lo: float, hi: float,
                 seed: int, index: int, homogeneous: bool = False) -> np.ndarray:
    if not lo < hi:
        raise ValueError("need lo < hi")
    rng = np.random.default_rng((seed, index))
    shape = (n, 1) if homogeneous else (n, p)
    grid = rng.integers(0, 1 << UNIFORM_GRID_BITS, size=shape)
    bids = lo + (hi - lo) * (grid * 2.0 ** -UNIFORM_GRID_BITS)
    if homogeneous:
        bids = np.repeat(bids, p, axis=1)
    return bids


def binary_profiles(n: int, p: int) -> Iterable[BidProfile]:
    """All 2^(n*p) profiles with entries in {0, 1}, in canonical order."""
    for code in range(1 << (n * p)):
        yield BidProfile(tuple(_binary_bids(n, p, code)))


def _binary_bids(n: int, p: int, code: int):
    if n * p > BINARY_CAP_BITS:
        raise ValueError(f"binary enumeration needs n*p <= {BINARY_CAP_BITS}")
    return [tuple((code >> (i * p + j)) & 1 for j in range(p))
            for i in range(n)]


@lru_cache(maxsize=8)
def _file_bids(path: str, n: int, p: int) -> tuple:
    """Bid matrices from a JSON file: a list of matrices or of profile dicts."""
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data["profiles"]
    matrices = []
    for entry in data:
        bids = entry["bids"] if isinstance(entry, dict) else entry
        prof = BidProfile(tuple(map(tuple, bids)))
        if (prof.n, prof.p) != (n, p):
            raise ValueError(
                f"profile in {path} has shape ({prof.n}, {prof.p}), "
                f"expected ({n}, {p})")
        matrices.append(np.array(bids, dtype=np.float64))
    if not matrices:
        raise ValueError(f"no profiles in {path}")
    return tuple(matrices)


def _generator_bids(config: ExperimentConfig, index: int) -> np.ndarray:
    gen = config.generator
    n, p = config.n, config.p
    if gen == "file":
        return _file_bids(config.source, n, p)[index]
    if gen == "uniform":
        return _random_bids(n, p, config.lo, config.hi, config.seed, index)
    if gen == "uniform_homogeneous":
        return _random_bids(n, p, config.lo, config.hi, config.seed, index,
                            homogeneous=True)
    if gen == "binary":
        return np.array(_binary_bids(n, p, index), dtype=np.float64)
    if gen == "binary_homogeneous":
        row = [(index >> i) & 1 for i in range(n)]
        return np.array([[float(r)] * p for r in row])
    raise ValueError(f"unknown generator {gen!r}")


def _stream_size(config: ExperimentConfig) -> int:
    if config.generator == "binary":
        return 1 << (config.n * config.p)
    if config.generator == "binary_homogeneous":
        return 1 << config.n
    if config.generator == "file":
        return len(_file_bids(config.source, config.n, config.p))
    return config.trials


# ---------------------------------------------------------------------------
# Fast per-profile rebate engines (float subset tables)

class _Engine:
    """Precomputed mechanism data for one (mechanism, n, p[, gamma])."""

    def __init__(self, mechanism: str, n: int, p: int,
                 gamma: Optional[Sequence] = None):
        self.mechanism = mechanism
        self.n, self.p = n, p
        if mechanism == "hetero":
            self.alpha = np.array([float(a) for a in hetero_alphas(n, p).alpha])
            self.gamma_divisors = np.array(
                [comb(n - 1, j - 1) for j in range(1, n - p)], dtype=np.float64)
        elif mechanism == "wco":
            self.c = np.array([float(c) for c in wco_coefficients(n, p).c])
        elif mechanism == "scaling":
            self.model = scaling_mod.solve_lp(n, p, gamma)
            self.c_scaling = np.array([float(c) for c in self.model.c])

    def rebates_and_surplus(self, bids: np.ndarray):
        """(rebates, surplus, gamma_ratios-or-None) for one bid matrix."""
        n, p = self.n, self.p
        if self.mechanism == "wco":
            rows = bids[:, 0]
            if not np.all(bids == rows[:, None]):
                raise ValueError("wco needs a homogeneous profile")
            order = np.sort(rows)[::-1]
            t = p * order[p]  # homogeneous pivotal surplus
            r = np.empty(n)
            for i in range(n):
                y = np.sort(np.delete(rows, i))[::-1]
                r[i] = float(np.dot(self.c, y[p:]))
            return r, float(t), None
        if self.mechanism == "scaling":
            v = np.sort(bids[:, 0] / float(self.model.gamma[0]))[::-1]
            gam = [float(g) for g in self.model.gamma] + [0.0]
            t = sum(j * (gam[j - 1] - gam[j]) * v[j] for j in range(1, p + 1))
            pos_rebates = np.empty(n)
            for i in range(1, n + 1):
                pos_rebates[i - 1] = sum(
                    self.c_scaling[j - 2] * (v[j - 1] if j < i else v[j])
                    for j in range(2, n))
            order = np.argsort(-bids[:, 0], kind="stable")
            r = np.empty(n)
            r[order] = pos_rebates
            return r, float(t), None

        values = subset_value_table(bids)
        surpluses = subset_surplus_table(values, n)
        full = (1 << n) - 1
        t = float(surpluses[full])
        if self.mechanism == "bailey_cavallo":
            bits = 1 << np.arange(n)
            r = surpluses[full ^ bits] / n
            return r, t, None
        # hetero
        sums = removal_surplus_sums(surpluses, n)
        L = n - p - 1
        # Gamma_j = (sum over present sets of size n-j) / C(n-1, j-1)
        gammas = sums[:, n - 1:n - 1 - L:-1] / self.gamma_divisors[:L]
        r = gammas @ np.asarray(self.alpha[:L])
        ratios = None
        if L >= 2:
            g1 = gammas[:, 0]
            nz = g1 > 0
            ratios = (gammas[nz, 1] / g1[nz]).tolist()
        return r, t, ratios


# ---------------------------------------------------------------------------
# Evaluation

def evaluate(profile: BidProfile, mechanism: str,
             coefficients: Optional[HeteroCoefficients] = None,
             model: Optional[scaling_mod.ScalingModel] = None,
             gamma: Optional[Sequence] = None) -> MechanismOutcome:
    """Full outcome (allocation, Clarke payments, rebates) for one profile."""
    if mechanism not in MECHANISMS:
        raise ValueError(f"unknown mechanism {mechanism!r}")
    cache = SurplusCache(profile)
    payments, surplus = clarke_payments(profile, cache=cache)
    if mechanism == "bailey_cavallo":
        rebates = bailey_cavallo_rebates(profile, cache)
    elif mechanism == "hetero":
        if coefficients is None:
            coefficients = hetero_alphas(profile.n, profile.p)
        rebates = hetero_rebates(profile, coefficients, cache)
    elif mechanism == "wco":
        rebates = wco_rebates(profile)
    else:  # scaling
        if model is None:
            if gamma is None:
                raise ValueError("scaling needs a solved model or a gamma vector")
            model = scaling_mod.solve_lp(profile.n, profile.p, gamma)
        v = scaling_mod.extract_values(profile, model.gamma)
        order = sorted(range(profile.n), key=lambda i: (-v[i], i))
        pos_rebates = scaling_mod.scaling_rebates(model, [v[i] for i in order])
        rebates = [None] * profile.n
        for pos, agent in enumerate(order):
            rebates[agent] = pos_rebates[pos]
        rebates = tuple(rebates)
    return MechanismOutcome(
        allocation=optimal_allocation(profile),
        payments=tuple(payments[i] for i in range(profile.n)),
        rebates=tuple(rebates),
        surplus=surplus)


# ---------------------------------------------------------------------------
# Worst-case aggregation

def _chunk_report(config: ExperimentConfig, start: int, stop: int) -> dict:
    engine = _Engine(config.mechanism, config.n, config.p, config.gamma)
    count = zero = ir = feas = 0
    frac_sum = 0.0
    best = None  # (fraction, index)
    counterexamples = []
    hist = [0] * (GAMMA_RATIO_BINS + 1)
    strict = config.mechanism != "hetero"
    for index in range(start, stop):
        bids = _generator_bids(config, index)
        r, t, ratios = engine.rebates_and_surplus(bids)
        count += 1
        total_r = float(np.sum(r))
        bad_ir = bool(np.any(r < -CONJECTURE_TOLERANCE))
        bad_feas = total_r > t + CONJECTURE_TOLERANCE
        if bad_ir:
            ir += 1
        if bad_feas:
            feas += 1
        if bad_ir or bad_feas:
            if strict:
                raise RuntimeError(
                    f"{config.mechanism} violated IR/feasibility on profile "
                    f"{index}: rebates={r.tolist()}, surplus={t}")
            counterexamples.append(
                {"index": index, "bids": bids.tolist(),
                 "rebates": r.tolist(), "surplus": t})
        if ratios is not None:
            for x in ratios:
                b = int(x * GAMMA_RATIO_BINS)
                hist[min(max(b, 0), GAMMA_RATIO_BINS)] += 1
        if t == 0:
            zero += 1
            continue
        frac = total_r / t
        frac_sum += frac
        if best is None or frac < best[0]:
            best = (frac, index)
    return {"count": count, "zero": zero, "ir": ir, "feas": feas,
            "frac_sum": frac_sum, "best": best,
            "counterexamples": counterexamples, "hist": hist}


def worst_case_index(config: ExperimentConfig, workers: int = 1,
                     chunk_size: int = 2048) -> ExperimentReport:
    """Aggregate the mechanism over the configured profile stream.

    The minimum fraction is taken over profiles with positive surplus only;
    zero-surplus profiles are counted separately.  Identical for any worker
    count: chunk boundaries depend only on the stream length.
    """
    total = _stream_size(config)
    bounds = [(s, min(s + chunk_size, total)) for s in range(0, total, chunk_size)]
    if workers > 1 and len(bounds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(_chunk_report,
                                     [config] * len(bounds),
                                     [b[0] for b in bounds],
                                     [b[1] for b in bounds]))
    else:
        partials = [_chunk_report(config, s, e) for s, e in bounds]

    report = ExperimentReport(config=config)
    frac_sum = 0.0
    best = None
    hist = [0] * (GAMMA_RATIO_BINS + 1)
    for part in partials:
        report.profiles_evaluated += part["count"]
        report.zero_surplus_skipped += part["zero"]
        report.ir_violations += part["ir"]
        report.feasibility_violations += part["feas"]
        report.conjecture_counterexamples.extend(part["counterexamples"])
        frac_sum += part["frac_sum"]
        hist = [a + b for a, b in zip(hist, part["hist"])]
        if part["best"] is not None:
            if best is None or part["best"][0] < best[0]:
                best = part["best"]
    positive = report.profiles_evaluated - report.zero_surplus_skipped
    if positive:
        report.min_fraction = best[0]
        report.mean_fraction = frac_sum / positive
        report.worst_profile = _generator_bids(config, best[1]).tolist()
    if config.mechanism == "hetero":
        report.gamma_ratio_histogram = hist
    return report


# ---------------------------------------------------------------------------
# Zero-redistribution witness

def adversarial_profile(n: int, p: int) -> BidProfile:
    """The profile on which every linear-form rebate redistributes nothing.

    Rows m = 1..p are the arithmetic staircases (2p-m, ..., p-m+1); the rest
    are zero.  Its Clarke surplus is p(p-1)/2.
    """
    if not p >= 2:
        raise ValueError("profile is degenerate for p < 2")
    if not n > p:
        raise ValueError(f"need n > p, got n={n}, p={p}")
    rows = [tuple(2 * p - m + 1 - j for j in range(1, p + 1))
            for m in range(1, p + 1)]
    rows += [(0,) * p] * (n - p)
    return BidProfile(tuple(rows))


def linear_form_rebates(profile: BidProfile, coeff_vectors: Sequence[Sequence],
                       ranking: Optional[AgentRanking] = None) -> list:
    """Rebates of the general linear form, for an arbitrary coefficient choice.

    ``coeff_vectors`` holds the vectors c_{p+1} .. c_{n-1}, each of length p.
    Agents are ordered best-first by the bid ranking (ties broken by index);
    agent at rank position i pairs c_j with the ranked bid v_j for j < i and
    with v_{j+1} for j >= i, skipping positions 1..p entirely.
    """
    n, p = profile.n, profile.p
    if len(coeff_vectors) != n - 1 - p:
        raise ValueError(f"expected {n - 1 - p} coefficient vectors")
    if ranking is None:
        ranking = rank_agents(profile)
    ranked = [a for cls in ranking.classes for a in sorted(cls)]
    v = [profile.bids[a] for a in ranked]  # v[0] = v_1

    def inner(c, vec):
        return sum(ci * vi for ci, vi in zip(c, vec))

    rebates_by_position = []
    for i in range(1, n + 1):
        r = 0
        for j in range(p + 1, n):
            c = coeff_vectors[j - p - 1]
            r += inner(c, v[j - 1] if j < i else v[j])
        rebates_by_position.append(r)
    out = [0] * n
    for pos, agent in enumerate(ranked):
        out[agent] = rebates_by_position[pos]
    return out


# ---------------------------------------------------------------------------
# Agents-vs-objects comparison table (figure1)

def figure1_experiment(n: int = 10, p_range: Sequence[int] = range(1, 8),
                       trials: int = 10_000, seed: int = 0,
                       workers: int = 1) -> list:
    """Worst/mean redistributed fraction of BC and HETERO per object count.

    Returns CSV-ready dicts with the WCO index e* as the reference line.
    """
    rows = []
    for p in p_range:
        for mech in ("bailey_cavallo", "hetero"):
            config = ExperimentConfig(n=n, p=p, mechanism=mech,
                                      generator="uniform", trials=trials,
                                      seed=seed)
            report = worst_case_index(config, workers=workers)
            rows.append({"p": p, "mech": mech,
                         "worst_fraction": report.min_fraction,
                         "mean_fraction": report.mean_fraction,
                         "trials": trials, "seed": seed})
        rows.append({"p": p, "mech": "wco_reference",
                     "worst_fraction": float(wco_index(n, p)),
                     "mean_fraction": None, "trials": trials, "seed": seed})
    return rows
