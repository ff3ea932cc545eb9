"""Groves redistribution mechanisms for unit-demand assignment of objects."""

from .clarke import (SurplusCache, averaged_surplus, clarke_payments,
                     clarke_surplus)
from .core import (Allocation, BidProfile, EnumerationCapError,
                   MechanismOutcome, enumerate_allocations, optimal_allocation)
from .experiments import (ExperimentConfig, ExperimentReport,
                          adversarial_profile, binary_profiles, evaluate,
                          figure1_experiment, random_profile, worst_case_index)
from .ordering import AgentRanking, rank_agents
from .rebates import (HeteroCoefficients, bailey_cavallo_rebates,
                      hetero_alphas, hetero_rebates)
from .scaling import (ScalingModel, claim1_bound, scaling_payments,
                      scaling_rebates, solve_lp)
from .wco import (RebateCoefficients, prefix_dominance, wco_coefficients,
                  wco_index, wco_rebate, wco_rebates)

__all__ = [
    "AgentRanking", "Allocation", "BidProfile", "EnumerationCapError",
    "ExperimentConfig", "ExperimentReport", "HeteroCoefficients",
    "MechanismOutcome", "RebateCoefficients", "ScalingModel", "SurplusCache",
    "adversarial_profile", "averaged_surplus", "bailey_cavallo_rebates",
    "binary_profiles", "claim1_bound", "clarke_payments", "clarke_surplus",
    "enumerate_allocations", "evaluate", "figure1_experiment", "hetero_alphas",
    "hetero_rebates", "optimal_allocation", "prefix_dominance",
    "random_profile", "rank_agents", "scaling_payments", "scaling_rebates",
    "solve_lp", "wco_coefficients", "wco_index", "wco_rebate", "wco_rebates",
    "worst_case_index",
]

__version__ = "0.1.0"
