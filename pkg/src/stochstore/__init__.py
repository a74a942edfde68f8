"""Stochastic generation/demand/storage modeling.

A discrete-time system couples an energy generator, a consumer, and a
clamped store.  This package computes per-step deficit / overflow /
self-sufficiency probabilities three independent ways — numerical density
convolution, a Weibull closed form, and seeded Monte Carlo — and ships a
CLI that keeps the routes honest against each other.
"""

from .balance import (
    DEFAULT_CELLS,
    DEFAULT_COVERAGE,
    MASS_TRUNCATION_BUDGET,
    BalanceQuery,
    DensityGrid,
    ProbabilityTriple,
    TruncationBudgetError,
    difference_density,
    discretize,
    interval_probability,
    resample,
    self_sufficiency,
    weibull_closed_form,
)
from .distributions import (
    Deterministic,
    Distribution,
    Empirical,
    LogNormal,
    UnsupportedOperationError,
    Weibull,
    lognormal_from_moments,
)
from .montecarlo import (
    EnsembleStats,
    ProbabilityEstimate,
    SelfSufficiencyEstimate,
    SweepRow,
    estimate_self_sufficiency,
    simulate_ensemble,
    simulate_trajectory,
    sweep_battery_levels,
)
from .scenario import (
    ResultTable,
    Scenario,
    ScenarioError,
    ScenarioInvariantError,
    ScenarioSchemaError,
    ScenarioSyntaxError,
    StepSpec,
    load_scenario,
    parse_scenario,
    serialize_scenario,
    write_results,
)
from .storage import StepResult, StorageSpec, Trajectory, evolve, step

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # distributions
    "Distribution",
    "Deterministic",
    "Weibull",
    "LogNormal",
    "Empirical",
    "UnsupportedOperationError",
    "lognormal_from_moments",
    # storage
    "StorageSpec",
    "StepResult",
    "Trajectory",
    "step",
    "evolve",
    # balance
    "DEFAULT_CELLS",
    "DEFAULT_COVERAGE",
    "MASS_TRUNCATION_BUDGET",
    "DensityGrid",
    "BalanceQuery",
    "ProbabilityTriple",
    "TruncationBudgetError",
    "discretize",
    "resample",
    "difference_density",
    "interval_probability",
    "self_sufficiency",
    "weibull_closed_form",
    # monte carlo
    "ProbabilityEstimate",
    "SelfSufficiencyEstimate",
    "EnsembleStats",
    "SweepRow",
    "simulate_trajectory",
    "simulate_ensemble",
    "estimate_self_sufficiency",
    "sweep_battery_levels",
    # scenarios and results
    "Scenario",
    "StepSpec",
    "ScenarioError",
    "ScenarioSyntaxError",
    "ScenarioSchemaError",
    "ScenarioInvariantError",
    "ResultTable",
    "parse_scenario",
    "load_scenario",
    "serialize_scenario",
    "write_results",
]
