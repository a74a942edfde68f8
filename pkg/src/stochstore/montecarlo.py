"""Seeded Monte Carlo: trajectory ensembles and frequency estimates.

This engine is the sampling oracle for the analytic (grid and closed
form) probability paths: it simulates scenarios trajectory by trajectory
and estimates event probabilities as frequencies with normal-approximation
confidence intervals (3 standard errors).

Reproducibility contract: trajectory ``i`` of a run seeded with ``seed``
draws from ``numpy.random.default_rng((seed, i))``, consuming generation
then demand per step, in step order.  Results are therefore deterministic
for a fixed (scenario, n, seed) under any execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .balance import BalanceQuery, ProbabilityTriple, weibull_closed_form
from .distributions import Deterministic, Distribution, Weibull
from .scenario import Scenario
from .storage import StorageSpec, Trajectory, evolve

__all__ = [
    "QUANTILE_LEVELS",
    "ProbabilityEstimate",
    "SelfSufficiencyEstimate",
    "EnsembleStats",
    "SweepRow",
    "simulate_trajectory",
    "simulate_ensemble",
    "estimate_self_sufficiency",
    "sweep_battery_levels",
]

QUANTILE_LEVELS = (0.05, 0.25, 0.5, 0.75, 0.95)


@dataclass(frozen=True)
class ProbabilityEstimate:
    """A frequency estimate with its 3-standard-error halfwidth."""

    p_hat: float
    ci_halfwidth: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0.0 <= self.p_hat <= 1.0:
            raise ValueError(f"p_hat must lie in [0, 1], got {self.p_hat!r}")
        expected = 3.0 * math.sqrt(self.p_hat * (1.0 - self.p_hat) / self.n)
        if abs(self.ci_halfwidth - expected) > 1e-12:
            raise ValueError(
                f"ci_halfwidth {self.ci_halfwidth!r} does not match "
                f"3*sqrt(p(1-p)/n) = {expected!r}"
            )

    @classmethod
    def from_count(cls, count: int, n: int) -> "ProbabilityEstimate":
        p = count / n
        return cls(p_hat=p, ci_halfwidth=3.0 * math.sqrt(p * (1.0 - p) / n), n=n)


@dataclass(frozen=True)
class SelfSufficiencyEstimate:
    """Frequency estimates of the deficit / overflow / self triple.

    Built from one shared sample, so the three underlying counts
    partition ``n`` and the estimates sum to 1 exactly.
    """

    deficit: ProbabilityEstimate
    overflow: ProbabilityEstimate
    self_sufficient: ProbabilityEstimate

    @property
    def n(self) -> int:
        return self.deficit.n


@dataclass(frozen=True, eq=False)
class EnsembleStats:
    """Per-step aggregates over an ensemble of simulated trajectories.

    Arrays are indexed by step (0-based); ``s_quantiles[j, t]`` is the
    ``quantile_levels[j]`` quantile of the storage state after step ``t``.
    """

    n_trajectories: int
    seed: int
    quantile_levels: tuple[float, ...]
    s_mean: np.ndarray
    s_quantiles: np.ndarray
    b_mean: np.ndarray
    spill_freq: np.ndarray
    deficit_freq: np.ndarray


def simulate_trajectory(scenario: Scenario, seed: int, index: int = 0) -> Trajectory:
    """Simulate trajectory ``index`` of the ensemble seeded with ``seed``."""
    rng = np.random.default_rng((seed, index))
    horizon = scenario.horizon
    g = np.empty(horizon)
    d = np.empty(horizon)
    for t, spec in enumerate(scenario.steps):
        g[t] = spec.generation.sample(rng)
        d[t] = spec.demand.sample(rng)
    return evolve(scenario.storage, g - d, generation=g, demand=d)


def simulate_ensemble(scenario: Scenario, n: int, seed: int) -> EnsembleStats:
    """Aggregate ``n`` independent trajectories of the scenario."""
    n = int(n)
    if n < 1:
        raise ValueError(f"ensemble size must be >= 1, got {n}")
    horizon = scenario.horizon
    states = np.empty((n, horizon))
    balances = np.empty((n, horizon))
    spill_counts = np.zeros(horizon)
    deficit_counts = np.zeros(horizon)
    for i in range(n):
        traj = simulate_trajectory(scenario, seed, i)
        states[i] = traj.storage
        balances[i] = traj.balance
        spill_counts += traj.spill > 0.0
        deficit_counts += traj.deficit > 0.0
    return EnsembleStats(
        n_trajectories=n,
        seed=int(seed),
        quantile_levels=QUANTILE_LEVELS,
        s_mean=states.mean(axis=0),
        s_quantiles=np.quantile(states, QUANTILE_LEVELS, axis=0),
        b_mean=balances.mean(axis=0),
        spill_freq=spill_counts / n,
        deficit_freq=deficit_counts / n,
    )


def estimate_self_sufficiency(
    gen: Distribution,
    dem: Distribution,
    storage: StorageSpec,
    s_prev: float,
    n: int,
    seed: int,
) -> SelfSufficiencyEstimate:
    """Estimate the step-probability triple at level ``s_prev`` by sampling.

    Counts ``n`` draws of ``B = G - D`` against the window
    ``(s_min - s_prev, s_max - s_prev]`` with the same boundary
    convention as the grid path (deficit closed, overflow open).  Any
    ``n >= 1`` is accepted; the confidence intervals are meaningful from
    roughly ``n >= 10**3`` upward.
    """
    query = BalanceQuery(s_prev=s_prev, storage=storage)
    n = int(n)
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    b = gen.sample_n(rng, n) - dem.sample_n(rng, n)
    n_deficit = int(np.count_nonzero(b <= query.lo))
    n_overflow = int(np.count_nonzero(b > query.hi))
    return SelfSufficiencyEstimate(
        deficit=ProbabilityEstimate.from_count(n_deficit, n),
        overflow=ProbabilityEstimate.from_count(n_overflow, n),
        self_sufficient=ProbabilityEstimate.from_count(n - n_deficit - n_overflow, n),
    )


@dataclass(frozen=True)
class SweepRow:
    level: float
    analytic: ProbabilityTriple
    mc: SelfSufficiencyEstimate


def sweep_battery_levels(
    gen_value: float,
    dem: Weibull,
    storage: StorageSpec,
    levels,
    n: int,
    seed: int,
) -> tuple[SweepRow, ...]:
    """Pair the closed-form triple with an MC estimate at each level.

    Every level reuses the same ``seed`` (and Deterministic generation
    consumes no random state), so all rows share one demand sample: a
    single-level sweep reproduces ``estimate_self_sufficiency`` exactly,
    and across levels the comparison uses common random numbers.
    """
    levels = [float(s) for s in levels]
    if not levels:
        raise ValueError("levels must be a nonempty sequence")
    gen = Deterministic(gen_value)
    rows = []
    for level in levels:
        analytic = weibull_closed_form(gen_value, level, storage, dem)
        mc = estimate_self_sufficiency(gen, dem, storage, level, n, seed)
        rows.append(SweepRow(level=level, analytic=analytic, mc=mc))
    return tuple(rows)
