"""Monte Carlo comparison harness: many damage scenarios, paired policies.

Every replicate draws one damage scenario and runs every requested policy on
that same scenario (common random numbers), so per-replicate reward
differences reflect the policies and not sampling noise. The base heuristic's
permutation seed is also shared between the base policy and the rollout
variants within a replicate, which is what makes the fortified-improvement
guarantee (rollout reward >= base reward on every replicate) hold pairwise.

Replicate RNG streams are spawned from the master seed, so results are
independent of execution order and worker count.
"""

from __future__ import annotations

import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .annealing import AnnealingSchedule
from .community import Community
from .hazard import FragilityCurve, RestorationModel, SeismicScenario, sample_scenario
from .objective import Reward, trajectory_reward
from .rollout import BaseHeuristic, PolicyConfig, run_policy
from .dynamics import Trajectory


@dataclass(frozen=True)
class HazardModel:
    """Scenario event plus the fragility/restoration bindings."""

    scenario: SeismicScenario
    fragilities: Mapping[str, FragilityCurve]
    restoration: RestorationModel
    deterministic_durations: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    replicates: int = 20
    master_seed: int = 0
    policies: tuple[str, ...] = ("base", "rollout-sa")
    crew_budget: int = 3
    grid_resolution_days: float = 1.0
    sa_schedule: AnnealingSchedule = field(
        default_factory=lambda: AnnealingSchedule(t0=2000.0)
    )
    heuristic_kind: str = "random_permutation"
    histogram_bins: int = 10
    workers: int = 1
    oracle_cap: int = 1_000_000
    cumulative_objective: bool = False
    progress: bool = False

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("experiment needs at least one replicate")
        if self.grid_resolution_days <= 0:
            raise ValueError("time grid resolution must be positive")
        if not self.policies:
            raise ValueError("experiment needs at least one policy")


@dataclass(frozen=True)
class AggregateCurves:
    """Recovery curves resampled onto a shared time grid."""

    grid: np.ndarray
    mean: Mapping[str, np.ndarray]
    std: Mapping[str, np.ndarray]
    replicate_curves: Mapping[str, np.ndarray]  # shape (replicates, len(grid))


@dataclass(frozen=True)
class RewardHistogram:
    bin_edges: np.ndarray
    counts: Mapping[str, np.ndarray]
    values: Mapping[str, np.ndarray]  # per-replicate F, shape (replicates,)


@dataclass(frozen=True)
class ReplicateRecord:
    index: int
    scenario_hash: str
    trajectories: Mapping[str, Trajectory]
    rewards: Mapping[str, Reward]


@dataclass(frozen=True)
class ExperimentResult:
    curves: AggregateCurves
    histogram: RewardHistogram
    replicates: tuple[ReplicateRecord, ...]
    policies: tuple[str, ...]
    wall_clock_seconds: float


def resample_step_curve(trajectory: Trajectory, grid: np.ndarray) -> np.ndarray:
    """Benefited counts at the grid times (right-continuous step function).

    Before the first batch completes the level is the post-quake count; at a
    completion time the post-step level applies; past the end of the schedule
    the final level holds.
    """
    levels = np.array(
        [trajectory.initial_benefited] + [s.benefited for s in trajectory.steps],
        dtype=float,
    )
    boundaries = np.cumsum([s.duration for s in trajectory.steps])
    idx = np.searchsorted(boundaries, grid, side="right")
    return levels[idx]


def policy_reward(community: Community, trajectory: Trajectory,
                  cumulative: bool = False) -> Reward:
    """Reward of a finished trajectory; degenerate no-damage runs score the
    constant full-benefit level."""
    if not trajectory.steps:
        return Reward(value=float(trajectory.initial_benefited), total_time=0.0)
    return trajectory_reward(trajectory, cumulative=cumulative)


def _run_replicate(index: int, community: Community, hazard: HazardModel,
                   config: ExperimentConfig) -> ReplicateRecord:
    seq = np.random.SeedSequence(entropy=config.master_seed, spawn_key=(index,))
    scenario_seq, heuristic_seq, sa_seq = seq.spawn(3)
    scenario = sample_scenario(
        community, hazard.scenario, hazard.fragilities, hazard.restoration,
        np.random.default_rng(scenario_seq),
        deterministic_durations=hazard.deterministic_durations,
    )
    heuristic = BaseHeuristic(
        kind=config.heuristic_kind,
        seed=int(heuristic_seq.generate_state(1)[0]),
    )
    base_config = PolicyConfig(
        crew_budget=config.crew_budget,
        heuristic=heuristic,
        sa_schedule=config.sa_schedule,
        oracle_cap=config.oracle_cap,
        cumulative_objective=config.cumulative_objective,
    )
    trajectories: dict[str, Trajectory] = {}
    rewards: dict[str, Reward] = {}
    for k, policy in enumerate(config.policies):
        # distinct SA stream per policy, fixed by (replicate, policy slot)
        cfg = replace(base_config, sa_seed=int(sa_seq.generate_state(k + 1)[-1]))
        trajectory = run_policy(community, scenario, policy, cfg)
        trajectories[policy] = trajectory
        rewards[policy] = policy_reward(community, trajectory,
                                        config.cumulative_objective)
    return ReplicateRecord(
        index=index,
        scenario_hash=scenario.scenario_hash(),
        trajectories=trajectories,
        rewards=rewards,
    )


def run_experiment(community: Community, hazard: HazardModel,
                   config: ExperimentConfig) -> ExperimentResult:
    """Run all replicates and aggregate curves and reward histograms."""
    started = time.perf_counter()
    indices = range(config.replicates)

    def tick(i: int) -> None:
        if config.progress:
            print(f"replicate {i + 1}/{config.replicates} done", file=sys.stderr)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            records = []
            for rec in pool.map(
                lambda i: _run_replicate(i, community, hazard, config), indices
            ):
                records.append(rec)
                tick(rec.index)
    else:
        records = []
        for i in indices:
            records.append(_run_replicate(i, community, hazard, config))
            tick(i)

    res = config.grid_resolution_days
    t_max = max(
        (rec.trajectories[p].total_time for rec in records for p in config.policies),
        default=0.0,
    )
    n_points = int(np.floor(t_max / res)) + 2 if t_max > 0 else 1
    grid = np.arange(n_points, dtype=float) * res

    mean: dict[str, np.ndarray] = {}
    std: dict[str, np.ndarray] = {}
    curves: dict[str, np.ndarray] = {}
    for policy in config.policies:
        stack = np.vstack([
            resample_step_curve(rec.trajectories[policy], grid) for rec in records
        ])
        curves[policy] = stack
        mean[policy] = stack.mean(axis=0)
        std[policy] = stack.std(axis=0)

    values = {
        policy: np.array([rec.rewards[policy].value for rec in records])
        for policy in config.policies
    }
    pooled = np.concatenate([values[p] for p in config.policies])
    edges = np.histogram_bin_edges(pooled, bins=config.histogram_bins)
    counts = {
        policy: np.histogram(values[policy], bins=edges)[0]
        for policy in config.policies
    }

    return ExperimentResult(
        curves=AggregateCurves(grid=grid, mean=mean, std=std, replicate_curves=curves),
        histogram=RewardHistogram(bin_edges=edges, counts=counts, values=values),
        replicates=tuple(records),
        policies=tuple(config.policies),
        wall_clock_seconds=time.perf_counter() - started,
    )
