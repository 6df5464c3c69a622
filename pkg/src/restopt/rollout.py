"""Rollout policies: base heuristic, one-step lookahead, exhaustive optimum.

The base heuristic repairs components in a fixed order (a seeded random
permutation of the initially damaged set, or a static importance order),
taking the next N still-damaged components each epoch. The rollout policy
improves on it with a single-step lookahead: at every epoch it scores each
candidate action by the reward of the completed schedule obtained by playing
that action and then following the base heuristic to termination, and commits
to the best-scoring candidate. Candidates come either from full enumeration
of the crew-bounded action set or from the simulated annealer; the base
heuristic's own next action is always among them (fortification), which makes
per-run improvement over the base policy a guarantee rather than a tendency.

For small instances an exhaustive search provides the true optimum. The
objective is a ratio (benefit integral over total time), so a single best
completion per damaged set cannot be memoized; instead the search keeps, for
every damaged set, the Pareto front over (benefit integral, time) of the
completions from it, which is exact because a completion that is pointwise
better on both coordinates is better under any prefix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .annealing import AnnealingSchedule, anneal
from .community import Community, benefited_population
from .dynamics import (
    RecoveryState,
    RepairAction,
    Trajectory,
    TrajectoryStep,
    apply_action,
    initial_state,
    is_terminal,
    iter_actions,
)
from .hazard import DamageScenario
from .objective import Reward, compare_policies, trajectory_reward

POLICY_NAMES = ("base", "rollout", "rollout-sa", "optimal")

# static repair precedence for the importance-ordered heuristic: power first,
# then water supply chain, then access and retailers
_KIND_PRIORITY = {
    "power_source": 0,
    "substation": 1,
    "tower_line_segment": 2,
    "water_well": 3,
    "booster_pump": 4,
    "water_tank": 5,
    "pipe_segment": 6,
    "bridge": 7,
    "retailer": 8,
}


class OracleCapExceeded(RuntimeError):
    """The exhaustive search exceeded its node expansion cap."""


@dataclass(frozen=True)
class BaseHeuristic:
    """A fixed restoration order: 'random_permutation' or 'importance_ordered'."""

    kind: str = "random_permutation"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("random_permutation", "importance_ordered"):
            raise ValueError(f"unknown base heuristic kind '{self.kind}'")

    def ordering(self, initial_damaged: Iterable[str],
                 components: Mapping | None = None) -> tuple[str, ...]:
        """The heuristic's repair order over the initially damaged components."""
        ids = sorted(initial_damaged)
        if self.kind == "random_permutation":
            rng = np.random.default_rng(self.seed)
            return tuple(ids[int(i)] for i in rng.permutation(len(ids)))
        if components is None:
            raise ValueError("importance_ordered needs the community components")
        return tuple(sorted(ids, key=lambda c: (_KIND_PRIORITY[components[c].kind], c)))


def next_from_order(order: tuple[str, ...], state: RecoveryState) -> RepairAction:
    """First N still-damaged components in the heuristic order."""
    if is_terminal(state):
        raise ValueError("terminal state has no next action")
    picked = []
    for cid in order:
        if cid in state.damaged:
            picked.append(cid)
            if len(picked) == state.crew_budget:
                break
    return RepairAction(frozenset(picked))


def base_next_action(heuristic: BaseHeuristic, state: RecoveryState,
                     initial_damaged: Iterable[str] | None = None,
                     components: Mapping | None = None) -> RepairAction:
    """The base heuristic's action at ``state``.

    ``initial_damaged`` should be the scenario's D_0 so the order stays fixed
    over a trajectory; it defaults to the state's own damaged set.
    """
    order = heuristic.ordering(
        state.damaged if initial_damaged is None else initial_damaged, components
    )
    return next_from_order(order, state)


def _complete_with_order(community: Community, state: RecoveryState,
                         order: tuple[str, ...],
                         steps: list[TrajectoryStep]) -> None:
    """Extend ``steps`` in place by following the heuristic order to termination."""
    while not is_terminal(state):
        action = next_from_order(order, state)
        state, duration, benefited = apply_action(community, state, action)
        steps.append(TrajectoryStep(action, duration, benefited))


def completion_value(heuristic: BaseHeuristic, community: Community,
                     scenario: DamageScenario, state: RecoveryState,
                     prefix: tuple[TrajectoryStep, ...] = (),
                     initial_benefited: float | None = None,
                     cumulative: bool = False) -> Reward:
    """Reward of (prefix followed by the base heuristic run to termination).

    Deterministic for a fixed heuristic seed. For the degenerate case of a
    terminal state with an empty prefix, the reward is the current benefited
    level over zero time.
    """
    if initial_benefited is None:
        initial_benefited = benefited_population(community, scenario.damaged)
    order = heuristic.ordering(scenario.damaged, community.components)
    steps = list(prefix)
    _complete_with_order(community, state, order, steps)
    trajectory = Trajectory(tuple(steps), initial_benefited)
    if not steps:
        return Reward(value=float(initial_benefited), total_time=0.0)
    return trajectory_reward(trajectory, cumulative=cumulative)


def rollout_step(community: Community, state: RecoveryState,
                 order: tuple[str, ...],
                 prefix: tuple[TrajectoryStep, ...],
                 initial_benefited: float,
                 sa_schedule: AnnealingSchedule | None = None,
                 sa_rng: np.random.Generator | None = None,
                 cumulative: bool = False) -> RepairAction:
    """Pick the action whose base-heuristic completion scores best.

    With ``sa_schedule`` unset every action in the crew-bounded action set is
    scored (exhaustive selector); otherwise the annealer explores candidates,
    seeded at the base heuristic's own action so the selection can never fall
    below it.
    """
    base_action = next_from_order(order, state)

    def completion_reward(action: RepairAction) -> Reward:
        nxt, duration, benefited = apply_action(community, state, action)
        steps = list(prefix)
        steps.append(TrajectoryStep(action, duration, benefited))
        _complete_with_order(community, nxt, order, steps)
        reward = trajectory_reward(Trajectory(tuple(steps), initial_benefited),
                                   cumulative=cumulative)
        # rank candidates of this epoch by their own action, not the
        # trajectory's first action
        return Reward(reward.value, reward.total_time, action.canonical)

    if sa_schedule is None:
        best_action, best_reward = base_action, completion_reward(base_action)
        for action in iter_actions(state):
            if action.targets == base_action.targets:
                continue
            reward = completion_reward(action)
            if compare_policies(reward, best_reward) > 0:
                best_action, best_reward = action, reward
        return best_action

    if sa_rng is None:
        raise ValueError("rollout with annealing needs an RNG")
    result = anneal(
        lambda a: completion_reward(a).value,
        state.damaged,
        state.crew_budget,
        sa_schedule,
        sa_rng,
        initial_action=base_action,
    )
    return result.action


@dataclass(frozen=True)
class PolicyConfig:
    """Everything needed to run one policy on one scenario."""

    crew_budget: int
    heuristic: BaseHeuristic = BaseHeuristic()
    sa_schedule: AnnealingSchedule | None = None
    sa_seed: int | None = None
    oracle_cap: int = 1_000_000
    cumulative_objective: bool = False


def run_policy(community: Community, scenario: DamageScenario, policy: str,
               config: PolicyConfig) -> Trajectory:
    """Simulate one policy to termination and return the full trajectory.

    ``policy`` is one of 'base', 'rollout' (exhaustive lookahead),
    'rollout-sa' (annealer-guided lookahead), or 'optimal' (exhaustive
    search, small instances only).
    """
    if policy not in POLICY_NAMES:
        raise ValueError(f"unknown policy '{policy}' (choose from {POLICY_NAMES})")
    initial_benefited = benefited_population(community, scenario.damaged)
    state = initial_state(scenario, config.crew_budget)
    if is_terminal(state):
        return Trajectory((), initial_benefited)

    if policy == "optimal":
        if config.cumulative_objective:
            raise ValueError(
                "the exhaustive optimizer only supports the duration-weighted objective"
            )
        trajectory, _ = exhaustive_optimum(
            community, scenario, state,
            node_cap=config.oracle_cap,
        )
        return trajectory

    order = config.heuristic.ordering(scenario.damaged, community.components)
    sa_rng = None
    sa_schedule = None
    if policy == "rollout-sa":
        sa_schedule = config.sa_schedule
        if sa_schedule is None:
            raise ValueError("rollout-sa needs an annealing schedule")
        sa_rng = np.random.default_rng(config.sa_seed)

    steps: list[TrajectoryStep] = []
    while not is_terminal(state):
        if policy == "base":
            action = next_from_order(order, state)
        else:
            action = rollout_step(
                community, state, order, tuple(steps), initial_benefited,
                sa_schedule=sa_schedule, sa_rng=sa_rng,
                cumulative=config.cumulative_objective,
            )
        state, duration, benefited = apply_action(community, state, action)
        steps.append(TrajectoryStep(action, duration, benefited))
    return Trajectory(tuple(steps), initial_benefited)


@dataclass
class _FrontEntry:
    """One nondominated completion from a damaged set."""

    integral: float  # sum of benefited * step duration over the completion
    time: float
    action: RepairAction | None = None
    child: "_FrontEntry | None" = None


def _pareto_prune(entries: list[_FrontEntry]) -> list[_FrontEntry]:
    """Keep entries not dominated on (integral max, time min)."""
    entries.sort(key=lambda e: (e.time, -e.integral,
                                e.action.canonical if e.action else ()))
    front: list[_FrontEntry] = []
    best = -np.inf
    for e in entries:
        if e.integral > best:
            front.append(e)
            best = e.integral
    return front


def exhaustive_optimum(community: Community, scenario: DamageScenario,
                       state: RecoveryState | None = None,
                       node_cap: int = 1_000_000,
                       crew_budget: int | None = None) -> tuple[Trajectory, Reward]:
    """True optimal schedule for a small instance, by Pareto-front search.

    Raises :class:`OracleCapExceeded` once more than ``node_cap`` candidate
    completions have been expanded.
    """
    if state is None:
        if crew_budget is None:
            raise ValueError("need a state or a crew budget")
        state = initial_state(scenario, crew_budget)
    if is_terminal(state):
        initial = benefited_population(community, scenario.damaged)
        return Trajectory((), initial), Reward(float(initial), 0.0)

    remaining = dict(state.remaining)
    budget = state.crew_budget
    benefit_cache: dict[frozenset[str], float] = {}
    front_memo: dict[frozenset[str], list[_FrontEntry]] = {}
    expanded = 0

    def benefit(damaged: frozenset[str]) -> float:
        got = benefit_cache.get(damaged)
        if got is None:
            got = benefited_population(community, damaged)
            benefit_cache[damaged] = got
        return got

    def front(damaged: frozenset[str]) -> list[_FrontEntry]:
        nonlocal expanded
        if not damaged:
            return [_FrontEntry(0.0, 0.0)]
        memo = front_memo.get(damaged)
        if memo is not None:
            return memo
        probe = RecoveryState(damaged, {c: remaining[c] for c in damaged}, 0.0, budget)
        entries: list[_FrontEntry] = []
        for action in iter_actions(probe):
            duration = max(remaining[t] for t in action.targets)
            nxt = damaged - action.targets
            level = benefit(nxt)
            for tail in front(nxt):
                expanded += 1
                if expanded > node_cap:
                    raise OracleCapExceeded(
                        f"exhaustive search exceeded {node_cap} expanded nodes"
                    )
                entries.append(_FrontEntry(
                    integral=level * duration + tail.integral,
                    time=duration + tail.time,
                    action=action,
                    child=tail,
                ))
        result = _pareto_prune(entries)
        front_memo[damaged] = result
        return result

    initial_benefited = benefited_population(community, scenario.damaged)

    def reconstruct(entry: _FrontEntry) -> Trajectory:
        steps: list[TrajectoryStep] = []
        damaged = state.damaged
        node: _FrontEntry | None = entry
        while node is not None and node.action is not None:
            duration = max(remaining[t] for t in node.action.targets)
            damaged = damaged - node.action.targets
            steps.append(TrajectoryStep(node.action, duration, benefit(damaged)))
            node = node.child
        return Trajectory(tuple(steps), initial_benefited)

    best_trajectory: Trajectory | None = None
    best_reward: Reward | None = None
    for entry in front(state.damaged):
        trajectory = reconstruct(entry)
        reward = trajectory_reward(trajectory)
        if best_reward is None or compare_policies(reward, best_reward) > 0:
            best_trajectory, best_reward = trajectory, reward
    assert best_trajectory is not None and best_reward is not None
    return best_trajectory, best_reward
