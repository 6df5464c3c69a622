"""Repair decision process: states, crew-bounded action sets, transitions.

Decisions happen at batch boundaries: a repair action assigns up to N crews to
distinct damaged components, all targets finish together after the longest of
their repair durations, and the next decision is taken then. Durations of
unassigned components do not advance (they measure crew effort, not calendar
time), so a scenario's sampled durations stay fixed over the whole recovery.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping

from .community import Community, benefited_population
from .hazard import DamageScenario


@dataclass(frozen=True)
class RepairAction:
    """A nonempty set of damaged components assigned to crews for one step."""

    targets: frozenset[str]

    def __post_init__(self):
        if not self.targets:
            raise ValueError("repair action needs at least one target")

    @property
    def canonical(self) -> tuple[str, ...]:
        return tuple(sorted(self.targets))


@dataclass(frozen=True)
class RecoveryState:
    """Damaged set, per-component remaining repair effort, elapsed days."""

    damaged: frozenset[str]
    remaining: Mapping[str, float]
    elapsed: float
    crew_budget: int

    def __post_init__(self):
        if self.crew_budget < 1:
            raise ValueError("crew_budget must be at least 1")
        extra = set(self.remaining) - set(self.damaged)
        if extra:
            raise ValueError(f"remaining durations for undamaged components: {sorted(extra)}")


@dataclass(frozen=True)
class TrajectoryStep:
    action: RepairAction
    duration: float
    benefited: float


@dataclass(frozen=True)
class Trajectory:
    """A complete (or partial) repair schedule with its recovery milestones.

    ``initial_benefited`` is the benefited count right after the quake,
    before any repair completes.
    """

    steps: tuple[TrajectoryStep, ...]
    initial_benefited: float

    @property
    def total_time(self) -> float:
        return sum(s.duration for s in self.steps)

    @property
    def actions(self) -> tuple[RepairAction, ...]:
        return tuple(s.action for s in self.steps)


def initial_state(scenario: DamageScenario, crew_budget: int) -> RecoveryState:
    """Entry state of the decision process for a sampled damage scenario."""
    remaining = {cid: scenario.durations[cid] for cid in scenario.damaged}
    return RecoveryState(
        damaged=scenario.damaged,
        remaining=remaining,
        elapsed=0.0,
        crew_budget=crew_budget,
    )


def is_terminal(state: RecoveryState) -> bool:
    return not state.damaged


def enumerate_actions(state: RecoveryState) -> list[RepairAction]:
    """All nonempty subsets of the damaged set up to the crew budget.

    Canonical order: by subset size, then lexicographically by sorted ids.
    """
    if is_terminal(state):
        raise ValueError("terminal state has no actions")
    ids = sorted(state.damaged)
    top = min(state.crew_budget, len(ids))
    return [
        RepairAction(frozenset(combo))
        for size in range(1, top + 1)
        for combo in itertools.combinations(ids, size)
    ]


def iter_actions(state: RecoveryState) -> Iterator[RepairAction]:
    """Lazy variant of :func:`enumerate_actions`, same canonical order."""
    ids = sorted(state.damaged)
    top = min(state.crew_budget, len(ids))
    for size in range(1, top + 1):
        for combo in itertools.combinations(ids, size):
            yield RepairAction(frozenset(combo))


def apply_action(community: Community, state: RecoveryState,
                 action: RepairAction) -> tuple[RecoveryState, float, float]:
    """Repair a batch of targets in parallel.

    Returns (next state, step duration = longest target repair, benefited
    population after the batch completes).
    """
    targets = action.targets
    stray = targets - state.damaged
    if stray:
        raise ValueError(f"action targets undamaged components: {sorted(stray)}")
    if len(targets) > state.crew_budget:
        raise ValueError(
            f"action assigns {len(targets)} crews but budget is {state.crew_budget}"
        )
    duration = max(state.remaining[t] for t in targets)
    new_damaged = state.damaged - targets
    nxt = RecoveryState(
        damaged=new_damaged,
        remaining={c: d for c, d in state.remaining.items() if c in new_damaged},
        elapsed=state.elapsed + duration,
        crew_budget=state.crew_budget,
    )
    return nxt, duration, benefited_population(community, new_damaged)
