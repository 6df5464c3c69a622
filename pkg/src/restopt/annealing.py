"""Simulated annealing over crew-bounded repair actions.

Used as the candidate selector inside each rollout decision epoch: rather
than scoring every subset of the damaged set, the annealer walks a Markov
chain over actions drawn from a working pool (a subset of the damaged
components), accepting worse moves with the Boltzmann probability
exp(-delta_f / (k_B * T)) under a geometric cooling schedule. The pool is
periodically refreshed: members whose actions scored poorly are dropped and
replaced by components not currently considered.

The returned action is always the best action ever *evaluated* (incumbent
tracking), never just the final chain state, and evaluations are cached so
the evaluator is called at most ``iterations`` times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .dynamics import RepairAction

DEFAULT_POOL_CAP = 20


@dataclass(frozen=True)
class AnnealingSchedule:
    """Cooling and budget parameters for one decision epoch."""

    t0: float
    cooling: float = 0.95
    iterations: int = 100
    boltzmann: float = 1.0
    pool_size: int | None = None  # None: min(|damaged|, DEFAULT_POOL_CAP)
    refresh_fraction: float = 0.25
    refresh_every: int = 25

    def __post_init__(self):
        if self.t0 <= 0.0:
            raise ValueError("initial temperature must be positive")
        if not 0.0 < self.cooling < 1.0:
            raise ValueError("cooling factor must be in (0, 1)")
        if self.iterations < 1:
            raise ValueError("iteration budget must be at least 1")
        if self.boltzmann <= 0.0:
            raise ValueError("boltzmann constant must be positive")
        if not 0.0 <= self.refresh_fraction < 1.0:
            raise ValueError("refresh_fraction must be in [0, 1)")
        if self.refresh_every < 0:
            raise ValueError("refresh_every must be nonnegative (0 disables)")


@dataclass
class AnnealResult:
    action: RepairAction
    value: float
    evaluations: int


def accept_probability(delta_f: float, temperature: float, boltzmann: float = 1.0) -> float:
    """Probability of accepting a move that worsens the objective by delta_f.

    Improving or neutral moves (delta_f <= 0) are always accepted.
    """
    if temperature <= 0.0:
        raise ValueError("temperature must be positive")
    if boltzmann <= 0.0:
        raise ValueError("boltzmann constant must be positive")
    if delta_f <= 0.0:
        return 1.0
    return math.exp(-delta_f / (boltzmann * temperature))


def _pick(rng: np.random.Generator, items: list[str]) -> str:
    return items[int(rng.integers(len(items)))]


def neighbor(action: RepairAction, pool: Iterable[str], crew_budget: int,
             rng: np.random.Generator) -> RepairAction:
    """Propose a valid action one move away: swap, add, or drop a target.

    The move type is chosen uniformly among the feasible ones; with a
    single-member pool the action is returned unchanged.
    """
    pool_sorted = sorted(pool)
    targets = sorted(action.targets)
    outside = [c for c in pool_sorted if c not in action.targets]

    moves = []
    if outside and targets:
        moves.append("swap")
    if outside and len(targets) < crew_budget:
        moves.append("add")
    if len(targets) > 1:
        moves.append("drop")
    if not moves:
        return action

    move = moves[int(rng.integers(len(moves)))]
    new = set(action.targets)
    if move == "swap":
        new.discard(_pick(rng, targets))
        new.add(_pick(rng, outside))
    elif move == "add":
        new.add(_pick(rng, outside))
    else:
        new.discard(_pick(rng, targets))
    return RepairAction(frozenset(new))


def refresh_pool(pool: Iterable[str], damaged_set: Iterable[str],
                 member_scores: Mapping[str, float], rng: np.random.Generator,
                 refresh_fraction: float = 0.25, temperature: float = 1.0,
                 boltzmann: float = 1.0,
                 protected: Iterable[str] = ()) -> frozenset[str]:
    """Replace the worst-scoring pool members with unseen damaged components.

    A member's score is the best observed value among evaluated actions that
    contained it (missing = never evaluated = worst). The lowest-scoring
    fraction is targeted for replacement; displacing a member that scores
    better than the pool minimum is accepted with the Boltzmann probability
    on the score gap. ``protected`` members (e.g. the chain's current
    targets) are never dropped.
    """
    pool_set = frozenset(pool)
    damaged = frozenset(damaged_set)
    outsiders = sorted(damaged - pool_set)
    if refresh_fraction <= 0.0 or not outsiders:
        return pool_set

    protected_set = frozenset(protected)
    droppable = sorted(
        (c for c in pool_set if c not in protected_set),
        key=lambda c: (member_scores.get(c, -math.inf), c),
    )
    n_replace = min(int(refresh_fraction * len(pool_set)), len(droppable), len(outsiders))
    if n_replace <= 0:
        return pool_set

    floor_score = member_scores.get(droppable[0], -math.inf)
    new_pool = set(pool_set)
    candidates = list(outsiders)
    for member in droppable[:n_replace]:
        score = member_scores.get(member, -math.inf)
        delta = 0.0 if score == floor_score else score - floor_score
        if rng.random() < accept_probability(delta, temperature, boltzmann):
            incoming = candidates.pop(int(rng.integers(len(candidates))))
            new_pool.discard(member)
            new_pool.add(incoming)
            if not candidates:
                break
    return frozenset(new_pool)


def _initial_pool(damaged: list[str], seed_targets: frozenset[str], size: int,
                  rng: np.random.Generator) -> frozenset[str]:
    pool = set(seed_targets)
    remainder = [c for c in damaged if c not in pool]
    need = size - len(pool)
    if need > 0 and remainder:
        take = min(need, len(remainder))
        idx = rng.choice(len(remainder), size=take, replace=False)
        pool.update(remainder[int(i)] for i in idx)
    return frozenset(pool)


def anneal(evaluator: Callable[[RepairAction], float],
           damaged_set: Iterable[str], crew_budget: int,
           schedule: AnnealingSchedule, rng: np.random.Generator,
           initial_action: RepairAction | None = None) -> AnnealResult:
    """Search P_N(pool) for a high-value action under the given budget.

    ``evaluator`` maps an action to its objective value (higher is better).
    When ``initial_action`` is supplied (the rollout passes the base
    heuristic's choice) it is evaluated first, so the incumbent can never
    score below it.
    """
    damaged = sorted(set(damaged_set))
    if not damaged:
        raise ValueError("cannot anneal over an empty damaged set")

    if initial_action is None:
        size = int(rng.integers(1, min(crew_budget, len(damaged)) + 1))
        idx = rng.choice(len(damaged), size=size, replace=False)
        initial_action = RepairAction(frozenset(damaged[int(i)] for i in idx))

    pool_size = schedule.pool_size or min(len(damaged), DEFAULT_POOL_CAP)
    pool_size = max(pool_size, len(initial_action.targets))
    pool = _initial_pool(damaged, initial_action.targets, pool_size, rng)

    cache: dict[frozenset[str], float] = {}
    member_scores: dict[str, float] = {}
    calls = 0

    def evaluate(act: RepairAction) -> float:
        nonlocal calls
        cached = cache.get(act.targets)
        if cached is not None:
            return cached
        value = evaluator(act)
        calls += 1
        cache[act.targets] = value
        for cid in act.targets:
            prev = member_scores.get(cid)
            if prev is None or value > prev:
                member_scores[cid] = value
        return value

    current = initial_action
    current_value = evaluate(current)
    best, best_value = current, current_value

    temperature = schedule.t0
    for step in range(2, schedule.iterations + 1):
        candidate = neighbor(current, pool, crew_budget, rng)
        value = evaluate(candidate)
        delta = current_value - value  # positive when the candidate is worse
        if delta <= 0.0 or rng.random() < accept_probability(
            delta, temperature, schedule.boltzmann
        ):
            current, current_value = candidate, value
        if value > best_value:
            best, best_value = candidate, value
        temperature *= schedule.cooling
        if schedule.refresh_every and step % schedule.refresh_every == 0:
            pool = refresh_pool(
                pool, damaged, member_scores, rng,
                refresh_fraction=schedule.refresh_fraction,
                temperature=temperature,
                boltzmann=schedule.boltzmann,
                protected=current.targets,
            )
    return AnnealResult(action=best, value=best_value, evaluations=calls)
