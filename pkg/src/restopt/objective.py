"""Schedule quality: time-averaged benefited population over the recovery.

The reward of a complete schedule is the duration-weighted mean of the
post-step benefited counts,

    F = sum_t h_t * k_t / sum_t k_t,

i.e. the area under the recovery step curve divided by the total recovery
time. Higher is better. An alternative reading that weights each h_t by the
cumulative elapsed time is kept behind the ``cumulative`` flag for
sensitivity comparisons; it is not used by the policies.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dynamics import Trajectory


@dataclass(frozen=True)
class Reward:
    """A schedule's score plus the deterministic tie-break attributes."""

    value: float
    total_time: float
    tie_key: tuple[str, ...] = ()


def trajectory_reward(trajectory: Trajectory, cumulative: bool = False) -> Reward:
    """Score a complete trajectory; rejects empty or zero-length schedules."""
    if not trajectory.steps:
        raise ValueError("cannot score an empty trajectory")
    total = trajectory.total_time
    if total <= 0.0:
        raise ValueError("trajectory has zero total duration")
    if cumulative:
        elapsed = 0.0
        acc = 0.0
        for step in trajectory.steps:
            elapsed += step.duration
            acc += step.benefited * elapsed
        value = acc / total
    else:
        value = sum(s.benefited * s.duration for s in trajectory.steps) / total
    return Reward(
        value=value,
        total_time=total,
        tie_key=trajectory.steps[0].action.canonical,
    )


def compare_policies(a: Reward, b: Reward) -> int:
    """Total order on rewards: positive if ``a`` is preferred, 0 on exact tie.

    Higher value wins; ties go to the shorter schedule, then to the
    lexicographically smaller tie key, so selections are reproducible.
    """
    if a.value != b.value:
        return 1 if a.value > b.value else -1
    if a.total_time != b.total_time:
        return 1 if a.total_time < b.total_time else -1
    if a.tie_key != b.tie_key:
        return 1 if a.tie_key < b.tie_key else -1
    return 0


def is_better(a: Reward, b: Reward) -> bool:
    return compare_policies(a, b) > 0
