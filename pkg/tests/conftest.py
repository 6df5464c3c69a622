"""Shared fixtures: toy communities, random small instances, brute-force oracle."""

from __future__ import annotations

import numpy as np
import pytest

import restopt as r
from restopt.dynamics import RecoveryState, Trajectory, TrajectoryStep


@pytest.fixture(scope="session")
def gilroy_bundle():
    return r.load_config(r.bundled_config_path())


@pytest.fixture(scope="session")
def gilroy(gilroy_bundle):
    return gilroy_bundle.community


def make_small_community(weighted_access: bool = False) -> r.Community:
    """Two wells, one tank, two retailers, three cells (3500 residents)."""
    return r.validate_community({
        "name": "toy",
        "weighted_access": weighted_access,
        "components": [
            {"id": "ps", "kind": "power_source", "location": [0.0, 0.0]},
            {"id": "sub_a", "kind": "substation", "location": [1000.0, 0.0]},
            {"id": "w_a", "kind": "water_well", "location": [1200.0, 400.0],
             "requires": ["sub_a"]},
            {"id": "w_b", "kind": "water_well", "location": [800.0, -400.0],
             "requires": ["sub_a"]},
            {"id": "t_a", "kind": "water_tank", "location": [1500.0, 200.0]},
            {"id": "p_a", "kind": "pipe_segment", "location": [1350.0, 300.0],
             "endpoints": ["w_a", "t_a"]},
            {"id": "br_1", "kind": "bridge", "location": [600.0, 300.0]},
            {"id": "ret_1", "kind": "retailer", "location": [1100.0, 250.0],
             "requires": ["sub_a", "t_a"]},
            {"id": "ret_2", "kind": "retailer", "location": [700.0, -200.0],
             "requires": ["sub_a", "w_b"]},
        ],
        "power_links": [["ps", "sub_a"]],
        "retailers": [
            {"component_id": "ret_1", "floor_area_m2": 4000.0,
             "access_bridges": ["br_1"]},
            {"component_id": "ret_2", "floor_area_m2": 2000.0},
        ],
        "cells": [
            {"id": "c1", "location": [1300.0, 500.0], "population": 1000,
             "epn_node": "sub_a", "wn_node": "t_a"},
            {"id": "c2", "location": [900.0, -500.0], "population": 2000,
             "epn_node": "sub_a", "wn_node": "w_b"},
            {"id": "c3", "location": [100.0, 200.0], "population": 500,
             "epn_node": "ps"},
        ],
    })


@pytest.fixture(scope="session")
def small_community():
    return make_small_community()


def synthetic_scenario(ids, durations) -> r.DamageScenario:
    """Damage scenario with given components at moderate damage."""
    states = {cid: r.DamageState.MODERATE for cid in ids}
    return r.make_damage_scenario(states, dict(zip(ids, durations)))


def random_instance(community: r.Community, rng: np.random.Generator,
                    max_damaged: int = 6) -> r.DamageScenario:
    """Random damage subset with integer-day durations on a fixed community."""
    ids = sorted(community.components)
    size = int(rng.integers(1, max_damaged + 1))
    chosen = [ids[int(i)] for i in rng.choice(len(ids), size=size, replace=False)]
    durations = [float(rng.integers(1, 13)) for _ in chosen]
    return synthetic_scenario(chosen, durations)


def brute_force_best(community: r.Community, scenario: r.DamageScenario,
                     crew_budget: int):
    """Independent optimum: enumerate every complete schedule directly.

    No memoization and no pruning; only viable for a handful of components.
    """
    initial_benefited = r.benefited_population(community, scenario.damaged)
    best = None

    def recurse(state: RecoveryState, steps: list[TrajectoryStep]):
        nonlocal best
        if r.is_terminal(state):
            reward = r.trajectory_reward(Trajectory(tuple(steps), initial_benefited))
            if best is None or r.compare_policies(reward, best[1]) > 0:
                best = (Trajectory(tuple(steps), initial_benefited), reward)
            return
        for action in r.enumerate_actions(state):
            nxt, duration, benefited = r.apply_action(community, state, action)
            steps.append(TrajectoryStep(action, duration, benefited))
            recurse(nxt, steps)
            steps.pop()

    recurse(r.initial_state(scenario, crew_budget), [])
    assert best is not None
    return best
