"""
One-step lookahead vs the exhaustive optimum on a small instance
================================================================

Damages six components of the bundled community, then schedules repairs with
two crews under three policies: the random-order base heuristic, the rollout
policy that scores every candidate batch by its base-heuristic completion,
and the exhaustive optimum. The rollout is fortified (the base action is
always among its candidates), so its reward is sandwiched between the other
two on every instance.
"""

import restopt as r
from restopt.hazard import DamageState

bundle = r.load_config(r.bundled_config_path())
community = bundle.community

damaged = {
    "sub_north": 5.0,   # gates the northern third of the city
    "w3": 2.0,
    "wt_central": 6.0,
    "p_x1": 1.5,
    "br_east": 4.0,
    "ret_c": 3.0,
}
scenario = r.make_damage_scenario(
    {cid: DamageState.MODERATE for cid in damaged}, damaged)
config = r.PolicyConfig(crew_budget=2, heuristic=r.BaseHeuristic(seed=11))

print(f"damaged: {sorted(damaged)}  crews: {config.crew_budget}")
print(f"post-quake benefited: "
      f"{r.benefited_population(community, scenario.damaged):.0f} "
      f"of {community.total_population}\n")


def show(policy_name, trajectory):
    reward = r.policy_reward(community, trajectory)
    print(f"{policy_name}: F = {reward.value:8.1f}  "
          f"total = {reward.total_time:5.1f} d")
    for step in trajectory.steps:
        print(f"    repair {sorted(step.action.targets)} "
              f"({step.duration:.1f} d) -> benefited {step.benefited:.0f}")
    return reward


f_base = show("base      ", r.run_policy(community, scenario, "base", config))
f_roll = show("rollout   ", r.run_policy(community, scenario, "rollout", config))
optimal, f_star = r.exhaustive_optimum(community, scenario,
                                       crew_budget=config.crew_budget)
show("optimal   ", optimal)

print(f"\nsandwich bound: {f_base.value:.1f} <= {f_roll.value:.1f} "
      f"<= {f_star.value:.1f}")
assert f_base.value <= f_roll.value <= f_star.value
