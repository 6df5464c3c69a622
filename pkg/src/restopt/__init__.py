"""Post-earthquake repair scheduling for interdependent community networks.

Models a community of power, water, bridge, and food-retailer components,
samples seismic damage scenarios, and schedules crew-constrained repairs with
a one-step-lookahead rollout policy guided by simulated annealing. The reward
of a schedule is the time-averaged number of residents with electricity,
potable water, and access to a functional food retailer.
"""

__version__ = "0.1.0"

from .annealing import (
    AnnealingSchedule,
    AnnealResult,
    accept_probability,
    anneal,
    neighbor,
    refresh_pool,
)
from .community import (
    CellStatus,
    Community,
    CommunityValidationError,
    Component,
    FunctionalityMap,
    PopulationCell,
    Retailer,
    benefited_population,
    gravity_probabilities,
    propagate_functionality,
    validate_community,
)
from .dynamics import (
    RecoveryState,
    RepairAction,
    Trajectory,
    TrajectoryStep,
    apply_action,
    enumerate_actions,
    initial_state,
    is_terminal,
)
from .experiment import (
    AggregateCurves,
    ExperimentConfig,
    ExperimentResult,
    HazardModel,
    RewardHistogram,
    policy_reward,
    resample_step_curve,
    run_experiment,
)
from .hazard import (
    DamageScenario,
    DamageState,
    DurationSpec,
    FragilityCurve,
    RestorationModel,
    SeismicScenario,
    compute_intensity,
    damage_state_probabilities,
    exceedance_probabilities,
    make_damage_scenario,
    sample_damage_state,
    sample_scenario,
)
from .io import (
    ConfigBundle,
    ConfigError,
    RunManifest,
    build_manifest,
    dump_config,
    load_config,
    load_config_dict,
    write_results,
)
from .objective import Reward, compare_policies, is_better, trajectory_reward
from .rollout import (
    BaseHeuristic,
    OracleCapExceeded,
    PolicyConfig,
    base_next_action,
    completion_value,
    exhaustive_optimum,
    rollout_step,
    run_policy,
)

from importlib import resources as _resources


def bundled_config_path(name: str = "gilroy_small"):
    """Filesystem path of a config shipped with the package."""
    return _resources.files(__name__) / "configs" / f"{name}.yaml"
