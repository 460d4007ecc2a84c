"""Fuzzy opinion network simulator.

Agents hold Gaussian fuzzy opinions (center = opinion, sigma = uncertainty)
and average the opinions of whoever they find close enough.  The package
covers flat bounded-confidence networks, leader-follower groups with their
closed-form tracking predictions, top-down hierarchies of such groups, and
bottom-up emergence under falling confidence thresholds.
"""

from .errors import AddressError, ConfigurationError
from .opinions import (
    AgentParams,
    FuzzyOpinion,
    NetworkState,
    closeness,
    closeness_matrix,
    confidence_weights,
    membership,
    neighbor_mask,
    neighbor_set,
)
from .engine import (
    ExternalReference,
    LeaderReference,
    LocalReference,
    PhaseSpan,
    TrajectoryRecord,
    detect_consensus_partition,
    run_bcfon,
    step_bcfon,
    steps_to_target,
)
from .leader import (
    BlfgConfig,
    ConsensusReport,
    ConvergenceConditions,
    convergence_conditions,
    detect_consensus_time,
    leader_weight_matrix,
    predict_center,
    predict_sigma_leader_ref,
    predict_sigma_limit,
    run_blfg,
    saturated_closure,
    step_blfg,
    steps_to_error_fraction,
)
from .hierarchy import (
    GroupSigmaRow,
    HierarchySpec,
    TdState,
    build_uniform_hierarchy,
    group_sigma_report,
    run_td,
    step_td,
)
from .phases import (
    ClusterReport,
    Phase,
    PhaseSchedule,
    distinct_state_counts,
    phase_summary,
    run_bu,
)
from .scenarios import (
    InitialSpec,
    ScenarioConfig,
    ScenarioRun,
    builtin_scenarios,
    execute_scenario,
    parse_scenario,
    ramp_initials,
    seeded_initials,
)
from .output import (
    build_summary,
    first_exact_consensus_index,
    read_trajectory_csv,
    write_summary_json,
    write_trajectory_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AddressError",
    "AgentParams",
    "BlfgConfig",
    "ClusterReport",
    "ConfigurationError",
    "ConsensusReport",
    "ExternalReference",
    "FuzzyOpinion",
    "GroupSigmaRow",
    "HierarchySpec",
    "InitialSpec",
    "ConvergenceConditions",
    "LeaderReference",
    "LocalReference",
    "NetworkState",
    "Phase",
    "PhaseSchedule",
    "PhaseSpan",
    "ScenarioConfig",
    "ScenarioRun",
    "TdState",
    "TrajectoryRecord",
    "build_summary",
    "build_uniform_hierarchy",
    "builtin_scenarios",
    "closeness",
    "closeness_matrix",
    "confidence_weights",
    "detect_consensus_partition",
    "detect_consensus_time",
    "distinct_state_counts",
    "execute_scenario",
    "first_exact_consensus_index",
    "group_sigma_report",
    "convergence_conditions",
    "leader_weight_matrix",
    "membership",
    "neighbor_mask",
    "neighbor_set",
    "parse_scenario",
    "phase_summary",
    "predict_center",
    "predict_sigma_leader_ref",
    "predict_sigma_limit",
    "ramp_initials",
    "read_trajectory_csv",
    "run_bcfon",
    "run_blfg",
    "run_bu",
    "run_td",
    "saturated_closure",
    "seeded_initials",
    "step_bcfon",
    "step_blfg",
    "step_td",
    "steps_to_error_fraction",
    "steps_to_target",
    "write_summary_json",
    "write_trajectory_csv",
]
