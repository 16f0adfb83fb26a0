"""Slotted-time simulator and exact LP oracle for admission control in
single-hop wireless networks.

The package has five layers:

- ``topology``: conflict graphs, ON/OFF channels, feasible-schedule enumeration.
- ``capacity``: the exact ground truth -- service-rate polytope, hull
  membership with separating certificates, static utility LPs.
- ``control``: the per-slot stochastic loop -- max-weight scheduling,
  threshold rate allocation, Bernoulli arrivals, queue updates.
- ``admission``: the end-to-end admission probe and decision rule.
- ``harness``: config files, windowed metrics, stability experiments, CLI.
"""

from admitsim.topology import (
    ChannelModel,
    ConflictGraph,
    Schedule,
    ScheduleSet,
    enumerate_schedules,
    is_feasible,
    sample_channels,
)
from admitsim.capacity import (
    GammaSet,
    MembershipResult,
    SchedulingPolicy,
    StaticSolution,
    UtilityParams,
    compute_x_hat,
    gamma,
    max_weight_over_hull,
    membership,
    new_link_weight_bound,
    solve_static,
    weight_condition_holds,
)
from admitsim.control import (
    AllocatorConfig,
    NetworkState,
    SimResult,
    SlotTrace,
    allocate_rate,
    draw_arrivals,
    max_weight_schedule,
    simulate,
    step,
)
from admitsim.admission import (
    AdmissionDecision,
    ProbeConfig,
    choose_new_link_weight,
    decide,
    probe,
)
from admitsim.errors import BaselineInfeasibleError, ConfigError

__all__ = [
    "AdmissionDecision",
    "AllocatorConfig",
    "BaselineInfeasibleError",
    "ChannelModel",
    "ConfigError",
    "ConflictGraph",
    "GammaSet",
    "MembershipResult",
    "NetworkState",
    "ProbeConfig",
    "Schedule",
    "ScheduleSet",
    "SchedulingPolicy",
    "SimResult",
    "SlotTrace",
    "StaticSolution",
    "UtilityParams",
    "allocate_rate",
    "choose_new_link_weight",
    "compute_x_hat",
    "decide",
    "draw_arrivals",
    "enumerate_schedules",
    "gamma",
    "is_feasible",
    "max_weight_over_hull",
    "max_weight_schedule",
    "membership",
    "new_link_weight_bound",
    "probe",
    "sample_channels",
    "simulate",
    "solve_static",
    "step",
    "weight_condition_holds",
]
