"""Conflict-graph sketching and certified scheduling for physical-model
wireless links."""

from .conflict import (
    F_ONE,
    ConflictGraph,
    SublinearF,
    build_graph,
    f_star,
    is_independent,
    measure_tightness,
    sensitivity_order,
)
from .errors import InternalError, PreconditionError, SizeError, UsageError
from .generators import (
    GenSpec,
    gen_general_metric_star,
    gen_hardinstance,
    gen_ndependence,
    gen_random,
    gen_uniform_power_clique,
)
from .graphalg import (
    CliqueCover,
    Coloring,
    LocalRatioResult,
    brute_force_chromatic,
    brute_force_clique_cover,
    brute_force_mwis,
    greedy_color,
    inductiveness,
    local_ratio_mwis,
    max_clique_cover_size,
    online_color,
    postneighbor_clique_cover,
    random_maximal_independent_set,
    simplicial_order,
)
from .harness import (
    CSV_HEADER,
    CalibrationResult,
    ExperimentReport,
    ExperimentRow,
    calibrate_gamma,
    run_lowerbound_experiment,
    run_tightness_experiment,
)
from .model import Instance, Link, MetricContext
from .scheduling import (
    MwislResult,
    Schedule,
    Slot,
    VirtualLink,
    mcma_expand,
    mwisl_solve,
    online_schedule,
    rate_control_replicas,
    tdma_schedule,
)
from .sinr import (
    FeasibilityReport,
    PowerAssignment,
    affectance_tau,
    bidirectional_feasible_exact,
    default_delta,
    default_tau,
    delta_lower_bound,
    explicit_power,
    fixed_point_feasibility_oracle,
    is_bidirectionally_p_feasible,
    is_p_feasible,
    is_t_strong,
    is_tau_feasible,
    is_weak_link,
    kesselheim_I,
    kesselheim_sufficient,
    kesselheim_threshold,
    length_stretch,
    length_stretch_inverse,
    max_servable_length,
    necessary_interference_bound,
    oblivious_power,
    sir,
    spectral_feasibility_oracle,
    t_strong_partition,
    tau_interval,
    uniform_power,
    weak_length_threshold,
    weak_link_transform,
)

__version__ = "0.1.0"

__all__ = [
    "CSV_HEADER",
    "CalibrationResult",
    "CliqueCover",
    "Coloring",
    "ConflictGraph",
    "ExperimentReport",
    "ExperimentRow",
    "F_ONE",
    "FeasibilityReport",
    "GenSpec",
    "Instance",
    "InternalError",
    "Link",
    "LocalRatioResult",
    "MetricContext",
    "MwislResult",
    "PowerAssignment",
    "PreconditionError",
    "Schedule",
    "SizeError",
    "Slot",
    "SublinearF",
    "UsageError",
    "VirtualLink",
    "affectance_tau",
    "bidirectional_feasible_exact",
    "brute_force_chromatic",
    "brute_force_clique_cover",
    "brute_force_mwis",
    "build_graph",
    "calibrate_gamma",
    "default_delta",
    "default_tau",
    "delta_lower_bound",
    "explicit_power",
    "f_star",
    "fixed_point_feasibility_oracle",
    "gen_general_metric_star",
    "gen_hardinstance",
    "gen_ndependence",
    "gen_random",
    "gen_uniform_power_clique",
    "greedy_color",
    "inductiveness",
    "is_bidirectionally_p_feasible",
    "is_independent",
    "is_p_feasible",
    "is_t_strong",
    "is_tau_feasible",
    "is_weak_link",
    "kesselheim_I",
    "kesselheim_sufficient",
    "kesselheim_threshold",
    "length_stretch",
    "length_stretch_inverse",
    "local_ratio_mwis",
    "max_clique_cover_size",
    "max_servable_length",
    "mcma_expand",
    "measure_tightness",
    "mwisl_solve",
    "necessary_interference_bound",
    "oblivious_power",
    "online_color",
    "online_schedule",
    "postneighbor_clique_cover",
    "random_maximal_independent_set",
    "rate_control_replicas",
    "run_lowerbound_experiment",
    "run_tightness_experiment",
    "sensitivity_order",
    "simplicial_order",
    "sir",
    "spectral_feasibility_oracle",
    "t_strong_partition",
    "tau_interval",
    "tdma_schedule",
    "uniform_power",
    "weak_length_threshold",
    "weak_link_transform",
]
