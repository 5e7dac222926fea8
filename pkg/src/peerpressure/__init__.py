"""Opinion dynamics on weighted connected graphs under increasing peer pressure."""

__version__ = "0.1.0"

from .diagnostics import (
    convergence_ratio_series,
    global_utility,
    gradient_identity_check,
    price_of_anarchy,
    social_stress,
)
from .dynamics import (
    AgentProfile,
    LimitPoint,
    Trajectory,
    bounded_limit,
    consensus_limit,
    contraction_factor,
    fixed_point_at,
    simulate,
    step,
)
from .graph import (
    WeightedGraph,
    build_graph,
    derive_matrices,
    generate_barabasi_albert,
    generate_clique_clusters,
    read_edge_list,
    write_edge_list,
)
from .inference import ObservationPanel, ScheduleFitter, fit_loss, fit_schedule, read_panel
from .schedules import PressureSchedule, parse_schedule

__all__ = [
    "AgentProfile",
    "LimitPoint",
    "ObservationPanel",
    "PressureSchedule",
    "ScheduleFitter",
    "Trajectory",
    "WeightedGraph",
    "bounded_limit",
    "build_graph",
    "consensus_limit",
    "contraction_factor",
    "convergence_ratio_series",
    "derive_matrices",
    "fit_loss",
    "fit_schedule",
    "fixed_point_at",
    "generate_barabasi_albert",
    "generate_clique_clusters",
    "global_utility",
    "gradient_identity_check",
    "parse_schedule",
    "price_of_anarchy",
    "read_edge_list",
    "read_panel",
    "simulate",
    "social_stress",
    "step",
    "write_edge_list",
]
