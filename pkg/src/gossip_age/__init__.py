"""Version age of information in push-style gossip networks.

Simulation, exact small-network solving, and analytic bound evaluation for
gossip on wrap-around grids, rings, lines and complete graphs.
"""

from .bounds import (
    BoundReport,
    EdgePartition,
    beta_constant,
    beta_prime_constant,
    build_bound_report,
    closed_form_bound,
    cube_root_sum_bound,
    decay_product,
    edge_partition,
    floor_inequality_check,
    floor_inequality_margins,
    grid_age_bound,
    harmonic_tail_bound,
    min_boundary_bruteforce,
    min_incoming_edges_bound,
    ratio_function_checks,
    spiral_subset,
    staircase_subset,
)
from .exact import (
    AgeTable,
    SolverLimits,
    complete_graph_oracle,
    enumerate_connected_subsets,
    solve_version_ages,
    subset_age_lower_bound,
    subset_age_upper_bound,
)
from .sim import (
    SimConfig,
    SimResult,
    VersionState,
    estimate_single_node_age,
    replay_replication,
    replicate_sweep,
    simulate,
)
from .topology import (
    ConfigError,
    GossipNetwork,
    NodeSubset,
    TopologySpec,
    build_network,
    lambda0_of_set,
    lambda_into_set,
    neighbors_of_set,
)

__version__ = "0.1.0"

__all__ = [
    "AgeTable",
    "BoundReport",
    "ConfigError",
    "EdgePartition",
    "GossipNetwork",
    "NodeSubset",
    "SimConfig",
    "SimResult",
    "SolverLimits",
    "TopologySpec",
    "VersionState",
    "beta_constant",
    "beta_prime_constant",
    "build_bound_report",
    "build_network",
    "closed_form_bound",
    "complete_graph_oracle",
    "cube_root_sum_bound",
    "decay_product",
    "edge_partition",
    "enumerate_connected_subsets",
    "estimate_single_node_age",
    "floor_inequality_check",
    "floor_inequality_margins",
    "grid_age_bound",
    "harmonic_tail_bound",
    "lambda0_of_set",
    "lambda_into_set",
    "min_boundary_bruteforce",
    "min_incoming_edges_bound",
    "neighbors_of_set",
    "ratio_function_checks",
    "replay_replication",
    "replicate_sweep",
    "simulate",
    "solve_version_ages",
    "spiral_subset",
    "staircase_subset",
    "subset_age_lower_bound",
    "subset_age_upper_bound",
]
