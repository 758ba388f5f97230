"""Greedy actuator placement for networked linear systems.

Minimises the regularised average control energy ``tr((W_T(S) + eps I)^-1)``
over actuator sets that keep the network structurally controllable, using
forward and reverse greedy algorithms over matroid constraints.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .network import (
    Branch,
    Bus,
    DirectedNetwork,
    actuator_set,
    build_swing_model,
    dump_network,
    generate_by_degrees,
    load_network,
    tent_degree_sequence,
    parse_network,
    read_swing_csv,
    strongly_connected,
)
from .gramian import EnergyMetric, Gramian, gramian, marginal_gain, metric_f, metric_f_eps, min_eigenvalue
from .flow import BACKEND, FlowNetwork, max_flow
from .feasibility import (
    build_bipartite,
    forward_feasible,
    max_matching_cardinality,
    min_cardinality,
    reverse_feasible,
    reverse_flow_graph,
)
from .greedy import (
    GreedyTrace,
    PlacementResult,
    SetFunction,
    forward_greedy,
    reverse_greedy,
    solve_forward,
    solve_reverse,
)
from .epsilon import EpsilonRun, proper_epsilon
from .guarantees import (
    GuaranteeReport,
    evaluate_forward_guarantee,
    evaluate_reverse_guarantee,
    exact_ratio_and_curvature,
    forward_reverse_duality_check,
    greedy_gamma_alpha_reverse,
    greedy_gamma_forward,
    z_bar,
    z_u,
)
from .oracle import (
    OracleConfig,
    brute_force_optimal,
    counterexample_alpha,
    counterexample_gamma,
    gramian_quadrature,
    random_baseline,
    randomized_structurally_controllable,
)
