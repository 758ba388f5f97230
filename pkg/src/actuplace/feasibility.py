"""Matroid membership oracles for structural controllability via max-flow.

Forward: ``S`` extends to a structurally controllable ``K``-set iff the
auxiliary bipartite graph ``H_b(S)`` has a matching of size ``n - K + |S|``.
Reverse: the exclusion set ``R`` leaves room for a controllable ``K``-subset of
the remaining nodes iff the flow graph ``H_r`` carries a flow of value ``n``.

``H_b(S)`` has left nodes ``V`` and ``S''``, right nodes ``V'``; ``v_i -- v'_j``
for every network edge ``v_i -> v_j`` and ``v''_k -- v'_k`` for ``k`` in ``S``.

Networks with non-actuatable nodes use a flow formulation that only lets
actuatable nodes complete ``S`` (see :func:`forward_flow_graph`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import CardinalityExceeded, Infeasible, TooManyExclusions
from .flow import FlowNetwork, max_flow
from .network import DirectedNetwork, actuator_set


@dataclass(frozen=True)
class BipartiteAux:
    """``H_b(S)``: ``edges`` are (left v_i, right v'_j) pairs, ``input_edges`` the ``k`` of each ``v''_k -- v'_k``."""

    n: int
    actuators: tuple
    edges: tuple
    input_edges: tuple

    @property
    def left_size(self) -> int:
        return self.n + len(self.actuators)

    @property
    def edge_count(self) -> int:
        return len(self.edges) + len(self.input_edges)


def build_bipartite(net: DirectedNetwork, S: Iterable[int]) -> BipartiteAux:
    S = actuator_set(S, net.n)
    return BipartiteAux(net.n, S, tuple(net.edges), S)


def bipartite_flow_network(aux: BipartiteAux) -> FlowNetwork:
    """Unit-capacity flow graph whose max flow is the maximum matching of ``aux``.

    Layout: ``s=0``, ``t=1``, ``v_i = 2+i``, ``v'_i = 2+n+i``, ``v''_k`` after.
    """
    n = aux.n
    fn = FlowNetwork(2 + 2 * n + len(aux.actuators), source=0, sink=1)
    left, right = 2, 2 + n
    for i in range(n):
        fn.add_arc(0, left + i)
        fn.add_arc(right + i, 1)
    for i, j in aux.edges:
        fn.add_arc(left + i, right + j)
    for pos, k in enumerate(aux.input_edges):
        node = 2 + 2 * n + pos
        fn.add_arc(0, node)
        fn.add_arc(node, right + k)
    return fn


def max_matching_cardinality(net: DirectedNetwork, S: Iterable[int] = ()) -> int:
    """``|m(S)|``, the maximum matching size of ``H_b(S)``."""
    return max_flow(bipartite_flow_network(build_bipartite(net, S)))


def _check_k(net, K):
    if isinstance(K, bool) or int(K) != K or K < 0:
        raise CardinalityExceeded(f"K must be a nonnegative integer, got {K!r}")
    n_act = len(net.actuatable_nodes)
    if K > n_act:
        raise CardinalityExceeded(f"K={K} exceeds the {n_act} actuatable nodes")
    return int(K)


def forward_flow_graph(net: DirectedNetwork, S: Iterable[int], K: int) -> FlowNetwork:
    """Flow graph certifying ``S`` in the forward matroid with restricted actuators.

    Every member of ``S`` gets its own unit input arc; at most ``K - |S|``
    further inputs may be drawn from the other actuatable nodes through a
    bottleneck node. ``S`` is feasible iff the max flow equals ``n``.
    """
    n = net.n
    S = actuator_set(S, n, net)
    extra = [v for v in net.actuatable_nodes if v not in set(S)]
    # s=0, t=1, hub=2, v_i=3+i, v'_i=3+n+i, inputs after
    fn = FlowNetwork(3 + 2 * n + len(S) + len(extra), source=0, sink=1)
    left, right = 3, 3 + n
    for i in range(n):
        fn.add_arc(0, left + i)
        fn.add_arc(right + i, 1)
    for i, j in net.edges:
        fn.add_arc(left + i, right + j)
    node = 3 + 2 * n
    for k in S:
        fn.add_arc(0, node)
        fn.add_arc(node, right + k)
        node += 1
    fn.add_arc(0, 2, K - len(S))
    for k in extra:
        fn.add_arc(2, node)
        fn.add_arc(node, right + k)
        node += 1
    return fn


def forward_feasible(net: DirectedNetwork, S: Iterable[int], K: int) -> bool:
    """Is ``S`` a subset of some structurally controllable actuator set of size ``K``?"""
    S = actuator_set(S, net.n, net)
    K = _check_k(net, K)
    if len(S) > K:
        raise CardinalityExceeded(f"|S|={len(S)} exceeds K={K}")
    if net.fully_actuatable:
        return max_matching_cardinality(net, S) >= net.n - K + len(S)
    return max_flow(forward_flow_graph(net, S, K)) == net.n


def reverse_flow_graph(net: DirectedNetwork, R: Iterable[int], K: int) -> FlowNetwork:
    """``H_r`` for the remaining actuatable nodes ``Act \\ R``.

    Nodes: ``s=0``, ``t=1``, ``s''=2``, ``v_i=3+i``, ``v'_i=3+n+i`` and one
    ``v''`` per remaining node. Unit capacities except ``c(s, s'') = K``.
    """
    n = net.n
    R = set(actuator_set(R, n))
    remaining = [v for v in net.actuatable_nodes if v not in R]
    names = ["s", "t", "s''"] + [f"v{i + 1}" for i in range(n)] + [f"v{i + 1}'" for i in range(n)]
    names += [f"v{k + 1}''" for k in remaining]
    fn = FlowNetwork(3 + 2 * n + len(remaining), source=0, sink=1, names=names)
    left, right = 3, 3 + n
    for i in range(n):
        fn.add_arc(0, left + i)
    fn.add_arc(0, 2, int(K))
    for pos, k in enumerate(remaining):
        fn.add_arc(2, 3 + 2 * n + pos)
    for i, j in net.edges:
        fn.add_arc(left + i, right + j)
    for pos, k in enumerate(remaining):
        fn.add_arc(3 + 2 * n + pos, right + k)
    for j in range(n):
        fn.add_arc(right + j, 1)
    return fn


def reverse_feasible(net: DirectedNetwork, R: Iterable[int], K: int) -> bool:
    """Can ``K`` actuators chosen outside ``R`` render the system structurally controllable?"""
    R = actuator_set(R, net.n, net)
    K = _check_k(net, K)
    if len(R) > len(net.actuatable_nodes) - K:
        raise TooManyExclusions(f"|R|={len(R)} exceeds {len(net.actuatable_nodes)} - K")
    return max_flow(reverse_flow_graph(net, R, K)) == net.n


def min_cardinality(net: DirectedNetwork) -> int:
    """Smallest ``K`` for which some structurally controllable ``K``-set exists."""
    # a perfect matching (e.g. self-loops everywhere) still needs one input
    k0 = max(net.n - max_matching_cardinality(net), 1)
    if net.fully_actuatable:
        return k0
    for K in range(k0, len(net.actuatable_nodes) + 1):
        if max_flow(forward_flow_graph(net, (), K)) == net.n:
            return K
    raise Infeasible("no actuatable subset renders the system structurally controllable")
