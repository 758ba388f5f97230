"""Forward and reverse greedy over a matroid, plus the placement drivers.

The engines are generic: they take a :class:`SetFunction` and a membership
oracle for the matroid. Nodes rejected by the oracle stay rejected for the
rest of the run; in a matroid a rejected extension can never become
feasible again.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import InfeasibleAtSize, KBelowMinimum, CardinalityExceeded
from .feasibility import forward_feasible, min_cardinality, reverse_feasible
from .gramian import EnergyMetric
from .network import DirectedNetwork


class SetFunction:
    """A real function on subsets of ``{0, ..., ground_size - 1}``.

    Values are memoised by frozenset, so ``evaluate`` must be deterministic.
    """

    def __init__(self, ground_size: int, evaluate: Callable[[frozenset], float], name: str = ""):
        self.ground_size = int(ground_size)
        self._evaluate = evaluate
        self.name = name
        self._memo = {}

    def __call__(self, S: Iterable[int]) -> float:
        key = frozenset(S)
        val = self._memo.get(key)
        if val is None:
            val = float(self._evaluate(key))
            self._memo[key] = val
        return val

    def gain(self, v: int, S: Iterable[int]) -> float:
        """``rho_v(S) = f(S + v) - f(S)``."""
        S = frozenset(S)
        return self(S | {v}) - self(S)

    def complement(self, ground: Sequence[int] | None = None) -> "SetFunction":
        """``R -> f(ground \\ R)``."""
        base = frozenset(range(self.ground_size) if ground is None else ground)
        return SetFunction(self.ground_size, lambda R: self(base - R), name=f"{self.name}^c")

    def negated(self) -> "SetFunction":
        return SetFunction(self.ground_size, lambda S: -self(S), name=f"-{self.name}")

    @classmethod
    def from_table(cls, n: int, values: dict, name: str = "") -> "SetFunction":
        table = {frozenset(k): float(v) for k, v in values.items()}
        return cls(n, table.__getitem__, name=name)


def modular(weights: Sequence[float]) -> SetFunction:
    w = list(map(float, weights))
    return SetFunction(len(w), lambda S: sum(w[i] for i in S), name="modular")


@dataclass(frozen=True)
class Pick:
    iteration: int
    node: int
    gain: float
    rejected: tuple


@dataclass
class GreedyTrace:
    """Record of one greedy run.

    ``objective_values[t]`` is ``f`` after ``t`` commitments, so
    ``picks[t].gain == objective_values[t+1] - objective_values[t]``.
    """

    direction: str
    picks: list = field(default_factory=list)
    final_set: tuple = ()
    objective_values: list = field(default_factory=list)

    @property
    def order(self) -> list[int]:
        return [p.node for p in self.picks]

    def prefix(self, t: int) -> frozenset:
        return frozenset(p.node for p in self.picks[:t])

    def to_dict(self, labels=None) -> dict:
        name = (lambda i: labels[i]) if labels else (lambda i: i)
        return {
            "direction": self.direction,
            "picks": [
                {
                    "iteration": p.iteration,
                    "node": name(p.node),
                    "gain": p.gain,
                    "rejected": [name(r) for r in p.rejected],
                }
                for p in self.picks
            ],
            "final_set": [name(i) for i in self.final_set],
            "objective_values": list(self.objective_values),
        }


def _gains(f: SetFunction, S: frozenset, candidates, jobs: int):
    base = f(S)
    if jobs > 1 and len(candidates) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            vals = list(pool.map(lambda v: f(S | {v}), candidates))
    else:
        vals = [f(S | {v}) for v in candidates]
    return {v: val - base for v, val in zip(candidates, vals)}


def _run(direction, f, oracle, size, ground, jobs):
    ground = list(range(f.ground_size)) if ground is None else sorted(set(ground))
    current = frozenset()
    considered = set()
    trace = GreedyTrace(direction, objective_values=[f(current)])
    t = 1
    while len(considered) < len(ground) and len(current) < size:
        candidates = [v for v in ground if v not in considered]
        gains = _gains(f, current, candidates, jobs)
        if direction == "forward":
            ranked = sorted(candidates, key=lambda v: (-gains[v], v))
        else:
            ranked = sorted(candidates, key=lambda v: (gains[v], v))
        rejected = []
        for v in ranked:
            considered.add(v)
            if oracle(current | {v}):
                current = current | {v}
                trace.picks.append(Pick(t, v, gains[v], tuple(rejected)))
                trace.objective_values.append(f(current))
                t += 1
                break
            rejected.append(v)
    trace.final_set = tuple(sorted(current))
    if len(current) < size:
        err = InfeasibleAtSize(
            f"{direction} greedy exhausted the ground set with {len(current)} of {size} elements"
        )
        err.trace = trace
        raise err
    return trace


def forward_greedy(f: SetFunction, matroid_oracle: Callable[[frozenset], bool], K: int,
                   ground: Iterable[int] | None = None, jobs: int = 1) -> GreedyTrace:
    """Grow a set to size ``K``, always trying the largest marginal gain first.

    Ties go to the smallest index. Raises :class:`InfeasibleAtSize` if the
    ground set runs out first.
    """
    return _run("forward", f, matroid_oracle, K, ground, jobs)


def reverse_greedy(f: SetFunction, matroid_oracle: Callable[[frozenset], bool], N: int,
                   ground: Iterable[int] | None = None, jobs: int = 1) -> GreedyTrace:
    """Grow an exclusion set to size ``N``, always trying the smallest marginal gain first."""
    return _run("reverse", f, matroid_oracle, N, ground, jobs)


# -- placement --------------------------------------------------------------

@dataclass
class PlacementResult:
    method: str
    K: int
    T: float
    eps: float
    chosen: tuple
    f_eps: float
    f_exact: float | None
    trace: GreedyTrace | None = None
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self, net: DirectedNetwork | None = None) -> dict:
        labels = net.labels if net is not None else None
        out = {
            "method": self.method,
            "K": self.K,
            "T": self.T,
            "eps": self.eps,
            "chosen": [labels[i] for i in self.chosen] if labels else list(self.chosen),
            "chosen_indices": list(self.chosen),
            "f_eps": self.f_eps,
            "f_exact": self.f_exact,
            "wall_time": self.wall_time,
        }
        if self.trace is not None:
            out["trace"] = self.trace.to_dict(labels)
        out.update(self.extra)
        return out


def check_placement_k(net: DirectedNetwork, K: int) -> int:
    net.ensure_strongly_connected()
    n_act = len(net.actuatable_nodes)
    if isinstance(K, bool) or int(K) != K or K > n_act:
        raise CardinalityExceeded(f"K={K!r} must be an integer no larger than {n_act}")
    k_min = min_cardinality(net)
    if K < k_min:
        raise KBelowMinimum(f"K={K} is below the minimum {k_min} for structural controllability")
    return int(K)


def forward_objective(metric: EnergyMetric) -> SetFunction:
    """``-F_eps`` as an increasing set function of the actuator set."""
    return SetFunction(metric.net.n, lambda S: -metric.f_eps(S), name="-F_eps")


def reverse_objective(metric: EnergyMetric) -> SetFunction:
    """``R -> F_eps(Act \\ R)``, increasing in the exclusion set."""
    act = frozenset(metric.net.actuatable_nodes)
    return SetFunction(metric.net.n, lambda R: metric.f_eps(act - R), name="F_eps^r")


def solve_forward(net: DirectedNetwork, K: int, T: float, eps: float, jobs: int = 1,
                  metric: EnergyMetric | None = None) -> PlacementResult:
    """Forward greedy on ``-F_eps`` over the forward feasibility matroid."""
    start = time.perf_counter()
    K = check_placement_k(net, K)
    metric = metric or EnergyMetric(net, T, eps)
    f = forward_objective(metric)
    trace = forward_greedy(f, lambda S: forward_feasible(net, S, K), K,
                           ground=net.actuatable_nodes, jobs=jobs)
    chosen = trace.final_set
    return PlacementResult("forward", K, float(T), float(eps), chosen, metric.f_eps(chosen),
                           metric.f_exact_or_none(chosen), trace, time.perf_counter() - start)


def solve_reverse(net: DirectedNetwork, K: int, T: float, eps: float, jobs: int = 1,
                  metric: EnergyMetric | None = None) -> PlacementResult:
    """Reverse greedy: exclude ``#actuatable - K`` nodes by least marginal loss."""
    start = time.perf_counter()
    K = check_placement_k(net, K)
    metric = metric or EnergyMetric(net, T, eps)
    act = net.actuatable_nodes
    f = reverse_objective(metric)
    trace = reverse_greedy(f, lambda R: reverse_feasible(net, R, K), len(act) - K,
                           ground=act, jobs=jobs)
    chosen = tuple(v for v in act if v not in set(trace.final_set))
    return PlacementResult("reverse", K, float(T), float(eps), chosen, metric.f_eps(chosen),
                           metric.f_exact_or_none(chosen), trace, time.perf_counter() - start)
