"""Independent reference engines used to cross-check the main solvers.

Nothing here shares code with the routes it checks. The quadrature Gramian
uses its own Taylor-series exponential. The controllability test works on
numeric weight draws rather than matchings. Optimal placements come from
plain enumeration.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import (
    DeltaOutOfRange,
    DimensionConstraintViolated,
    EnumerationTooLarge,
    Infeasible,
    NoFeasibleSample,
    NonpositiveParameter,
)
from .feasibility import forward_feasible
from .gramian import EnergyMetric, Gramian
from .greedy import PlacementResult, SetFunction
from .network import DirectedNetwork, actuator_set

MAX_ENUMERATION = 500_000


@dataclass(frozen=True)
class OracleConfig:
    seed: int = 0
    weight_draws: int = 7
    samples: int = 10_000
    quadrature_steps: int = 256

    def __post_init__(self):
        if self.weight_draws < 1:
            raise NonpositiveParameter("weight_draws must be at least 1")
        if self.samples < 1:
            raise NonpositiveParameter("samples must be at least 1")
        if self.quadrature_steps < 16:
            raise NonpositiveParameter("quadrature_steps must be at least 16")


# -- optimal and sampled placements -------------------------------------------

def _result(method, K, metric, chosen, start, **extra):
    return PlacementResult(method, K, metric.T, metric.eps, chosen, metric.f_eps(chosen),
                           metric.f_exact_or_none(chosen), None, time.perf_counter() - start,
                           extra=extra)


def brute_force_optimal(net: DirectedNetwork, K: int, T: float, eps: float,
                        metric: EnergyMetric | None = None) -> PlacementResult:
    """Feasible ``K``-set of least ``F_eps`` by exhaustive enumeration.

    Ties go to the lexicographically first set.
    """
    start = time.perf_counter()
    act = net.actuatable_nodes
    total = math.comb(len(act), K) if 0 <= K <= len(act) else 0
    if total > MAX_ENUMERATION:
        raise EnumerationTooLarge(f"C({len(act)}, {K}) = {total} subsets exceeds {MAX_ENUMERATION}")
    metric = metric or EnergyMetric(net, T, eps)
    best, best_val = None, math.inf
    feasible = 0
    for S in itertools.combinations(act, K):
        if not forward_feasible(net, S, K):
            continue
        feasible += 1
        val = metric.f_eps(S)
        if val < best_val:
            best, best_val = S, val
    if best is None:
        raise Infeasible(f"no structurally controllable set of size {K}")
    return _result("brute", K, metric, tuple(best), start, feasible_sets=feasible)


def random_baseline(net: DirectedNetwork, K: int, T: float, eps: float, samples: int = 10_000,
                    seed: int = 0, metric: EnergyMetric | None = None) -> PlacementResult:
    """Best feasible set among ``samples`` uniform ``K``-subsets of the actuatable nodes."""
    if samples < 1:
        raise NonpositiveParameter("samples must be at least 1")
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    act = np.asarray(net.actuatable_nodes)
    metric = metric or EnergyMetric(net, T, eps)
    seen = {}
    best, best_val = None, math.inf
    for _ in range(samples):
        S = tuple(sorted(act[rng.choice(len(act), K, replace=False)].tolist()))
        if S not in seen:
            seen[S] = forward_feasible(net, S, K)
        if not seen[S]:
            continue
        val = metric.f_eps(S)
        if val < best_val or (val == best_val and S < best):
            best, best_val = S, val
    if best is None:
        raise NoFeasibleSample(f"none of {samples} sampled {K}-sets is structurally controllable")
    return _result("random", K, metric, best, start, samples=samples, seed=seed,
                   distinct_sets=len(seen))


# -- numeric structural controllability ---------------------------------------

def _controllability_rank(A: np.ndarray, S: tuple) -> int:
    n = A.shape[0]
    block = np.zeros((n, len(S)))
    block[list(S), range(len(S))] = 1.0
    blocks = [block]
    for _ in range(n - 1):
        block = A @ block
        norms = np.linalg.norm(block, axis=0)
        block = block / np.where(norms > 0, norms, 1.0)
        blocks.append(block)
    sv = np.linalg.svd(np.hstack(blocks), compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int((sv > 1e-9 * sv[0]).sum())


def randomized_structurally_controllable(net: DirectedNetwork, S, draws: int = 7,
                                         seed: int = 0) -> bool:
    """Is ``(A, B(S))`` controllable for some random draw of the nonzero weights?

    Each nonzero entry becomes ``sign(a) * U[0.5, 1.5]``.
    """
    S = actuator_set(S, net.n)
    if not S:
        return net.n == 0
    rng = np.random.default_rng(seed)
    pattern = net.weights != 0
    signs = np.sign(net.weights)
    for _ in range(draws):
        A = np.where(pattern, signs * rng.uniform(0.5, 1.5, size=net.weights.shape), 0.0)
        if _controllability_rank(A, S) == net.n:
            return True
    return False


# -- quadrature Gramian -------------------------------------------------------

def taylor_expm(M: np.ndarray, terms: int = 20) -> np.ndarray:
    """Matrix exponential by scaling, truncated Taylor series and squaring."""
    M = np.asarray(M, dtype=float)
    norm = np.abs(M).sum(axis=1).max() if M.size else 0.0
    squarings = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0.5 else 0
    X = M / (1 << squarings)
    out = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for k in range(1, terms + 1):
        term = term @ X / k
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


def gramian_quadrature(net: DirectedNetwork, S, T: float, steps: int = 256) -> Gramian:
    """Composite Simpson rule for ``int_0^T e^{At} B B^T e^{A^T t} dt``."""
    if steps < 16:
        raise NonpositiveParameter("steps must be at least 16")
    steps += steps % 2
    S = actuator_set(S, net.n)
    n = net.n
    if not S:
        return Gramian(np.zeros((n, n)), float(T))
    h = T / steps
    step = taylor_expm(net.weights * h)
    B = np.zeros((n, len(S)))
    B[list(S), range(len(S))] = 1.0
    W = np.zeros((n, n))
    E = np.eye(n)
    for k in range(steps + 1):
        weight = 1.0 if k in (0, steps) else (4.0 if k % 2 else 2.0)
        EB = E @ B
        W += weight * (EB @ EB.T)
        E = step @ E
    W *= h / 3.0
    return Gramian(0.5 * (W + W.T), float(T))


# -- counterexample set functions ---------------------------------------------

def counterexample_gamma(delta: float) -> SetFunction:
    """Three-element increasing function on which both greedy directions do badly.

    Parameters
    ----------
    delta : float
        In ``(0, 1/4)``. Ratio ``delta / (2 - 4 delta)``, curvature 0.
    """
    if not 0.0 < delta < 0.25:
        raise DeltaOutOfRange(f"delta must lie in (0, 1/4), got {delta}")
    d = float(delta)
    values = {
        (): 0.0, (0,): d, (1,): 2 * d, (2,): 2 * d,
        (1, 2): 4 * d, (0, 1): 1.0, (0, 2): 1.0, (0, 1, 2): 2.0,
    }
    return SetFunction.from_table(3, values, name=f"counterexample_gamma({d})")


def counterexample_alpha(n: int, N: int, delta: float) -> SetFunction:
    """``f(S) = min(1 + |S & {0..N-1}|, |S|) + delta |S|`` on ``n`` elements.

    Submodular with curvature ``1 / (1 + delta)``; reverse greedy removes the
    first ``N`` elements instead of a cheaper pair.
    """
    if not (n > 2 * N and N >= 1):
        raise DimensionConstraintViolated(f"need n > 2N >= 2, got n={n}, N={N}")
    if not delta > 0:
        raise DeltaOutOfRange(f"delta must be positive, got {delta}")
    d = float(delta)

    def f(S):
        inside = sum(1 for v in S if v < N)
        return min(1 + inside, len(S)) + d * len(S)

    return SetFunction(n, f, name=f"counterexample_alpha({n},{N},{d})")
