"""Choosing the regularisation ``eps`` so that ``F`` stays within ``1 + xi`` of ``F_eps``.

Starting from ``eps0``, solve the placement under ``eps``, read the smallest
Gramian eigenvalue ``lam`` of the chosen set and, while ``eps >= xi * lam``,
retry with ``eps = xi * lam / 2``. On exit ``F(S) < (1 + xi) F_eps(S)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonpositiveParameter, SingularGramianEncountered
from .gramian import SINGULAR_RTOL, EnergyMetric
from .greedy import PlacementResult, check_placement_k, solve_forward, solve_reverse
from .network import DirectedNetwork

SOLVERS = {"forward": solve_forward, "reverse": solve_reverse}


@dataclass(frozen=True)
class EpsilonStep:
    eps: float
    chosen: tuple
    lambda_min: float


@dataclass
class EpsilonRun:
    xi: float
    eps0: float
    iterations: list = field(default_factory=list)
    final_eps: float = float("nan")
    final_result: PlacementResult | None = None

    @property
    def f_exact(self) -> float:
        return self.final_result.f_exact

    @property
    def f_eps(self) -> float:
        return self.final_result.f_eps

    @property
    def guarantee_holds(self) -> bool:
        """``F(S) < (1 + xi) F_eps(S)`` for the returned pair."""
        return self.f_exact is not None and self.f_exact < (1.0 + self.xi) * self.f_eps

    def iteration_bound(self) -> int:
        """Upper bound on the number of solves given the smallest eigenvalue seen."""
        lam0 = min(step.lambda_min for step in self.iterations)
        return max(math.ceil(math.log2(self.eps0 / (self.xi * lam0))), 0) + 1

    def to_dict(self, net: DirectedNetwork | None = None) -> dict:
        name = (lambda i: net.labels[i]) if net is not None else (lambda i: i)
        return {
            "xi": self.xi,
            "eps0": self.eps0,
            "iterations": [
                {"eps": s.eps, "chosen": [name(i) for i in s.chosen], "lambda_min": s.lambda_min}
                for s in self.iterations
            ],
            "final_eps": self.final_eps,
            "f_exact": self.f_exact,
            "f_eps": self.f_eps,
            "guarantee_holds": self.guarantee_holds,
            "iteration_bound": self.iteration_bound(),
            "final_result": self.final_result.to_dict(net),
        }


def proper_epsilon(net: DirectedNetwork, K: int, T: float, xi: float = 2.0, eps0: float = 1e-3,
                   method: str = "forward", max_iter: int = 60, jobs: int = 1) -> EpsilonRun:
    """Shrink ``eps`` geometrically until it drops below ``xi`` times the smallest eigenvalue.

    Parameters
    ----------
    xi : float
        Allowed relative excess of ``F`` over ``F_eps``.
    eps0 : float
        First ``eps`` tried.
    method : {"forward", "reverse"}
        Greedy solver run at every ``eps``.
    max_iter : int
        Solves allowed before giving up with :class:`SingularGramianEncountered`.

    Raises
    ------
    SingularGramianEncountered
        A chosen set has a numerically singular Gramian, or the cap is hit.
    """
    for name, val in (("xi", xi), ("eps0", eps0)):
        if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
            raise NonpositiveParameter(f"{name} must be positive and finite, got {val!r}")
    if method not in SOLVERS:
        raise NonpositiveParameter(f"method must be forward or reverse, got {method!r}")
    check_placement_k(net, K)
    solve = SOLVERS[method]
    run = EpsilonRun(float(xi), float(eps0))
    base = EnergyMetric(net, T, eps0)
    eps = float(eps0)
    for _ in range(max_iter):
        metric = base.with_eps(eps)
        result = solve(net, K, T, eps, jobs=jobs, metric=metric)
        W = metric.gramian(result.chosen)
        lam = metric.min_eigenvalue(result.chosen)
        norm = float(np.linalg.norm(W, 2))
        if lam <= SINGULAR_RTOL * norm:
            raise SingularGramianEncountered(
                f"Gramian of the set chosen at eps={eps:.3g} is numerically singular "
                f"(lambda_min={lam:.3g})"
            )
        run.iterations.append(EpsilonStep(eps, result.chosen, lam))
        if eps < xi * lam:
            run.final_eps = eps
            run.final_result = result
            return run
        eps = 0.5 * xi * lam
    raise SingularGramianEncountered(f"eps did not settle within {max_iter} solves")
