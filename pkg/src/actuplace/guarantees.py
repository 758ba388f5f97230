"""Submodularity ratios, curvatures and the approximation bounds built on them.

Exact ratio and curvature come from a full table of ``f`` on a small ground
set. The greedy variants only check the inequalities that the greedy
analyses actually use, so they are cheaper and never worse than the exact
values. ``z_bar`` and ``z_u`` bound the reverse greedy; the forward greedy
bound is ``gamma^3 / (gamma^3 + 1)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, GroundSetTooLarge, NotIncreasing, OrderingViolated
from .greedy import GreedyTrace, SetFunction

MAX_EXACT_GROUND = 16
MAX_DUALITY_GROUND = 10
ENUMERATION_CAP = 200_000
#: gains below ``ZERO_GAIN_RTOL * |f(V)|`` count as zero
ZERO_GAIN_RTOL = 1e-12
HOLDS_RTOL = 1e-9

# (N, gamma, alpha) rows of the bound comparison table
TABLE1_ROWS = ((20, 0.9, 0.1), (100, 0.9, 0.1), (20, 0.99, 0.1))


class Estimate(float):
    """A float carrying whether it came from a sampled subset of inequalities."""

    approximate: bool = False

    def __new__(cls, value: float, approximate: bool = False):
        obj = super().__new__(cls, value)
        obj.approximate = bool(approximate)
        return obj


@dataclass
class GuaranteeReport:
    direction: str
    gamma: float
    alpha: float | None
    is_greedy_variant: bool
    bound_value: float
    lhs: float
    rhs: float
    holds: bool
    approximate: bool = False
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


# -- exact ratio and curvature ----------------------------------------------

def set_function_table(f: SetFunction, ground: Sequence[int] | None = None) -> np.ndarray:
    """Values of ``f`` on every subset of ``ground``, indexed by bitmask."""
    ground = list(range(f.ground_size)) if ground is None else list(ground)
    m = len(ground)
    table = np.empty(1 << m)
    for mask in range(1 << m):
        table[mask] = f(ground[i] for i in range(m) if mask >> i & 1)
    return table


def _zero_tol(table: np.ndarray) -> float:
    scale = abs(table[-1]) or float(np.abs(table).max())
    return ZERO_GAIN_RTOL * scale


def _submask_reduce(values: np.ndarray, m: int, op) -> np.ndarray:
    """``out[T] = op`` over all submasks ``S`` of ``T`` (sum-over-subsets sweep)."""
    out = values.copy()
    for i in range(m):
        view = out.reshape(-1, 2, 1 << i)
        view[:, 1, :] = op(view[:, 1, :], view[:, 0, :])
    return out


def ratio_and_curvature_from_table(table: np.ndarray) -> tuple[float, float]:
    """Exact ``(gamma, alpha)`` from a bitmask-indexed table of an increasing function."""
    size = table.shape[0]
    m = size.bit_length() - 1
    if 1 << m != size:
        raise DomainError("table length must be a power of two")
    tol = _zero_tol(table)
    masks = np.arange(size)
    gamma, worst = 1.0, 1.0
    for v in range(m):
        bit = 1 << v
        outside = (masks & bit) == 0
        gain = np.zeros(size)
        gain[outside] = table[masks[outside] | bit] - table[masks[outside]]
        if (gain < -tol).any():
            bad = int(masks[gain < -tol][0])
            raise NotIncreasing(f"negative marginal gain for element {v} at subset mask {bad:#x}")
        gain[np.abs(gain) <= tol] = 0.0
        lo = _submask_reduce(gain, m, np.minimum)
        hi = _submask_reduce(gain, m, np.maximum)
        live = outside & (gain > 0)
        if live.any():
            gamma = min(gamma, float((lo[live] / gain[live]).min()))
            worst = max(worst, float((hi[live] / gain[live]).max()))
        # zero gain at T but positive at some S inside T: unbounded ratio
        if (outside & (gain == 0) & (hi > 0)).any():
            worst = math.inf
    alpha = 1.0 - 1.0 / worst
    return float(min(max(gamma, 0.0), 1.0)), float(min(max(alpha, 0.0), 1.0))


def exact_ratio_and_curvature(f: SetFunction, ground: Sequence[int] | None = None) -> tuple[float, float]:
    """Submodularity ratio and curvature of ``f`` by full enumeration.

    Parameters
    ----------
    f : SetFunction
        Increasing set function.
    ground : sequence of int, optional
        Ground set; all of ``range(f.ground_size)`` by default. At most 16 elements.

    Returns
    -------
    gamma, alpha : float
        ``gamma = min rho_v(S) / rho_v(T)`` and ``alpha = 1 - min rho_v(T) / rho_v(S)``
        over ``S`` inside ``T`` and ``v`` outside ``T``.
    """
    ground = list(range(f.ground_size)) if ground is None else list(ground)
    if len(ground) > MAX_EXACT_GROUND:
        raise GroundSetTooLarge(f"exact enumeration needs at most {MAX_EXACT_GROUND} elements")
    return ratio_and_curvature_from_table(set_function_table(f, ground))


def forward_reverse_duality_check(f: SetFunction, ground: Sequence[int] | None = None,
                                  atol: float = 1e-9) -> bool:
    """Check ``gamma_rev = 1 - alpha_fwd`` and ``alpha_rev = 1 - gamma_fwd``.

    ``f`` is the decreasing cost (such as ``F_eps``) of a set. The forward
    objective is ``-f(S)`` and the reverse one is ``R -> f(ground \\ R)``.
    """
    ground = list(range(f.ground_size)) if ground is None else list(ground)
    if len(ground) > MAX_DUALITY_GROUND:
        raise GroundSetTooLarge(f"duality check needs at most {MAX_DUALITY_GROUND} elements")
    g_f, a_f = exact_ratio_and_curvature(f.negated(), ground)
    g_r, a_r = exact_ratio_and_curvature(f.complement(ground), ground)
    return abs(g_r - (1.0 - a_f)) <= atol and abs(a_r - (1.0 - g_f)) <= atol


# -- greedy variants ----------------------------------------------------------

def _k_subsets(ground, k, cap, rng):
    """All ``k``-subsets of ``ground``, or ``cap`` uniform samples when there are more."""
    total = math.comb(len(ground), k)
    if total <= cap:
        return (frozenset(c) for c in itertools.combinations(ground, k)), False
    arr = np.asarray(ground)
    return (frozenset(arr[rng.choice(len(arr), k, replace=False)].tolist()) for _ in range(cap)), True


class _RatioMin:
    """Running ``min(num / den)`` that ignores pairs of negligible gains."""

    def __init__(self, tol):
        self.tol = tol
        self.value = 1.0

    def add(self, num, den):
        if den > self.tol:
            self.value = min(self.value, max(num, 0.0) / den)


def greedy_gamma_forward(f: SetFunction, trace: GreedyTrace, K: int,
                         enumeration_cap: int = ENUMERATION_CAP, ground: Sequence[int] | None = None,
                         seed: int = 0) -> Estimate:
    """Greedy submodularity ratio of a forward greedy run, capped at 1.

    Checks three families: every ``K``-set ``S`` against the final set,
    every node against each prefix, and each pick's gain at an earlier
    prefix. Above ``enumeration_cap`` the ``K``-sets are sampled and the
    result is marked approximate; it can then only overestimate.
    """
    ground = list(range(f.ground_size)) if ground is None else sorted(ground)
    final = frozenset(trace.final_set)
    order = trace.order
    prefixes = [frozenset(order[:t]) for t in range(len(order) + 1)]
    tol = ZERO_GAIN_RTOL * max(abs(f(final)), abs(f(())))
    acc = _RatioMin(tol)
    base = f(final)

    sets, approx = _k_subsets(ground, K, enumeration_cap, np.random.default_rng(seed))
    for S in sets:
        extra = S - final
        if extra:
            acc.add(sum(f.gain(j, final) for j in extra), f(S | final) - base)

    for j in ground:
        if j in final:
            continue
        top = f.gain(j, final)
        for t in range(1, len(order) + 1):
            acc.add(f.gain(j, prefixes[t - 1]), top)

    for i2 in range(1, len(order)):
        v = order[i2]
        top = f.gain(v, prefixes[i2])
        for i1 in range(i2):
            acc.add(f.gain(v, prefixes[i1]), top)
    return Estimate(acc.value, approx)


def greedy_gamma_alpha_reverse(f: SetFunction, trace: GreedyTrace, N: int,
                               enumeration_cap: int = ENUMERATION_CAP,
                               ground: Sequence[int] | None = None,
                               seed: int = 0) -> tuple[Estimate, Estimate]:
    """Greedy submodularity ratio and greedy curvature of a reverse greedy run.

    The ratio compares each committed gain with the same node's gain on top
    of every ``N``-set. The curvature compares every node's gain at each
    greedy prefix with its gain after adding any set of at most ``N - 1``
    further elements.
    """
    ground = list(range(f.ground_size)) if ground is None else sorted(ground)
    order = trace.order
    prefixes = [frozenset(order[:t]) for t in range(len(order) + 1)]
    tol = ZERO_GAIN_RTOL * max(abs(f(ground)), abs(f(())))
    rng = np.random.default_rng(seed)

    acc = _RatioMin(tol)
    per_set = max(len(order), 1)
    sets, approx_g = _k_subsets(ground, N, max(enumeration_cap // per_set, 1), rng)
    for R in sets:
        for t, r in enumerate(order, start=1):
            if r not in R:
                acc.add(f.gain(r, prefixes[t - 1]), f.gain(r, R | prefixes[t - 1]))
    gamma = acc.value

    # smallest alpha with rho_r(R + R^t) >= (1 - alpha) rho_r(R^t)
    worst = 1.0
    approx_a = False
    budget = max(enumeration_cap // (len(prefixes) * max(len(ground), 1)), 1)
    sizes = range(0, max(N, 1))
    counts = [math.comb(len(ground), k) for k in sizes]
    for k, count in zip(sizes, counts):
        share = max(budget * count // max(sum(counts), 1), 1)
        sets, approx = _k_subsets(ground, k, share, rng)
        approx_a |= approx
        for R in sets:
            for P in prefixes:
                for r in ground:
                    if r in R or r in P:
                        continue
                    den = f.gain(r, P)
                    if den > tol:
                        worst = min(worst, max(f.gain(r, R | P), 0.0) / den)
    alpha = min(max(1.0 - worst, 0.0), 1.0)
    return Estimate(gamma, approx_g), Estimate(alpha, approx_a)


# -- bound functions ----------------------------------------------------------

def _check_bound_args(N, gamma, alpha):
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")
    if not 0.0 < gamma <= 1.0:
        raise DomainError(f"gamma must lie in (0, 1], got {gamma}")
    if not 0.0 <= alpha < 1.0:
        raise DomainError(f"alpha must lie in [0, 1), got {alpha}")
    return int(N)


def z_bar(N: int, gamma: float, alpha: float) -> float:
    """Tight recursion bound on the reverse greedy's cost ratio.

    ``(1/b) prod_{i=1}^N (1 + b / ((N - i + 1)(1 - alpha))) - 1/b`` with
    ``b = (1 - gamma) / gamma``; harmonic sum ``sum 1 / (i (1 - alpha))`` at ``gamma = 1``.
    """
    N = _check_bound_args(N, gamma, alpha)
    c = 1.0 - alpha
    if gamma == 1.0:
        return float(sum(1.0 / (i * c) for i in range(1, N + 1)))
    b = (1.0 - gamma) / gamma
    logs = sum(math.log1p(b / (k * c)) for k in range(1, N + 1))
    try:
        return float(math.expm1(logs) / b)
    except OverflowError:
        return math.inf


def z_u(N: int, gamma: float, alpha: float) -> float:
    """Closed-form upper bound ``(gamma / (1 - gamma)) ((2N + 1)^((1 - gamma) / (gamma (1 - alpha))) - 1)``.

    Equals ``ln(2N + 1) / (1 - alpha)`` at ``gamma = 1``.
    """
    N = _check_bound_args(N, gamma, alpha)
    if gamma == 1.0:
        return float(math.log(2 * N + 1) / (1.0 - alpha))
    p = (1.0 - gamma) / (gamma * (1.0 - alpha))
    try:
        return float(gamma / (1.0 - gamma) * math.expm1(p * math.log(2 * N + 1)))
    except OverflowError:
        return math.inf


def forward_bound(gamma: float) -> float:
    """Worst-case ``(f(S_greedy) - f(0)) / (f(S_opt) - f(0))`` for the forward greedy."""
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"gamma must lie in [0, 1], got {gamma}")
    g3 = gamma ** 3
    return g3 / (g3 + 1.0)


def table1(rows: Iterable[tuple] = TABLE1_ROWS) -> list[tuple]:
    """``(N, gamma, alpha, z_bar, z_u)`` for each row."""
    return [(N, g, a, z_bar(N, g, a), z_u(N, g, a)) for N, g, a in rows]


# -- ex-post guarantee checks -------------------------------------------------

def _slack(a, b):
    return HOLDS_RTOL * max(abs(a), abs(b), 1e-300)


def evaluate_forward_guarantee(f_empty: float, f_greedy: float, f_opt: float, gamma: float,
                               is_greedy_variant: bool = False) -> GuaranteeReport:
    """Check ``(f(S_greedy) - f(0)) / (f(S_opt) - f(0)) >= gamma^3 / (gamma^3 + 1)``.

    Inputs are values of the increasing objective being maximised. The
    equivalent cost form ``F(S_greedy) <= F(0)/(g+1) + g F(S_opt)/(g+1)``
    with ``g = gamma^3`` and ``F = -f`` is reported in ``extra``.
    """
    if not (f_empty <= f_greedy + _slack(f_empty, f_greedy)
            and f_greedy <= f_opt + _slack(f_greedy, f_opt)):
        raise OrderingViolated(
            f"expected f(empty) <= f(greedy) <= f(opt), got {f_empty}, {f_greedy}, {f_opt}"
        )
    bound = forward_bound(gamma)
    span = f_opt - f_empty
    ratio = 1.0 if span <= 0 else (f_greedy - f_empty) / span
    g3 = gamma ** 3
    cost_lhs = -f_greedy
    cost_rhs = (-f_empty) / (g3 + 1.0) + g3 * (-f_opt) / (g3 + 1.0)
    return GuaranteeReport(
        direction="forward",
        gamma=float(gamma),
        alpha=None,
        is_greedy_variant=is_greedy_variant,
        bound_value=bound,
        lhs=ratio,
        rhs=bound,
        holds=bool(ratio >= bound - _slack(ratio, bound)),
        approximate=bool(getattr(gamma, "approximate", False)),
        extra={
            "cost_lhs": cost_lhs,
            "cost_rhs": cost_rhs,
            "cost_holds": bool(cost_lhs <= cost_rhs + _slack(cost_lhs, cost_rhs)),
        },
    )


def evaluate_reverse_guarantee(f_empty: float, f_greedy_excl: float, f_opt_excl: float,
                               gamma: float, alpha: float, N: int,
                               is_greedy_variant: bool = False) -> GuaranteeReport:
    """Check ``(f(R_greedy) - f(0)) / (f(R_opt) - f(0)) <= z_u(N, gamma, alpha)``.

    ``f`` is the increasing exclusion cost being minimised, so ``f(0)`` is
    the cost with every candidate kept. The placement form
    ``F(S_greedy) <= Z F(S_opt) + (1 - Z) F(V)`` is reported in ``extra``.
    """
    if f_opt_excl < f_empty - _slack(f_opt_excl, f_empty):
        raise OrderingViolated(f"expected f(opt) >= f(empty), got {f_opt_excl} < {f_empty}")
    bound = z_u(N, gamma, alpha)
    span = f_opt_excl - f_empty
    if span > 0:
        ratio = (f_greedy_excl - f_empty) / span
    else:
        ratio = 1.0 if f_greedy_excl <= f_empty + _slack(f_greedy_excl, f_empty) else math.inf
    cost_rhs = bound * f_opt_excl + (1.0 - bound) * f_empty if math.isfinite(bound) else math.inf
    return GuaranteeReport(
        direction="reverse",
        gamma=float(gamma),
        alpha=float(alpha),
        is_greedy_variant=is_greedy_variant,
        bound_value=bound,
        lhs=ratio,
        rhs=bound,
        holds=bool(ratio <= bound + _slack(ratio, bound)),
        approximate=bool(getattr(gamma, "approximate", False) or getattr(alpha, "approximate", False)),
        extra={
            "cost_lhs": f_greedy_excl,
            "cost_rhs": cost_rhs,
            "cost_holds": bool(f_greedy_excl <= cost_rhs + _slack(f_greedy_excl, cost_rhs)),
        },
    )


# -- placement ----------------------------------------------------------------

def placement_guarantee(net, K: int, T: float, eps: float, method: str = "forward",
                        enumeration_cap: int = ENUMERATION_CAP, seed: int = 0,
                        exact: bool = False, jobs: int = 1) -> dict:
    """Run one greedy placement and check its guarantee against the enumerated optimum.

    Returns a dict with the greedy and optimal placements, the greedy-variant
    report and, with ``exact=True``, a second report using the exact ratio
    and curvature of the objective over the actuatable nodes.
    """
    from .gramian import EnergyMetric
    from .greedy import forward_objective, reverse_objective, solve_forward, solve_reverse
    from .oracle import brute_force_optimal

    metric = EnergyMetric(net, T, eps)
    act = list(net.actuatable_nodes)
    optimum = brute_force_optimal(net, K, T, eps, metric=metric)
    out = {"optimum": optimum}
    if method == "forward":
        greedy = solve_forward(net, K, T, eps, jobs=jobs, metric=metric)
        f = forward_objective(metric)
        fe, fg, fo = f(()), f(greedy.chosen), f(optimum.chosen)
        gamma = greedy_gamma_forward(f, greedy.trace, K, enumeration_cap, ground=act, seed=seed)
        reports = [evaluate_forward_guarantee(fe, fg, fo, gamma, is_greedy_variant=True)]
        # the K-set inequalities range over every K-subset, not only the feasible ones
        reports[0].extra["k_sets"] = "all"
        if exact:
            g, _ = exact_ratio_and_curvature(f, act)
            reports.append(evaluate_forward_guarantee(fe, fg, fo, g))
    elif method == "reverse":
        greedy = solve_reverse(net, K, T, eps, jobs=jobs, metric=metric)
        f = reverse_objective(metric)
        N = len(act) - K
        excl_opt = [v for v in act if v not in optimum.chosen]
        fe, fg, fo = f(()), f(greedy.trace.final_set), f(excl_opt)
        reports = []
        if N >= 1:
            g, a = greedy_gamma_alpha_reverse(f, greedy.trace, N, enumeration_cap, ground=act, seed=seed)
            reports.append(_reverse_or_unbounded(fe, fg, fo, g, a, N, True))
            if exact:
                g, a = exact_ratio_and_curvature(f, act)
                reports.append(_reverse_or_unbounded(fe, fg, fo, g, a, N, False))
    else:
        raise DomainError(f"method must be forward or reverse, got {method!r}")
    out["greedy"] = greedy
    out["reports"] = reports
    return out


def _reverse_or_unbounded(fe, fg, fo, gamma, alpha, N, variant):
    # the bound is infinite (vacuous) when gamma = 0 or alpha = 1
    if gamma <= 0.0 or alpha >= 1.0:
        return GuaranteeReport("reverse", float(gamma), float(alpha), variant, math.inf,
                               (fg - fe) / (fo - fe) if fo > fe else 1.0, math.inf, True,
                               bool(getattr(gamma, "approximate", False)))
    return evaluate_reverse_guarantee(fe, fg, fo, gamma, alpha, N, is_greedy_variant=variant)
