import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from actuplace.errors import DomainError, GroundSetTooLarge, NotIncreasing, OrderingViolated
from actuplace.feasibility import forward_feasible, min_cardinality, reverse_feasible
from actuplace.gramian import EnergyMetric
from actuplace.greedy import (
    SetFunction,
    forward_greedy,
    forward_objective,
    modular,
    reverse_greedy,
    reverse_objective,
)
from actuplace.guarantees import (
    evaluate_forward_guarantee,
    evaluate_reverse_guarantee,
    exact_ratio_and_curvature,
    forward_bound,
    forward_reverse_duality_check,
    greedy_gamma_alpha_reverse,
    greedy_gamma_forward,
    placement_guarantee,
    ratio_and_curvature_from_table,
    table1,
    z_bar,
    z_u,
)
from actuplace.oracle import counterexample_alpha, counterexample_gamma

from helpers import brute_ratio_curvature, example1, random_network


def free(limit):
    return lambda S: len(S) <= limit


# -- independent references for the greedy variants -------------------------

def _rho(f, j, S):
    S = frozenset(S)
    return f(S | {j}) - f(S)


def ref_gamma_forward(f, order, K, ground, tol=1e-12):
    """Largest gamma satisfying every forward greedy inequality, by plain enumeration."""
    final = set(order)
    pairs = []
    for S in itertools.combinations(ground, K):
        extra = set(S) - final
        if extra:
            pairs.append((sum(_rho(f, j, final) for j in extra), f(set(S) | final) - f(final)))
    for t in range(1, len(order) + 1):
        pairs += [(_rho(f, j, order[:t - 1]), _rho(f, j, final)) for j in ground if j not in final]
    for i2, v in enumerate(order):
        pairs += [(_rho(f, v, order[:i1]), _rho(f, v, order[:i2])) for i1 in range(i2)]
    return min([1.0] + [max(a, 0.0) / b for a, b in pairs if b > tol])


def ref_gamma_alpha_reverse(f, order, N, ground, tol=1e-12):
    gamma = 1.0
    for R in itertools.combinations(ground, N):
        for t, r in enumerate(order, start=1):
            if r not in R:
                b = _rho(f, r, set(R) | set(order[:t - 1]))
                if b > tol:
                    gamma = min(gamma, max(_rho(f, r, order[:t - 1]), 0.0) / b)
    worst = 1.0
    for k in range(N):
        for R in itertools.combinations(ground, k):
            for t in range(len(order) + 1):
                P = set(order[:t])
                for r in ground:
                    if r not in R and r not in P and _rho(f, r, P) > tol:
                        worst = min(worst, max(_rho(f, r, set(R) | P), 0.0) / _rho(f, r, P))
    return gamma, min(max(1.0 - worst, 0.0), 1.0)


def _random_increasing(rng, m):
    """Random increasing set function: a table with nonnegative random increments."""
    table = np.zeros(1 << m)
    for mask in range(1, 1 << m):
        bits = [i for i in range(m) if mask >> i & 1]
        table[mask] = max(table[mask & ~(1 << i)] for i in bits) + rng.uniform(0, 1)
    if rng.random() < 0.3:
        table = np.round(table, 1)  # produce exact ties and zero gains
        for mask in range(1, 1 << m):
            table[mask] = max([table[mask]] + [table[mask & ~(1 << i)] for i in range(m) if mask >> i & 1])
    return SetFunction(m, lambda S: float(table[sum(1 << i for i in S)]))


# -- exact ratio and curvature ------------------------------------------------

def test_modular_is_submodular_without_curvature():
    f = modular([1.0, 2.0, 3.5, 0.5])
    assert exact_ratio_and_curvature(f) == (1.0, 0.0)


def test_gamma_counterexample_closed_form():
    delta = 0.1
    f = counterexample_gamma(delta)
    gamma, alpha = exact_ratio_and_curvature(f)
    assert gamma == pytest.approx(delta / (2 - 4 * delta), abs=1e-12)
    assert gamma == pytest.approx(0.0625, abs=1e-12)
    assert alpha == 0.0


@pytest.mark.parametrize("delta", [0.05, 0.1, 0.2])
def test_alpha_counterexample_closed_form(delta):
    f = counterexample_alpha(5, 2, delta)
    gamma, alpha = exact_ratio_and_curvature(f)
    assert gamma == pytest.approx(1.0, abs=1e-12)
    assert alpha == pytest.approx(1 / (1 + delta), abs=1e-12)


@pytest.mark.parametrize("f", [counterexample_gamma(0.1), counterexample_alpha(5, 2, 0.1),
                               counterexample_alpha(7, 3, 0.3)])
def test_counterexamples_strictly_increasing(f):
    ground = range(f.ground_size)
    for m in range(f.ground_size):
        for S in itertools.combinations(ground, m):
            for v in ground:
                if v not in S:
                    assert f(set(S) | {v}) > f(S)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_exact_matches_definition(seed):
    rng = np.random.default_rng(seed)
    f = _random_increasing(rng, int(rng.integers(1, 6)))
    got = exact_ratio_and_curvature(f)
    ref = brute_ratio_curvature(f, range(f.ground_size))
    assert got[0] == pytest.approx(ref[0], abs=1e-12)
    assert got[1] == pytest.approx(min(max(ref[1], 0.0), 1.0), abs=1e-12)
    assert 0.0 <= got[0] <= 1.0 and 0.0 <= got[1] <= 1.0


def test_exact_errors():
    with pytest.raises(NotIncreasing):
        exact_ratio_and_curvature(SetFunction(2, lambda S: -float(len(S))))
    with pytest.raises(GroundSetTooLarge):
        exact_ratio_and_curvature(modular(np.ones(17)))
    with pytest.raises(DomainError):
        ratio_and_curvature_from_table(np.zeros(3))


def test_zero_gain_after_positive_gain_means_full_curvature():
    # f = min(|S|, 1): gains drop from 1 to zero, and only T = {} has a positive gain
    f = SetFunction(2, lambda S: float(min(len(S), 1)))
    assert exact_ratio_and_curvature(f) == (1.0, 1.0)


# -- duality -------------------------------------------------------------------

def test_duality_on_example():
    net = example1()
    cost = SetFunction(4, EnergyMetric(net, 2.0, 1e-3).f_eps)
    assert forward_reverse_duality_check(cost)


def test_duality_on_modular():
    assert forward_reverse_duality_check(modular([-1.0, -2.0, -3.0]))


@pytest.mark.parametrize("seed", range(20))
def test_duality_on_random_networks(seed):
    rng = np.random.default_rng(seed)
    net = random_network(int(rng.integers(1, 7)), rng)
    cost = SetFunction(net.n, EnergyMetric(net, 1.0, 10.0 ** rng.uniform(-4, -1)).f_eps)
    assert forward_reverse_duality_check(cost)


def test_duality_ground_limit():
    with pytest.raises(GroundSetTooLarge):
        forward_reverse_duality_check(modular(-np.ones(11)))


# -- greedy variants --------------------------------------------------------

def test_modular_greedy_variants():
    f = modular([5.0, 3.0, 1.0, 2.0])
    fwd = forward_greedy(f, free(2), 2)
    assert greedy_gamma_forward(f, fwd, 2) == 1.0
    rev = reverse_greedy(f, free(2), 2)
    assert greedy_gamma_alpha_reverse(f, rev, 2) == (1.0, 0.0)


def test_gamma_counterexample_forward_variant():
    f = counterexample_gamma(0.1)
    tr = forward_greedy(f, free(2), 2)
    got = greedy_gamma_forward(f, tr, 2)
    # frozen from ref_gamma_forward on this trace
    assert got == pytest.approx(0.125, abs=1e-12)
    assert got == pytest.approx(ref_gamma_forward(f, tr.order, 2, range(3)), abs=1e-12)
    assert 0.0625 <= got <= 1.0
    assert not got.approximate


def test_alpha_counterexample_reverse_variant():
    f = counterexample_alpha(5, 2, 0.1)
    tr = reverse_greedy(f, free(2), 2)
    gamma, alpha = greedy_gamma_alpha_reverse(f, tr, 2)
    # frozen from ref_gamma_alpha_reverse on this trace
    assert gamma == pytest.approx(1.0, abs=1e-12)
    assert alpha == pytest.approx(1 / 1.1, abs=1e-12)
    assert alpha <= 1 / 1.1 + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_variants_match_reference_and_bracket_exact(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 6))
    f = _random_increasing(rng, m)
    gamma, alpha = exact_ratio_and_curvature(f)
    k = int(rng.integers(1, m))
    fwd = forward_greedy(f, free(k), k)
    g_f = greedy_gamma_forward(f, fwd, k)
    assert g_f == pytest.approx(ref_gamma_forward(f, fwd.order, k, range(m)), abs=1e-12)
    assert g_f >= gamma - 1e-12
    rev = reverse_greedy(f, free(k), k)
    g_r, a_r = greedy_gamma_alpha_reverse(f, rev, k)
    ref = ref_gamma_alpha_reverse(f, rev.order, k, range(m))
    assert g_r == pytest.approx(ref[0], abs=1e-12)
    assert a_r == pytest.approx(ref[1], abs=1e-12)
    assert g_r >= gamma - 1e-12
    assert a_r <= alpha + 1e-12


@pytest.mark.parametrize("seed", range(8))
def test_variants_on_placement_objectives(seed):
    rng = np.random.default_rng(seed)
    net = random_network(int(rng.integers(3, 7)), rng)
    K = min_cardinality(net)
    metric = EnergyMetric(net, 1.0, 1e-3)
    f = forward_objective(metric)
    tr = forward_greedy(f, lambda S: forward_feasible(net, S, K), K)
    g = greedy_gamma_forward(f, tr, K)
    assert g == pytest.approx(ref_gamma_forward(f, tr.order, K, range(net.n)), abs=1e-12)
    assert g >= exact_ratio_and_curvature(f)[0] - 1e-12
    N = net.n - K
    if N:
        r = reverse_objective(metric)
        tr = reverse_greedy(r, lambda R: reverse_feasible(net, R, K), N)
        got = greedy_gamma_alpha_reverse(r, tr, N)
        ref = ref_gamma_alpha_reverse(r, tr.order, N, range(net.n))
        assert got == pytest.approx(ref, abs=1e-12)


def test_sampled_variant_is_flagged():
    rng = np.random.default_rng(0)
    f = modular(rng.uniform(1, 2, 12))
    tr = forward_greedy(f, free(6), 6)
    g = greedy_gamma_forward(f, tr, 6, enumeration_cap=50, seed=3)
    assert g.approximate and g == pytest.approx(1.0, abs=1e-12)
    assert greedy_gamma_forward(f, tr, 6, enumeration_cap=50, seed=3) == g
    rev = reverse_greedy(f, free(6), 6)
    g_r, a_r = greedy_gamma_alpha_reverse(f, rev, 6, enumeration_cap=100)
    assert g_r.approximate and a_r.approximate


# -- bounds -------------------------------------------------------------------

def test_table_rows():
    rows = table1()
    assert [r[:3] for r in rows] == [(20, 0.9, 0.1), (100, 0.9, 0.1), (20, 0.99, 0.1)]
    # tight recursion bound rounds to the reference table values
    assert [round(r[3], 2) for r in rows] == [4.87, 7.88, 4.07]
    assert [r[4] for r in rows] == pytest.approx([5.23481, 8.32159, 4.21339], abs=1e-5)


def test_submodular_bounds_are_harmonic_and_log():
    assert z_bar(3, 1.0, 0.0) == pytest.approx(1 + 1 / 2 + 1 / 3)
    assert z_u(3, 1.0, 0.5) == pytest.approx(2 * math.log(7))
    assert z_bar(1, 1.0, 0.0) == 1.0


def test_alpha_counterexample_ratio_within_log_bound():
    delta, N = 0.1, 2
    ratio = (N + delta * N) / (1 + delta * N)
    assert ratio == pytest.approx(1.8333333333333333)
    assert ratio <= z_u(N, 1.0, 1 / (1 + delta))
    assert z_u(N, 1.0, 1 / (1 + delta)) == pytest.approx(math.log(5) * 11)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 200), st.floats(0.05, 1.0), st.floats(0.0, 0.95))
def test_bound_ordering(N, gamma, alpha):
    zb, zu = z_bar(N, gamma, alpha), z_u(N, gamma, alpha)
    assert 1.0 <= zb <= zu * (1 + 1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 100), st.floats(0.1, 0.99), st.floats(0.0, 0.9), st.floats(1e-3, 0.05))
def test_bounds_monotone(N, gamma, alpha, step):
    for z in (z_bar, z_u):
        base = z(N, gamma, alpha)
        assert z(N + 1, gamma, alpha) >= base
        assert z(N, min(gamma + step, 1.0), alpha) <= base * (1 + 1e-12)
        assert z(N, gamma, min(alpha + step, 0.95)) >= base * (1 - 1e-12)


@pytest.mark.parametrize("N, alpha", [(1, 0.0), (20, 0.1), (100, 0.5)])
def test_bounds_continuous_at_gamma_one(N, alpha):
    for z in (z_bar, z_u):
        assert z(N, 1 - 1e-9, alpha) == pytest.approx(z(N, 1.0, alpha), rel=1e-6)


def test_bounds_overflow_to_infinity():
    assert z_u(100, 1e-3, 0.5) == math.inf
    assert z_bar(5000, 1e-3, 0.9) == math.inf


@pytest.mark.parametrize("args", [(0, 0.5, 0.1), (2.5, 0.5, 0.1), (True, 0.5, 0.1), (3, 0.0, 0.1),
                                  (3, 1.1, 0.1), (3, 0.5, 1.0), (3, 0.5, -0.1)])
def test_bound_domain_errors(args):
    for z in (z_bar, z_u):
        with pytest.raises(DomainError):
            z(*args)


def test_forward_bound():
    assert forward_bound(1.0) == 0.5
    assert forward_bound(0.0) == 0.0
    assert forward_bound(0.0625) == pytest.approx(0.0625 ** 3 / (0.0625 ** 3 + 1))
    with pytest.raises(DomainError):
        forward_bound(1.5)


# -- guarantee checks -------------------------------------------------------------

def test_forward_guarantee_boundary():
    rep = evaluate_forward_guarantee(0.0, 1.0, 2.0, 1.0)
    assert rep.holds and rep.lhs == 0.5 and rep.bound_value == 0.5
    assert rep.extra["cost_holds"]
    assert rep.alpha is None


def test_forward_guarantee_on_gamma_counterexample():
    # maximisation form: greedy and best pair both reach f = 1
    f = counterexample_gamma(0.1)
    best = max(f(S) for S in itertools.combinations(range(3), 2))
    rep = evaluate_forward_guarantee(f(()), f((0, 1)), best, 0.0625)
    assert rep.bound_value == pytest.approx(2.44e-4, rel=1e-3)
    assert rep.holds and rep.lhs == 1.0


def test_forward_guarantee_ordering():
    with pytest.raises(OrderingViolated):
        evaluate_forward_guarantee(0.0, 3.0, 2.0, 1.0)
    with pytest.raises(OrderingViolated):
        evaluate_forward_guarantee(1.0, 0.0, 2.0, 1.0)


def test_reverse_guarantee():
    rep = evaluate_reverse_guarantee(0.0, 1.0, 1.0, 1.0, 0.0, 3)
    assert rep.holds and rep.lhs == 1.0
    f = counterexample_alpha(5, 2, 0.1)
    rep = evaluate_reverse_guarantee(0.0, f((0, 1)), f((2, 3)), 1.0, 1 / 1.1, 2)
    assert rep.lhs == pytest.approx(2.2 / 1.2) and rep.holds
    with pytest.raises(OrderingViolated):
        evaluate_reverse_guarantee(1.0, 2.0, 0.5, 1.0, 0.0, 1)
    with pytest.raises(DomainError):
        evaluate_reverse_guarantee(0.0, 1.0, 1.0, 0.0, 0.0, 1)


@pytest.mark.parametrize("method", ["forward", "reverse"])
def test_placement_guarantee_example(method):
    out = placement_guarantee(example1(), 2, 2.0, 1e-3, method=method, exact=True)
    assert len(out["reports"]) == 2
    assert all(r.holds for r in out["reports"])
    assert out["reports"][0].is_greedy_variant and not out["reports"][1].is_greedy_variant
    assert out["optimum"].f_eps <= out["greedy"].f_eps * (1 + 1e-12)


def test_placement_guarantee_bad_method():
    with pytest.raises(DomainError):
        placement_guarantee(example1(), 2, 2.0, 1e-3, method="sideways")
