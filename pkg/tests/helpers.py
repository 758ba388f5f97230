"""Shared builders and independent reference implementations for the tests.

The reference functions here are deliberately naive (direct enumeration,
scipy matching) so they share no logic with the package code they check.
"""

import itertools

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from actuplace.network import DirectedNetwork

#: one pass/fail line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = []

EXAMPLE1 = np.array([
    [0.0, -0.5, -0.8, -0.6],
    [1.0, 0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0, 0.0],
])


def example1():
    return DirectedNetwork(EXAMPLE1)


def random_pattern(n, rng, density=0.3, loops=0.2):
    """Strongly connected sparsity pattern: a random Hamiltonian cycle plus extras."""
    perm = rng.permutation(n)
    P = np.zeros((n, n), dtype=bool)
    for k in range(n):
        P[perm[(k + 1) % n], perm[k]] = True
    P |= rng.random((n, n)) < density
    np.fill_diagonal(P, rng.random(n) < loops)
    if n == 1:
        P[0, 0] = True
    return P


def weights_for(P, rng):
    signs = rng.choice([-1.0, 1.0], size=P.shape)
    return np.where(P, signs * rng.uniform(0.5, 1.5, size=P.shape), 0.0)


def random_network(n, rng, **kw):
    return DirectedNetwork(weights_for(random_pattern(n, rng, **kw), rng))


def reference_matching(net, S=()):
    """Maximum matching of the input-augmented bipartite graph via scipy."""
    n = net.n
    rows, cols = [], []
    for j, i in net.edges:  # v_j -> v_i links left j to right i
        rows.append(j)
        cols.append(i)
    for pos, k in enumerate(S):
        rows.append(n + pos)
        cols.append(k)
    M = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n + len(S), n))
    match = maximum_bipartite_matching(M, perm_type="column")
    return int((match >= 0).sum())


def transitive_closure_strong(P):
    n = P.shape[0]
    R = P.copy() | np.eye(n, dtype=bool)
    for k in range(n):
        R |= R[:, [k]] & R[[k], :]
    return bool(R.all())


def subsets(items, max_size=None):
    items = list(items)
    top = len(items) if max_size is None else max_size
    for k in range(top + 1):
        yield from itertools.combinations(items, k)


def brute_ratio_curvature(f, ground):
    """``(gamma, alpha)`` straight from the definitions over all S inside T, v outside T."""
    ground = list(ground)
    scale = abs(f(ground)) or 1.0
    tol = 1e-12 * scale
    gamma, worst = 1.0, 1.0
    for T in subsets(ground):
        rest = [v for v in ground if v not in T]
        for S in subsets(T):
            for v in rest:
                a = f(set(S) | {v}) - f(S)
                b = f(set(T) | {v}) - f(T)
                a = 0.0 if abs(a) <= tol else a
                b = 0.0 if abs(b) <= tol else b
                if b > 0:
                    gamma = min(gamma, a / b)
                    worst = max(worst, a / b)
                elif a > 0:
                    worst = float("inf")
    return gamma, 1.0 - 1.0 / worst
