"""Finite-horizon controllability Gramian and the average-energy metrics.

``W_T(S) = int_0^T e^{A t} B(S) B(S)^T e^{A^T t} dt`` with ``B(S) = diag(1(S))``.
The Gramian is additive over disjoint actuator sets, so :class:`EnergyMetric`
computes one Gramian per node and sums them for every set it evaluates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.linalg as sla

from .errors import EpsNonpositive, HorizonNonpositive, NodeAlreadyInSet, SingularGramian
from .network import DirectedNetwork, actuator_set

#: relative threshold below which a Gramian eigenvalue counts as zero
SINGULAR_RTOL = 1e-14


@dataclass(frozen=True, eq=False)
class Gramian:
    matrix: np.ndarray
    horizon: float

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2)) if self.matrix.size else 0.0


def _check_horizon(T):
    if not T > 0:
        raise HorizonNonpositive(f"horizon T must be positive, got {T}")


def _check_eps(eps):
    if not eps > 0:
        raise EpsNonpositive(f"eps must be positive, got {eps}")


def van_loan_gramian(A: np.ndarray, BBt: np.ndarray, T: float) -> np.ndarray:
    """Gramian of ``(A, B)`` by Van Loan's block exponential plus doubling.

    On a short step ``h = T / 2^k`` with ``||A|| h <= 1``,
    ``expm(h [[-A, BB^T], [0, A^T]]) = [[F11, F12], [0, F22]]`` gives
    ``W_h = F22^T F12``. Then ``W_2t = W_t + e^{At} W_t e^{A^T t}`` k times.
    A single exponential over the whole horizon cancels catastrophically
    when ``A`` has fast modes.
    """
    n = A.shape[0]
    norm = float(np.abs(A).sum(axis=0).max()) * T if n else 0.0
    k = max(0, int(np.ceil(np.log2(norm)))) if norm > 1.0 else 0
    h = T / (1 << k)
    M = np.zeros((2 * n, 2 * n))
    M[:n, :n] = -A
    M[:n, n:] = BBt
    M[n:, n:] = A.T
    F = sla.expm(M * h)
    E = F[n:, n:].T  # e^{A h}
    W = E @ F[:n, n:]
    W = 0.5 * (W + W.T)
    for _ in range(k):
        W = W + E @ W @ E.T
        W = 0.5 * (W + W.T)
        E = E @ E
    return W


def gramian(net: DirectedNetwork, S: Iterable[int], T: float) -> Gramian:
    """Controllability Gramian ``W_T(S)``."""
    _check_horizon(T)
    S = actuator_set(S, net.n)
    n = net.n
    if not S:
        return Gramian(np.zeros((n, n)), float(T))
    BBt = np.zeros((n, n))
    BBt[S, S] = 1.0
    return Gramian(van_loan_gramian(net.weights, BBt, T), float(T))


def min_eigenvalue(W) -> float:
    """Smallest eigenvalue of a symmetric matrix (or :class:`Gramian`)."""
    M = W.matrix if isinstance(W, Gramian) else np.asarray(W, dtype=float)
    if M.shape[0] <= 500:
        return float(np.linalg.eigvalsh(M)[0])
    return float(sla.eigh(M, eigvals_only=True, subset_by_index=[0, 0])[0])


def trace_inverse_spd(M: np.ndarray) -> float:
    """``tr(M^-1)`` for symmetric positive definite ``M`` via Cholesky.

    Retries once with symmetrisation and a ``1e-14 * tr(M)`` diagonal jitter
    before giving up with :class:`SingularGramian`.
    """
    n = M.shape[0]
    try:
        L = sla.cholesky(M, lower=True)
    except sla.LinAlgError:
        Ms = 0.5 * (M + M.T)
        Ms = Ms + SINGULAR_RTOL * max(np.trace(Ms), np.finfo(float).tiny) * np.eye(n)
        try:
            L = sla.cholesky(Ms, lower=True)
        except sla.LinAlgError:
            raise SingularGramian("matrix is not numerically positive definite") from None
    Linv = sla.solve_triangular(L, np.eye(n), lower=True)
    return float(np.einsum("ij,ij->", Linv, Linv))


def _f_exact_from_matrix(W: np.ndarray) -> float:
    lam = np.linalg.eigvalsh(W)
    if lam[-1] <= 0 or lam[0] <= SINGULAR_RTOL * lam[-1]:
        raise SingularGramian(
            f"Gramian is numerically singular (lambda_min={lam[0]:.3g}, ||W||={lam[-1]:.3g})"
        )
    return trace_inverse_spd(W)


def metric_f_eps(net: DirectedNetwork, S: Iterable[int], T: float, eps: float) -> float:
    """``F_eps(S) = tr((W_T(S) + eps I)^-1)``."""
    _check_eps(eps)
    W = gramian(net, S, T).matrix
    return trace_inverse_spd(W + eps * np.eye(net.n))


def metric_f(net: DirectedNetwork, S: Iterable[int], T: float) -> float:
    """``F(S) = tr(W_T(S)^-1)``; raises :class:`SingularGramian` if uncontrollable."""
    return _f_exact_from_matrix(gramian(net, S, T).matrix)


def marginal_gain(net: DirectedNetwork, S: Iterable[int], v: int, T: float, eps: float) -> float:
    """``F_eps(S) - F_eps(S + v)``: the gain of ``v`` for the objective ``-F_eps``."""
    S = actuator_set(S, net.n)
    if v in S:
        raise NodeAlreadyInSet(f"node {v} is already in the set")
    return metric_f_eps(net, S, T, eps) - metric_f_eps(net, S + (v,), T, eps)


class EnergyMetric:
    """Cached evaluator of ``F_eps`` and ``F`` on one network.

    Per-node Gramians are computed lazily once; ``W_T(S)`` is their sum.
    Instances are safe to share between threads for reads (the cache is
    filled idempotently).
    """

    def __init__(self, net: DirectedNetwork, T: float, eps: float):
        _check_horizon(T)
        _check_eps(eps)
        self.net = net
        self.T = float(T)
        self.eps = float(eps)
        self._single = {}
        self._cache = {}

    def with_eps(self, eps: float) -> "EnergyMetric":
        """A metric for another ``eps`` sharing this one's per-node Gramians."""
        other = EnergyMetric(self.net, self.T, eps)
        other._single = self._single
        return other

    def node_gramian(self, v: int) -> np.ndarray:
        W = self._single.get(v)
        if W is None:
            n = self.net.n
            BBt = np.zeros((n, n))
            BBt[v, v] = 1.0
            W = van_loan_gramian(self.net.weights, BBt, self.T)
            self._single[v] = W
        return W

    def gramian(self, S: Iterable[int]) -> np.ndarray:
        W = np.zeros((self.net.n, self.net.n))
        for v in sorted(set(S)):
            W += self.node_gramian(v)
        return W

    def f_eps(self, S: Iterable[int]) -> float:
        key = frozenset(S)
        val = self._cache.get(key)
        if val is None:
            W = self.gramian(key)
            val = trace_inverse_spd(W + self.eps * np.eye(self.net.n))
            self._cache[key] = val
        return val

    def f_exact(self, S: Iterable[int]) -> float:
        return _f_exact_from_matrix(self.gramian(S))

    def f_exact_or_none(self, S: Iterable[int]) -> float | None:
        try:
            return self.f_exact(S)
        except SingularGramian:
            return None

    def min_eigenvalue(self, S: Iterable[int]) -> float:
        return min_eigenvalue(self.gramian(S))
