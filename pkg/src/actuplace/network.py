"""Network models: the directed graph behind ``x' = A x + B(S) u``.

Convention: ``A[i, j] != 0`` encodes the edge ``v_j -> v_i`` (node ``j``
influences node ``i``). Indices are 0-based; ``labels`` carry the names used
in files and reports (``"1".."n"`` by default).
"""

from __future__ import annotations

import csv
import json
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ConnectivityUnreachable,
    DimensionMismatch,
    DisconnectedGrid,
    MalformedInput,
    NonpositiveDamping,
    NotActuatable,
    NotGraphical,
    NotStronglyConnected,
)

ActuatorSet = tuple  # sorted, duplicate-free tuple of node indices


@dataclass(frozen=True, eq=False)
class DirectedNetwork:
    """Weighted digraph with an actuatable-node mask.

    Parameters
    ----------
    weights : (n, n) array_like
        The state matrix ``A``.
    actuatable : (n,) array_like of bool, optional
        Nodes allowed to carry an actuator. Defaults to all nodes.
    labels : sequence of str, optional
        Display names. Defaults to ``"1".."n"``.
    require_strong : bool
        Raise :class:`NotStronglyConnected` if the sparsity pattern is not
        strongly connected. When False the result is still recorded in
        :attr:`is_strongly_connected` and solvers refuse the network.
    """

    weights: np.ndarray
    actuatable: np.ndarray = None
    labels: tuple = None
    require_strong: bool = field(default=True, repr=False)
    is_strongly_connected: bool = field(init=False)

    def __post_init__(self):
        A = np.array(self.weights, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
            raise DimensionMismatch(f"A must be a non-empty square matrix, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise MalformedInput("A contains non-finite entries")
        n = A.shape[0]
        if self.actuatable is None:
            act = np.ones(n, dtype=bool)
        else:
            act = np.array(self.actuatable, dtype=bool)
            if act.shape != (n,):
                raise DimensionMismatch(f"actuatable mask has length {act.size}, expected {n}")
        if self.labels is None:
            labels = tuple(str(i + 1) for i in range(n))
        else:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != n:
                raise DimensionMismatch(f"{len(labels)} labels for {n} nodes")
        A.setflags(write=False)
        act.setflags(write=False)
        object.__setattr__(self, "weights", A)
        object.__setattr__(self, "actuatable", act)
        object.__setattr__(self, "labels", labels)
        sc = _pattern_strongly_connected(A != 0)
        object.__setattr__(self, "is_strongly_connected", sc)
        if self.require_strong and not sc:
            raise NotStronglyConnected("sparsity pattern of A is not strongly connected")

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def pattern(self) -> np.ndarray:
        return self.weights != 0

    @property
    def edges(self) -> list[tuple[int, int]]:
        """Directed edges ``(j, i)`` meaning ``v_j -> v_i``, row-major in ``i``."""
        rows, cols = np.nonzero(self.weights)
        return [(int(j), int(i)) for i, j in zip(rows, cols)]

    @property
    def actuatable_nodes(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.actuatable))

    @property
    def fully_actuatable(self) -> bool:
        return bool(self.actuatable.all())

    def successors(self, j: int) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.weights[:, j])]

    def ensure_strongly_connected(self) -> None:
        if not self.is_strongly_connected:
            raise NotStronglyConnected("sparsity pattern of A is not strongly connected")

    def label_of(self, nodes: Iterable[int]) -> list[str]:
        return [self.labels[i] for i in nodes]

    def index_of(self, labels: Iterable[str]) -> tuple[int, ...]:
        lookup = {lab: i for i, lab in enumerate(self.labels)}
        try:
            return actuator_set((lookup[str(lab)] for lab in labels), self.n)
        except KeyError as exc:
            raise MalformedInput(f"unknown node label {exc.args[0]!r}") from None


def actuator_set(members: Iterable[int], n: int, net: DirectedNetwork | None = None) -> tuple[int, ...]:
    """Normalise ``members`` to a sorted duplicate-free tuple of indices in ``[0, n)``.

    If ``net`` is given, every member must also be actuatable.
    """
    out = sorted({int(v) for v in members})
    if out and (out[0] < 0 or out[-1] >= n):
        raise DimensionMismatch(f"actuator indices must lie in [0, {n})")
    if net is not None:
        bad = [v for v in out if not net.actuatable[v]]
        if bad:
            raise NotActuatable(f"nodes {net.label_of(bad)} cannot carry an actuator")
    return tuple(out)


def _pattern_strongly_connected(P: np.ndarray) -> bool:
    # P[i, j] means j -> i; every node must reach and be reached from node 0
    n = P.shape[0]
    if n == 1:
        return True

    def reach(adj):
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for v in np.flatnonzero(adj[u]):
                if not seen[v]:
                    seen[v] = True
                    queue.append(v)
        return bool(seen.all())

    return reach(P.T) and reach(P)


def strongly_connected(net: DirectedNetwork) -> bool:
    """True iff every node reaches every other node along edges of ``A``'s pattern."""
    return _pattern_strongly_connected(net.pattern)


# -- file formats -----------------------------------------------------------

def _require_int(value, what):
    if isinstance(value, bool) or not isinstance(value, int):
        raise MalformedInput(f"{what} must be an integer, got {value!r}")
    return value


def parse_network(text: str, require_strong: bool = True) -> DirectedNetwork:
    """Parse the network JSON format.

    ``{"n": int, "edges": [{"from": j, "to": i, "w": A_ij}], "actuatable": [bool]?,
    "labels": [str]?}`` with 0-based ``from``/``to`` indices.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise MalformedInput("network document must be a JSON object")
    for key in ("n", "edges"):
        if key not in doc:
            raise MalformedInput(f"missing required key {key!r}")
    n = _require_int(doc["n"], "n")
    if n < 1:
        raise MalformedInput("n must be >= 1")
    edges = doc["edges"]
    if not isinstance(edges, list):
        raise MalformedInput("edges must be a list")
    A = np.zeros((n, n))
    seen = set()
    for k, e in enumerate(edges):
        if not isinstance(e, dict) or set(e) != {"from", "to", "w"}:
            raise MalformedInput(f"edge #{k} must have exactly the keys from, to, w")
        j = _require_int(e["from"], f"edges[{k}].from")
        i = _require_int(e["to"], f"edges[{k}].to")
        w = e["w"]
        if isinstance(w, bool) or not isinstance(w, (int, float)):
            raise MalformedInput(f"edges[{k}].w must be a number")
        if not (0 <= i < n and 0 <= j < n):
            raise DimensionMismatch(f"edge #{k} ({j}->{i}) out of range for n={n}")
        if w == 0 or not math.isfinite(w):
            raise MalformedInput(f"edge #{k} has weight {w!r}; weights must be finite and nonzero")
        if (i, j) in seen:
            raise MalformedInput(f"duplicate edge {j}->{i}")
        seen.add((i, j))
        A[i, j] = float(w)
    act = doc.get("actuatable")
    if act is not None:
        if not isinstance(act, list) or not all(isinstance(a, bool) for a in act):
            raise MalformedInput("actuatable must be a list of booleans")
        if len(act) != n:
            raise DimensionMismatch(f"actuatable has length {len(act)}, expected {n}")
    labels = doc.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or not all(isinstance(s, str) for s in labels):
            raise MalformedInput("labels must be a list of strings")
        if len(labels) != n:
            raise DimensionMismatch(f"labels has length {len(labels)}, expected {n}")
        if len(set(labels)) != n:
            raise MalformedInput("labels must be unique")
    return DirectedNetwork(A, act, labels, require_strong=require_strong)


def network_to_dict(net: DirectedNetwork) -> dict:
    doc = {
        "n": net.n,
        "edges": [{"from": j, "to": i, "w": float(net.weights[i, j])} for j, i in net.edges],
    }
    if not net.fully_actuatable:
        doc["actuatable"] = [bool(a) for a in net.actuatable]
    doc["labels"] = list(net.labels)
    return doc


def dump_network(net: DirectedNetwork) -> str:
    return json.dumps(network_to_dict(net), indent=1)


def load_network(path, require_strong: bool = True) -> DirectedNetwork:
    return parse_network(Path(path).read_text(), require_strong)


# -- random graphs with a prescribed degree sequence ------------------------

def _havel_hakimi(degrees: Sequence[int]) -> list[tuple[int, int]]:
    residual = {v: d for v, d in enumerate(degrees)}
    edges = []
    while True:
        live = sorted((v for v in residual if residual[v] > 0), key=lambda v: (-residual[v], v))
        if not live:
            return edges
        v, rest = live[0], live[1:]
        d = residual[v]
        if d > len(rest):
            raise NotGraphical(f"degree sequence {list(degrees)} is not graphical")
        residual[v] = 0
        for u in rest[:d]:
            residual[u] -= 1
            edges.append((min(u, v), max(u, v)))


def _components(n, adj):
    comp = [-1] * n
    count = 0
    for s in range(n):
        if comp[s] >= 0:
            continue
        comp[s] = count
        stack = [s]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if comp[w] < 0:
                    comp[w] = count
                    stack.append(w)
        count += 1
    return comp, count


def _adjacency(n, edges):
    adj = [set() for _ in range(n)]
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    return adj


def _is_bridge(n, edges, e):
    a, b = e
    adj = _adjacency(n, [f for f in edges if f != e])
    seen = {a}
    stack = [a]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return b not in seen


def generate_by_degrees(degree_sequence: Sequence[int], seed: int = 0) -> DirectedNetwork:
    """Random connected simple undirected graph with the given degrees.

    Havel-Hakimi realisation, ``10 |E|`` random double-edge swaps, then
    swap-based connectivity repair. Edges become ``A_ij = A_ji = 1``.
    """
    degrees = [int(d) for d in degree_sequence]
    n = len(degrees)
    if n == 0 or any(d < 0 for d in degrees) or sum(degrees) % 2:
        raise NotGraphical(f"degree sequence {degrees} is not graphical")
    edges = _havel_hakimi(degrees)
    if n > 1 and (min(degrees) == 0 or len(edges) < n - 1):
        raise ConnectivityUnreachable("no connected simple graph realises this degree sequence")

    rng = np.random.default_rng(seed)
    edge_set = set(edges)
    m = len(edges)
    for _ in range(10 * m if m >= 2 else 0):
        p, q = rng.choice(m, size=2, replace=False)
        a, b = edges[p]
        c, d = edges[q]
        if rng.random() < 0.5:
            c, d = d, c
        # (a,b),(c,d) -> (a,d),(c,b)
        if len({a, b, c, d}) < 4:
            continue
        e1 = (min(a, d), max(a, d))
        e2 = (min(c, b), max(c, b))
        if e1 in edge_set or e2 in edge_set:
            continue
        edge_set -= {edges[p], edges[q]}
        edge_set |= {e1, e2}
        edges[p], edges[q] = e1, e2

    for _ in range(n):
        comp, count = _components(n, _adjacency(n, edges))
        if count == 1:
            break
        # a component containing a cycle has a non-bridge edge to break open
        sizes = np.bincount(comp, minlength=count)
        ecount = np.bincount([comp[a] for a, _ in edges], minlength=count)
        cyclic = [c for c in range(count) if ecount[c] >= sizes[c]]
        if not cyclic:
            raise ConnectivityUnreachable("connectivity repair found no cycle to open")
        c0 = cyclic[int(rng.integers(len(cyclic)))]
        inner = [k for k, (a, _) in enumerate(edges) if comp[a] == c0]
        candidates = [k for k in inner if not _is_bridge(n, edges, edges[k])]
        other = [k for k, (a, _) in enumerate(edges) if comp[a] != c0]
        p = candidates[int(rng.integers(len(candidates)))]
        q = other[int(rng.integers(len(other)))]
        a, b = edges[p]
        c, d = edges[q]
        edges[p] = (min(a, c), max(a, c))
        edges[q] = (min(b, d), max(b, d))
    else:
        raise ConnectivityUnreachable("connectivity repair did not converge")

    A = np.zeros((n, n))
    for a, b in edges:
        A[a, b] = A[b, a] = 1.0
    return DirectedNetwork(A)


def tent_degree_sequence(n: int = 23) -> list[int]:
    """Vertex ``i`` (1-based) has degree ``i`` below the midpoint, then mirrors down."""
    mid = (n + 1) // 2
    return [i if i < mid else n + 1 - i for i in range(1, n + 1)]


# -- linearised swing-equation grid model ----------------------------------

@dataclass(frozen=True)
class Bus:
    id: str
    inertia: float
    damping: float
    injectable: bool = True


@dataclass(frozen=True)
class Branch:
    from_bus: str
    to_bus: str
    susceptance: float


def build_swing_model(buses: Sequence[Bus], branches: Sequence[Branch]) -> DirectedNetwork:
    """State-space network of the linearised swing equations.

    ``M_i th_i'' + D_i th_i' = P_i - sum_j a_ij (th_i - th_j)``. Buses with
    ``M_i = 0`` contribute one state (``th_i``), inertial buses two
    (``th_i``, ``th_i'``). The power-injection state of each injectable bus is
    actuatable; the angle state of an inertial bus never is.
    """
    if not buses:
        raise MalformedInput("at least one bus is required")
    index = {}
    for k, bus in enumerate(buses):
        if bus.id in index:
            raise MalformedInput(f"duplicate bus id {bus.id!r}")
        if not bus.damping > 0:
            raise NonpositiveDamping(f"bus {bus.id!r} has damping {bus.damping}")
        if bus.inertia < 0 or not math.isfinite(bus.inertia):
            raise MalformedInput(f"bus {bus.id!r} has invalid inertia {bus.inertia}")
        index[bus.id] = k
    nb = len(buses)
    lap = np.zeros((nb, nb))
    for br in branches:
        if br.from_bus not in index or br.to_bus not in index:
            raise MalformedInput(f"branch {br.from_bus}-{br.to_bus} references an unknown bus")
        if not br.susceptance > 0:
            raise MalformedInput(f"branch {br.from_bus}-{br.to_bus} needs susceptance > 0")
        p, q = index[br.from_bus], index[br.to_bus]
        if p == q:
            raise MalformedInput(f"branch {br.from_bus}-{br.to_bus} is a self-loop")
        lap[p, q] -= br.susceptance
        lap[q, p] -= br.susceptance
        lap[p, p] += br.susceptance
        lap[q, q] += br.susceptance
    links = [(p, q) for p in range(nb) for q in range(p + 1, nb) if lap[p, q] < 0]
    _, count = _components(nb, _adjacency(nb, links))
    if count > 1:
        raise DisconnectedGrid("bus/branch graph is not connected")

    theta, omega, labels, act = [], [], [], []
    for bus in buses:
        theta.append(len(labels))
        labels.append(f"{bus.id}:theta")
        if bus.inertia > 0:
            act.append(False)
            omega.append(len(labels))
            labels.append(f"{bus.id}:omega")
            act.append(bool(bus.injectable))
        else:
            act.append(bool(bus.injectable))
            omega.append(None)
    ns = len(labels)
    A = np.zeros((ns, ns))
    for k, bus in enumerate(buses):
        if bus.inertia > 0:
            A[theta[k], omega[k]] = 1.0
            row, scale = omega[k], 1.0 / bus.inertia
            A[row, omega[k]] = -bus.damping / bus.inertia
        else:
            row, scale = theta[k], 1.0 / bus.damping
        for q in range(nb):
            if lap[k, q] != 0:
                A[row, theta[q]] = -lap[k, q] * scale
    return DirectedNetwork(A, act, labels, require_strong=False)


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "y"):
        return True
    if t in ("0", "false", "no", "n"):
        return False
    raise MalformedInput(f"cannot parse boolean {text!r}")


def read_swing_csv(buses_path, branches_path) -> DirectedNetwork:
    """Build a swing model from ``buses.csv`` (id,M,D,injectable) and ``branches.csv`` (from,to,b)."""
    buses, branches = [], []
    try:
        with open(buses_path, newline="") as fh:
            reader = csv.DictReader(fh)
            if not {"id", "M", "D"} <= set(reader.fieldnames or ()):
                raise MalformedInput("buses.csv needs columns id,M,D[,injectable]")
            for row in reader:
                inj = _parse_bool(row["injectable"]) if row.get("injectable") not in (None, "") else True
                buses.append(Bus(row["id"].strip(), float(row["M"]), float(row["D"]), inj))
        with open(branches_path, newline="") as fh:
            reader = csv.DictReader(fh)
            if not {"from", "to", "b"} <= set(reader.fieldnames or ()):
                raise MalformedInput("branches.csv needs columns from,to,b")
            for row in reader:
                branches.append(Branch(row["from"].strip(), row["to"].strip(), float(row["b"])))
    except (ValueError, KeyError) as exc:
        if isinstance(exc, MalformedInput):
            raise
        raise MalformedInput(f"bad swing-model CSV: {exc}") from None
    return build_swing_model(buses, branches)
