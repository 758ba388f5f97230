"""Capacitated flow networks and the max-flow entry point.

The Edmonds-Karp kernel comes from the compiled ``_flow_core`` extension when
it is importable, otherwise from the pure-Python ``_flow_py``. Set
``ACTUPLACE_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from . import _flow_py
from .errors import MalformedInput

try:
    from . import _flow_core
except ImportError:  # extension not built
    _flow_core = None

KERNELS = {"python": _flow_py.edmonds_karp}
if _flow_core is not None:
    KERNELS["cython"] = _flow_core.edmonds_karp

if os.environ.get("ACTUPLACE_BACKEND", "").lower() == "python" or _flow_core is None:
    BACKEND = "python"
else:
    BACKEND = "cython"


@dataclass
class FlowNetwork:
    """Directed graph with integer capacities and distinguished source/sink.

    ``names`` optionally maps node ids to readable tags (``"s"``, ``"v3'"``...).
    """

    node_count: int
    arcs: list = field(default_factory=list)
    source: int = 0
    sink: int = 1
    names: list | None = None

    def add_arc(self, u: int, v: int, capacity: int = 1) -> None:
        self.arcs.append((u, v, capacity))

    def capacity(self, u: int, v: int) -> int:
        return sum(c for a, b, c in self.arcs if a == u and b == v)

    def validate(self) -> None:
        if not (0 <= self.source < self.node_count and 0 <= self.sink < self.node_count):
            raise MalformedInput("source/sink out of range")
        if self.source == self.sink:
            raise MalformedInput("source and sink must differ")
        for u, v, c in self.arcs:
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise MalformedInput(f"arc ({u},{v}) out of range")
            if isinstance(c, bool) or not isinstance(c, int) or c < 0:
                raise MalformedInput(f"arc ({u},{v}) needs a nonnegative integer capacity")
            if v == self.source:
                raise MalformedInput("arc into the source")
            if u == self.sink:
                raise MalformedInput("arc out of the sink")


def max_flow(fn: FlowNetwork, backend: str | None = None) -> int:
    """Maximum s-t flow value (Edmonds-Karp, BFS augmenting paths)."""
    fn.validate()
    kernel = KERNELS[backend or BACKEND]
    tails = [a[0] for a in fn.arcs]
    heads = [a[1] for a in fn.arcs]
    caps = [a[2] for a in fn.arcs]
    return int(kernel(fn.node_count, tails, heads, caps, fn.source, fn.sink))
