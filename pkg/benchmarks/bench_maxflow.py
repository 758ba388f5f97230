"""Compare the compiled and pure-Python max-flow kernels.

Times the forward and reverse feasibility flow graphs of random
degree-sequence networks. Run with ``python3 benchmarks/bench_maxflow.py``.
"""

import argparse
import time

import numpy as np

from actuplace.feasibility import bipartite_flow_network, build_bipartite, reverse_flow_graph
from actuplace.flow import KERNELS, max_flow
from actuplace.network import generate_by_degrees, tent_degree_sequence


def timed(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        value = fn()
        best = min(best, time.perf_counter() - t0)
    return best, value


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="23,51,103,199")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    print(f"kernels available: {', '.join(sorted(KERNELS))}")
    print(f"{'n':>5} {'graph':>8} {'arcs':>7} " + " ".join(f"{k + ' [ms]':>14}" for k in sorted(KERNELS))
          + f" {'speedup':>8}")
    rng = np.random.default_rng(0)
    for n in map(int, args.sizes.split(",")):
        net = generate_by_degrees(tent_degree_sequence(n), seed=n)
        S = sorted(rng.choice(n, size=max(n // 3, 1), replace=False).tolist())
        graphs = {
            "forward": bipartite_flow_network(build_bipartite(net, S)),
            "reverse": reverse_flow_graph(net, S[: n // 6], max(n // 3, 1)),
        }
        for name, fn in graphs.items():
            times, values = {}, set()
            for kernel in sorted(KERNELS):
                t, v = timed(lambda: max_flow(fn, backend=kernel), args.repeat)
                times[kernel] = t
                values.add(v)
            assert len(values) == 1, "kernels disagree"
            speed = times["python"] / times["cython"] if "cython" in times else float("nan")
            cols = " ".join(f"{1e3 * times[k]:14.3f}" for k in sorted(KERNELS))
            print(f"{n:5d} {name:>8} {len(fn.arcs):7d} {cols} {speed:8.1f}x")


if __name__ == "__main__":
    main()
