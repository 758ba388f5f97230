"""Command-line interface.

Every subcommand prints a JSON report on stdout (``table1`` prints CSV) and
a one-line summary on stderr. Exit status: 0 success, 1 infeasible problem
or failed check, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .epsilon import proper_epsilon
from .errors import ActuplaceError, InfeasibleError, InputError, SingularGramian, UnknownCommand
from .feasibility import (
    forward_feasible,
    max_matching_cardinality,
    min_cardinality,
    reverse_feasible,
)
from .gramian import EnergyMetric, gramian
from .greedy import solve_forward, solve_reverse
from .guarantees import placement_guarantee, table1
from .network import (
    generate_by_degrees,
    load_network,
    network_to_dict,
    tent_degree_sequence,
    read_swing_csv,
)
from .oracle import (
    brute_force_optimal,
    gramian_quadrature,
    random_baseline,
    randomized_structurally_controllable,
)

VERIFY_SUBSET_CAP = 20_000


class CheckFailed(ActuplaceError):
    """A verification run found disagreements."""


def _jobs(value):
    if value is not None:
        return value
    env = os.environ.get("ACTUPLACE_JOBS")
    if env:
        try:
            return max(int(env), 1)
        except ValueError:
            raise InputError(f"ACTUPLACE_JOBS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _digest(paths) -> str:
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
    return h.hexdigest()


def _clean(obj):
    """JSON-safe copy: tuples to lists, numpy scalars to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def _parse_set(net, text):
    if text is None or text.strip() == "":
        return ()
    return net.index_of(s.strip() for s in text.split(","))


# -- subcommands ---------------------------------------------------------------

def cmd_gen(args):
    seq = [int(s) for s in args.degrees.split(",")] if args.degrees else tent_degree_sequence(args.n)
    net = generate_by_degrees(seq, seed=args.seed)
    return {"network": network_to_dict(net), "degrees": seq,
            "degree_sum": int(sum(seq))}, f"generated {net.n}-node graph"


def cmd_swing(args):
    net = read_swing_csv(args.buses, args.branches)
    doc = network_to_dict(net)
    return {"network": doc, "strongly_connected": net.is_strongly_connected}, \
        f"swing model with {net.n} states, {len(net.actuatable_nodes)} actuatable"


def cmd_min_k(args, net):
    k = min_cardinality(net)
    return {"k_min": k, "max_matching": max_matching_cardinality(net)}, f"K_min = {k}"


def cmd_check_forward(args, net):
    S = _parse_set(net, args.set)
    ok = forward_feasible(net, S, args.k)
    return {"set": net.label_of(S), "K": args.k, "feasible": ok}, f"forward feasible: {ok}"


def cmd_check_reverse(args, net):
    R = _parse_set(net, args.set)
    ok = reverse_feasible(net, R, args.k)
    return {"exclusions": net.label_of(R), "K": args.k, "feasible": ok}, f"reverse feasible: {ok}"


def cmd_solve(args, net):
    if args.method == "forward":
        res = solve_forward(net, args.k, args.t, args.eps, jobs=args.jobs)
    elif args.method == "reverse":
        res = solve_reverse(net, args.k, args.t, args.eps, jobs=args.jobs)
    elif args.method == "brute":
        res = brute_force_optimal(net, args.k, args.t, args.eps)
    else:
        res = random_baseline(net, args.k, args.t, args.eps, samples=args.samples, seed=args.seed)
    chosen = net.label_of(res.chosen)
    return {"result": res.to_dict(net)}, f"{args.method}: chosen {chosen}, F_eps = {res.f_eps:.6g}"


def cmd_epsilon(args, net):
    run = proper_epsilon(net, args.k, args.t, xi=args.xi, eps0=args.eps0, method=args.method,
                         jobs=args.jobs)
    return {"epsilon_run": run.to_dict(net)}, \
        f"eps = {run.final_eps:.4g} after {len(run.iterations)} solve(s); guarantee holds: {run.guarantee_holds}"


def cmd_guarantee(args, net):
    method = args.method
    out = placement_guarantee(net, args.k, args.t, args.eps, method=method, seed=args.seed,
                              exact=args.exact, jobs=args.jobs)
    reports = [r.to_dict() for r in out["reports"]]
    holds = all(r["holds"] for r in reports)
    return {
        "greedy": out["greedy"].to_dict(net),
        "optimum": out["optimum"].to_dict(net),
        "reports": reports,
    }, f"{method} guarantee holds: {holds}"


def node_degrees(net) -> np.ndarray:
    """Number of distinct neighbours of each node, ignoring self-loops."""
    P = (net.weights != 0) | (net.weights.T != 0)
    np.fill_diagonal(P, False)
    return P.sum(axis=0)


def cmd_compare(args, net):
    """Both greedy solvers under the selected eps against the best of random feasible sets."""
    runs = {m: proper_epsilon(net, args.k, args.t, xi=args.xi, eps0=args.eps0, method=m,
                              jobs=args.jobs) for m in ("forward", "reverse")}
    eps = min(r.final_eps for r in runs.values())
    metric = EnergyMetric(net, args.t, eps)
    base = random_baseline(net, args.k, args.t, eps, samples=args.samples, seed=args.seed,
                           metric=metric)
    deg = node_degrees(net)
    rows = []
    for name, chosen in (("forward", runs["forward"].final_result.chosen),
                         ("reverse", runs["reverse"].final_result.chosen),
                         ("random", base.chosen)):
        rows.append({
            "method": name,
            "chosen": net.label_of(chosen),
            "degree_sum": int(deg[list(chosen)].sum()),
            "f_eps": metric.f_eps(chosen),
            "f_exact": metric.f_exact_or_none(chosen),
        })
    best = min(rows, key=lambda r: r["f_eps"])["method"]
    return {
        "eps": eps,
        "placements": rows,
        "baseline": {"samples": args.samples, "distinct_sets": base.extra["distinct_sets"]},
        "epsilon_runs": {m: r.to_dict(net) for m, r in runs.items()},
    }, f"compare at eps = {eps:.4g}: lowest F_eps from {best}"


def cmd_table1(args):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["N", "gamma", "alpha", "z_bar", "z_u"])
    for N, g, a, zb, zu in table1():
        writer.writerow([N, f"{g:.6g}", f"{a:.6g}", f"{zb:.6g}", f"{zu:.6g}"])
    return buf.getvalue(), "bound comparison table"


def cmd_verify(args, net):
    """Cross-check the matching oracle and the Gramian against the independent routes."""
    act = net.actuatable_nodes
    disagreements, checked = [], 0
    k_min = min_cardinality(net)
    for K in range(k_min, len(act) + 1):
        for S in itertools.combinations(act, K):
            if checked >= VERIFY_SUBSET_CAP:
                break
            checked += 1
            a = forward_feasible(net, S, K)
            b = randomized_structurally_controllable(net, S, draws=args.draws, seed=args.seed)
            if a != b:
                disagreements.append({"set": net.label_of(S), "matching": a, "numeric": b})
    rng = np.random.default_rng(args.seed)
    gram_err = 0.0
    for _ in range(5):
        size = int(rng.integers(1, len(act) + 1))
        S = tuple(sorted(rng.choice(act, size, replace=False).tolist()))
        W = gramian(net, S, args.t).matrix
        Q = gramian_quadrature(net, S, args.t, steps=512).matrix
        gram_err = max(gram_err, float(np.linalg.norm(W - Q) / max(np.linalg.norm(W), 1e-300)))
    report = {
        "k_min": k_min,
        "sets_checked": checked,
        "disagreements": disagreements,
        "gramian_max_relative_error": gram_err,
    }
    if disagreements:
        err = CheckFailed(f"{len(disagreements)} feasibility disagreements")
        err.report = report
        raise err
    return report, f"verify: {checked} sets agree; Gramian rel. error {gram_err:.2e}"


NET_COMMANDS = {
    "min-k": cmd_min_k,
    "check-forward": cmd_check_forward,
    "check-reverse": cmd_check_reverse,
    "solve": cmd_solve,
    "epsilon": cmd_epsilon,
    "guarantee": cmd_guarantee,
    "compare": cmd_compare,
    "verify": cmd_verify,
}
PLAIN_COMMANDS = {"gen": cmd_gen, "swing": cmd_swing, "table1": cmd_table1}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UnknownCommand(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="also write the report to this file")
    netargs = argparse.ArgumentParser(add_help=False)
    netargs.add_argument("--net", type=Path, required=True, help="network JSON file")
    k_arg = argparse.ArgumentParser(add_help=False)
    k_arg.add_argument("--k", type=int, required=True, help="number of actuators")
    metric = argparse.ArgumentParser(add_help=False)
    metric.add_argument("--t", type=float, default=1.0, help="time horizon (default 1)")
    metric.add_argument("--eps", type=float, default=1e-6, help="regularisation (default 1e-6)")
    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--jobs", type=int, default=None,
                     help="worker threads (default: ACTUPLACE_JOBS or all cores)")

    parser = _Parser(prog="actuplace", description="Greedy actuator placement under "
                     "structural controllability constraints.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", parents=[common, run], help="random graph with a degree sequence")
    p.add_argument("--degrees", help="comma-separated degrees (default: the 23-node profile)")
    p.add_argument("--n", type=int, default=23, help="size of the default profile")

    p = sub.add_parser("swing", parents=[common], help="swing-equation model from CSV files")
    p.add_argument("--buses", type=Path, required=True)
    p.add_argument("--branches", type=Path, required=True)

    sub.add_parser("min-k", parents=[common, netargs], help="minimum number of actuators")
    for name, what in (("check-forward", "actuator set"), ("check-reverse", "exclusion set")):
        p = sub.add_parser(name, parents=[common, netargs, k_arg], help=f"matroid test of an {what}")
        p.add_argument("--set", default="", help=f"comma-separated node labels of the {what}")

    p = sub.add_parser("solve", parents=[common, netargs, k_arg, metric, run], help="place actuators")
    p.add_argument("--method", choices=["forward", "reverse", "brute", "random"], default="forward")
    p.add_argument("--samples", type=int, default=10_000, help="draws for --method random")

    p = sub.add_parser("epsilon", parents=[common, netargs, k_arg, run], help="select eps iteratively")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--method", choices=["forward", "reverse"], default="forward")
    p.add_argument("--xi", type=float, default=2.0)
    p.add_argument("--eps0", type=float, default=1e-3)

    p = sub.add_parser("guarantee", parents=[common, netargs, k_arg, metric, run],
                       help="check the greedy guarantee against the optimum")
    p.add_argument("--method", choices=["forward", "reverse"], default="forward")
    p.add_argument("--exact", action="store_true", help="also use the exact ratio and curvature")

    p = sub.add_parser("compare", parents=[common, netargs, k_arg, run],
                       help="greedy solvers against a random baseline")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--xi", type=float, default=2.0)
    p.add_argument("--eps0", type=float, default=1e-3)
    p.add_argument("--samples", type=int, default=10_000, help="random feasible sets drawn")

    sub.add_parser("table1", parents=[common], help="bound comparison table as CSV")

    p = sub.add_parser("verify", parents=[common, netargs, run], help="cross-check against oracles")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--draws", type=int, default=7)
    return parser


def _emit(text: str, out: Path | None):
    sys.stdout.write(text)
    if not text.endswith("\n"):
        sys.stdout.write("\n")
    if out is not None:
        out.write_text(text if text.endswith("\n") else text + "\n")


def dispatch(argv=None) -> int:
    """Run one subcommand; returns the exit status."""
    argv = list(sys.argv[1:] if argv is None else argv)
    start = time.perf_counter()
    args = None
    try:
        args = build_parser().parse_args(argv)
        if hasattr(args, "jobs"):
            args.jobs = _jobs(args.jobs)
        inputs = []
        if args.command in NET_COMMANDS:
            inputs = [args.net]
            net = load_network(args.net)
            payload, summary = NET_COMMANDS[args.command](args, net)
        else:
            if args.command == "swing":
                inputs = [args.buses, args.branches]
            payload, summary = PLAIN_COMMANDS[args.command](args)
        if args.command == "table1":
            _emit(payload, args.out)
        else:
            report = {
                "command": {"argv": argv, "name": args.command},
                "input_digest": _digest(inputs) if inputs else None,
                **payload,
                "wall_time": time.perf_counter() - start,
            }
            _emit(json.dumps(_clean(report), indent=2), args.out)
        print(summary, file=sys.stderr)
        return 0
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CheckFailed as exc:
        report = {"command": {"argv": argv}, **exc.report}
        _emit(json.dumps(_clean(report), indent=2), getattr(args, "out", None))
        print(f"check failed: {exc}", file=sys.stderr)
        return 1
    except (InfeasibleError, SingularGramian) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 1
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch())
