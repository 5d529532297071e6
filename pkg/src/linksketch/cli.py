"""Command-line interface.

One subcommand per workflow stage: generate instances, inspect conflict
graphs, color, schedule, check feasibility, run the reductions, and drive
the calibration / tightness / lower-bound experiments.  Global options
--seed, --out and --format live on every subcommand.

Exit codes: 0 success, 2 usage error, 3 failed precondition, 4 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from typing import Any, Sequence

import numpy as np

from .conflict import F_ONE, SublinearF, build_graph
from .errors import InternalError, PreconditionError, UsageError
from .generators import GenSpec
from .graphalg import greedy_color
from .harness import calibrate_gamma, run_lowerbound_experiment, run_tightness_experiment
from .model import Instance
from .scheduling import (
    mcma_expand,
    mwisl_solve,
    online_schedule,
    rate_control_replicas,
    tdma_schedule,
)
from .sinr import (
    PowerAssignment,
    default_tau,
    is_bidirectionally_p_feasible,
    is_p_feasible,
    is_tau_feasible,
    kesselheim_I,
    kesselheim_threshold,
    oblivious_power,
    spectral_feasibility_oracle,
    t_strong_partition,
    uniform_power,
)

CHECK_METHODS = ("spectral", "tau", "bidirectional-tau", "kesselheim", "uniform-power")


# ----------------------------------------------------------------------
# small parsers


def parse_f(text: str) -> SublinearF:
    """Parse an f spec: 'one', 'power:G:D', 'polylog:G:T', 'hatlog:G', or a
    JSON object with the same fields."""
    text = text.strip()
    if text.startswith("{"):
        try:
            return SublinearF.from_json_dict(json.loads(text))
        except (json.JSONDecodeError, TypeError) as exc:
            raise UsageError(f"bad f JSON: {exc}") from exc
    parts = text.split(":")
    kind = parts[0]
    try:
        if kind == "one":
            return F_ONE
        if kind == "power":
            return SublinearF(kind="power", gamma=float(parts[1]), delta=float(parts[2]))
        if kind == "polylog":
            return SublinearF(kind="polylog", gamma=float(parts[1]), t=float(parts[2]))
        if kind == "hatlog":
            return SublinearF(kind="hatlog", gamma=float(parts[1]))
    except (IndexError, ValueError) as exc:
        raise UsageError(f"bad f spec {text!r}: {exc}") from exc
    raise UsageError(f"unknown f kind {kind!r}; use one|power:G:D|polylog:G:T|hatlog:G")


def parse_ids(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"bad id list {text!r}") from exc


def parse_pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"expected 'lo,hi', got {text!r}")
    return float(parts[0]), float(parts[1])


def parse_power(text: str, inst: Instance | None = None) -> PowerAssignment:
    """'uniform[:LEVEL]' or 'tau[:VALUE]'."""
    parts = text.split(":")
    if parts[0] == "uniform":
        return uniform_power(float(parts[1]) if len(parts) > 1 else 1.0)
    if parts[0] == "tau":
        if len(parts) > 1:
            return oblivious_power(float(parts[1]))
        if inst is None:
            raise UsageError("tau power without a value needs an instance for defaults")
        return oblivious_power(default_tau(inst.metric.alpha, inst.metric.m))
    raise UsageError(f"unknown power spec {text!r}; use uniform[:LEVEL] or tau[:VALUE]")


def load_instance(path: str) -> Instance:
    if path == "-":
        return Instance.from_json(sys.stdin.read())
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return Instance.from_json(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read instance file {path!r}: {exc}") from exc


def emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(text)


def emit_json(payload: Any, args: argparse.Namespace) -> None:
    if args.format == "csv":
        raise UsageError(f"subcommand {args.command!r} emits JSON; use --format json")
    emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)


def emit_table(
    payload: Any, header: str, rows: list[str], args: argparse.Namespace
) -> None:
    if args.format == "csv":
        emit("\n".join([header] + rows) + "\n", args.out)
    else:
        emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)


# ----------------------------------------------------------------------
# subcommand bodies


def cmd_gen(args: argparse.Namespace) -> None:
    if args.spec:
        with open(args.spec, "r", encoding="utf-8") as fh:
            spec = GenSpec.from_json_dict(json.load(fh))
        if args.seed is not None:
            spec = spec.with_seed(args.seed)
    else:
        if not args.kind:
            raise UsageError("gen needs --kind or --spec")
        try:
            params = json.loads(args.params) if args.params else {}
        except json.JSONDecodeError as exc:
            raise UsageError(f"bad --params JSON: {exc}") from exc
        spec = GenSpec(kind=args.kind, params=params, seed=args.seed or 0)
    inst = spec.generate()
    if args.format == "csv":
        raise UsageError("gen emits instance JSON; use --format json")
    emit(inst.to_json(indent=2), args.out)


def cmd_graph(args: argparse.Namespace) -> None:
    inst = load_instance(args.instance)
    g = build_graph(inst, parse_f(args.f), uniform_mode=args.uniform)
    payload = g.to_json_dict()
    payload["edge_count"] = g.edge_count()
    rows = [
        f"{u},{v}" for u in range(g.n) for v in g.neighbors[u] if u < v
    ]
    emit_table(payload, "u,v", rows, args)


def cmd_color(args: argparse.Namespace) -> None:
    inst = load_instance(args.instance)
    g = build_graph(inst, parse_f(args.f), uniform_mode=args.uniform)
    coloring = greedy_color(g)
    payload = {
        "num_colors": coloring.num_colors,
        "color": {str(v): c for v, c in sorted(coloring.color.items())},
        "classes": coloring.classes(),
    }
    rows = [f"{v},{coloring.color[v]}" for v in sorted(coloring.color)]
    emit_table(payload, "link,color", rows, args)


def cmd_mwisl(args: argparse.Namespace) -> None:
    inst = load_instance(args.instance)
    res = mwisl_solve(
        inst,
        parse_f(args.f),
        power_mode=args.power_mode,
        tau=args.tau,
        uniform_mode=args.uniform,
    )
    payload = res.to_json_dict()
    payload["weight"] = float(sum(inst.weights[i] for i in res.selected))
    emit_json(payload, args)


def cmd_schedule(args: argparse.Namespace) -> None:
    inst = load_instance(args.instance)
    sched = tdma_schedule(
        inst,
        parse_f(args.f),
        power_mode=args.power_mode,
        tau=args.tau,
        uniform_mode=args.uniform,
    )
    rows = [
        f"{si},{v}" for si, slot in enumerate(sched.slots) for v in slot.links
    ]
    emit_table(sched.to_json_dict(), "slot,link", rows, args)


def cmd_online(args: argparse.Namespace) -> None:
    inst = load_instance(args.instance)
    if args.arrival == "random":
        order = [int(v) for v in np.random.default_rng(args.seed or 0).permutation(inst.n)]
    elif args.arrival:
        order = parse_ids(args.arrival)
    else:
        order = None
    sched = online_schedule(
        inst,
        parse_f(args.f),
        arrival_order=order,
        power_mode=args.power_mode,
        tau=args.tau,
        uniform_mode=args.uniform,
    )
    rows = [
        f"{si},{v}" for si, slot in enumerate(sched.slots) for v in slot.links
    ]
    emit_table(sched.to_json_dict(), "slot,link", rows, args)


def cmd_check(args: argparse.Namespace) -> None:
    inst = load_instance(args.instance)
    subset = parse_ids(args.subset) if args.subset else list(range(inst.n))
    tau = args.tau
    if tau is None and args.method in ("tau", "bidirectional-tau"):
        tau = default_tau(inst.metric.alpha, inst.metric.m)
    if args.method == "spectral":
        rep = spectral_feasibility_oracle(inst, subset)
        payload = rep.to_json_dict()
    elif args.method == "tau":
        payload = {
            "method": "tau",
            "tau": tau,
            "feasible": is_tau_feasible(inst, subset, tau),
        }
    elif args.method == "bidirectional-tau":
        payload = {
            "method": "bidirectional-tau",
            "tau": tau,
            "feasible": is_bidirectionally_p_feasible(inst, subset, tau),
        }
    elif args.method == "kesselheim":
        value = kesselheim_I(inst, subset)
        thr = kesselheim_threshold(inst.metric.alpha)
        payload = {
            "method": "kesselheim",
            "I": value,
            "threshold": thr,
            "feasible": bool(value < thr),
        }
    elif args.method == "uniform-power":
        rep = is_p_feasible(inst, subset, uniform_power(args.power_level))
        payload = rep.to_json_dict()
        payload["method"] = "uniform-power"
    else:
        raise UsageError(f"unknown check method {args.method!r}")
    payload["subset"] = subset
    emit_json(payload, args)


def cmd_tstrong(args: argparse.Namespace) -> None:
    inst = load_instance(args.instance)
    subset = parse_ids(args.subset) if args.subset else list(range(inst.n))
    power = parse_power(args.power, inst)
    parts = t_strong_partition(inst, subset, power, args.t)
    payload = {
        "t": args.t,
        "power": power.to_json_dict(),
        "parts": parts,
        "num_parts": len(parts),
    }
    rows = [f"{pi},{v}" for pi, part in enumerate(parts) for v in part]
    emit_table(payload, "part,link", rows, args)


def cmd_mcma(args: argparse.Namespace) -> None:
    inst = load_instance(args.instance)
    antennas = [int(t) for t in args.antennas.split(",")]
    channels = [
        [c for c in node.split(",") if c != ""] for node in args.channels.split(";")
    ]
    g, virtuals = mcma_expand(
        inst, antennas, channels, parse_f(args.f), uniform_mode=args.uniform
    )
    payload = {
        "virtuals": [
            {
                "id": v.id,
                "original": v.original,
                "channel": v.channel,
                "tx_antenna": v.tx_antenna,
                "rx_antenna": v.rx_antenna,
            }
            for v in virtuals
        ],
        "edge_count": g.edge_count(),
        "graph": g.to_json_dict(),
    }
    rows = [
        f"{v.id},{v.original},{v.channel},{v.tx_antenna},{v.rx_antenna}"
        for v in virtuals
    ]
    emit_table(payload, "vid,original,channel,tx,rx", rows, args)


def cmd_rates(args: argparse.Namespace) -> None:
    inst = load_instance(args.instance)
    try:
        utility = json.loads(args.utility)
    except json.JSONDecodeError as exc:
        raise UsageError(f"bad --utility JSON: {exc}") from exc
    expanded, weights, replica_map = rate_control_replicas(inst, utility, args.levels)
    payload = {
        "instance": expanded.to_json_dict(),
        "weights": {str(k): v for k, v in sorted(weights.items())},
        "replicas": replica_map,
    }
    rows = [
        f"{vid},{rec['original']},{rec['level']},{rec['weight']},{expanded.links[vid].beta}"
        for vid, rec in enumerate(replica_map)
    ]
    emit_table(payload, "replica,original,level,weight,beta", rows, args)


def cmd_calibrate(args: argparse.Namespace) -> None:
    res = calibrate_gamma(
        parse_f(args.f),
        certificate=args.certificate,
        n=args.n,
        alpha=args.alpha,
        m=args.m,
        trials=args.trials,
        seed=args.seed or 0,
        tau=args.tau,
        length_range=parse_pair(args.length_range),
        beta_range=parse_pair(args.beta_range),
    )
    emit_json(res.to_json_dict(), args)


def cmd_tightness(args: argparse.Namespace) -> None:
    deltas = [float(t) for t in args.deltas.split(",")] if args.deltas else None
    report = run_tightness_experiment(
        parse_f(args.f),
        deltas=deltas,
        trials=args.trials,
        n=args.n,
        alpha=args.alpha,
        m=args.m,
        seed=args.seed or 0,
        include_schedule=args.schedule,
        power_mode=args.power_mode,
    )
    emit(report.render(args.format), args.out)
    if args.plot:
        from .plots import render_tightness

        render_tightness(report, args.plot)


def cmd_lowerbound(args: argparse.Namespace) -> None:
    sizes = [int(t) for t in args.sizes.split(",")]
    report = run_lowerbound_experiment(
        args.kind,
        sizes,
        f=parse_f(args.f) if args.f else None,
        alpha=args.alpha,
        c=args.c,
        C=args.C,
        beta=args.beta,
        seed=args.seed or 0,
    )
    emit(report.render(args.format), args.out)
    if args.plot:
        from .plots import render_lowerbound

        render_lowerbound(report, args.plot)


# ----------------------------------------------------------------------
# parser assembly


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master RNG seed")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument(
        "--format", choices=("json", "csv"), default="json", help="output format"
    )

    fopt = argparse.ArgumentParser(add_help=False)
    fopt.add_argument(
        "--f",
        default="one",
        help="conflict scale map: one | power:G:D | polylog:G:T | hatlog:G | JSON",
    )
    fopt.add_argument(
        "--uniform", action="store_true", help="use the uniform-sensitivity edge rule"
    )

    powopt = argparse.ArgumentParser(add_help=False)
    powopt.add_argument(
        "--power-mode",
        choices=("oblivious-tau", "global"),
        default="oblivious-tau",
        help="certification power policy",
    )
    powopt.add_argument("--tau", type=float, default=None, help="power balance exponent")

    p = argparse.ArgumentParser(
        prog="linksketch",
        description="Conflict-graph sketching and scheduling for physical-model links",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("gen", parents=[common], help="generate an instance")
    sp.add_argument("--kind", default=None, help="generator kind")
    sp.add_argument("--params", default=None, help="generator parameters as JSON")
    sp.add_argument("--spec", default=None, help="generation spec JSON file")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("graph", parents=[common, fopt], help="build a conflict graph")
    sp.add_argument("--instance", required=True)
    sp.set_defaults(func=cmd_graph)

    sp = sub.add_parser("color", parents=[common, fopt], help="greedy coloring")
    sp.add_argument("--instance", required=True)
    sp.set_defaults(func=cmd_color)

    sp = sub.add_parser(
        "mwisl", parents=[common, fopt, powopt], help="max-weight independent links"
    )
    sp.add_argument("--instance", required=True)
    sp.set_defaults(func=cmd_mwisl)

    sp = sub.add_parser(
        "schedule", parents=[common, fopt, powopt], help="certified TDMA schedule"
    )
    sp.add_argument("--instance", required=True)
    sp.set_defaults(func=cmd_schedule)

    sp = sub.add_parser(
        "online", parents=[common, fopt, powopt], help="first-fit online schedule"
    )
    sp.add_argument("--instance", required=True)
    sp.add_argument(
        "--arrival",
        default=None,
        help="comma-separated arrival order, or 'random' (uses --seed)",
    )
    sp.set_defaults(func=cmd_online)

    sp = sub.add_parser("check", parents=[common], help="feasibility checks")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--subset", default=None, help="comma-separated link ids")
    sp.add_argument("--method", choices=CHECK_METHODS, default="spectral")
    sp.add_argument("--tau", type=float, default=None)
    sp.add_argument("--power-level", type=float, default=1.0)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser(
        "tstrong", parents=[common], help="partition into t-strong parts"
    )
    sp.add_argument("--instance", required=True)
    sp.add_argument("--subset", default=None)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument(
        "--power", default="tau", help="power spec: uniform[:LEVEL] or tau[:VALUE]"
    )
    sp.set_defaults(func=cmd_tstrong)

    sp = sub.add_parser(
        "mcma", parents=[common, fopt], help="multi-channel multi-antenna expansion"
    )
    sp.add_argument("--instance", required=True)
    sp.add_argument("--antennas", required=True, help="per-node counts, comma-separated")
    sp.add_argument(
        "--channels",
        required=True,
        help="per-node channel lists: nodes split by ';', channels by ','",
    )
    sp.set_defaults(func=cmd_mcma)

    sp = sub.add_parser(
        "rates", parents=[common], help="rate-control replication of links"
    )
    sp.add_argument("--instance", required=True)
    sp.add_argument(
        "--utility",
        required=True,
        help="utility step table as JSON [[sir, value], ...]",
    )
    sp.add_argument("--levels", type=int, default=8)
    sp.set_defaults(func=cmd_rates)

    sp = sub.add_parser(
        "calibrate", parents=[common], help="calibrate the f scale factor"
    )
    sp.add_argument("--f", required=True, help="f template; gamma is replaced")
    sp.add_argument(
        "--certificate",
        choices=("bidirectional-tau", "interference-functional"),
        default="bidirectional-tau",
    )
    sp.add_argument("--n", type=int, default=200)
    sp.add_argument("--alpha", type=float, default=3.0)
    sp.add_argument("--m", type=int, default=2)
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--tau", type=float, default=None)
    sp.add_argument("--length-range", default="1,100")
    sp.add_argument("--beta-range", default="1,1")
    sp.set_defaults(func=cmd_calibrate)

    sp = sub.add_parser(
        "tightness", parents=[common], help="coloring tightness sweep"
    )
    sp.add_argument("--f", required=True)
    sp.add_argument("--deltas", default=None, help="diversity targets, comma-separated")
    sp.add_argument("--trials", type=int, default=50)
    sp.add_argument("--n", type=int, default=64)
    sp.add_argument("--alpha", type=float, default=3.0)
    sp.add_argument("--m", type=int, default=2)
    sp.add_argument("--schedule", action="store_true", help="also run the scheduler")
    sp.add_argument("--power-mode", choices=("oblivious-tau", "global"), default="global")
    sp.add_argument("--plot", default=None, help="also render a PNG to this path")
    sp.set_defaults(func=cmd_tightness)

    sp = sub.add_parser(
        "lowerbound", parents=[common], help="lower-bound instance families"
    )
    sp.add_argument("--kind", choices=("ndependence", "hardinstance"), required=True)
    sp.add_argument("--sizes", required=True, help="instance sizes, comma-separated")
    sp.add_argument("--f", default=None)
    sp.add_argument("--alpha", type=float, default=2.0)
    sp.add_argument("--c", type=float, default=None)
    sp.add_argument("--C", type=float, default=1.0)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--plot", default=None, help="also render a PNG to this path")
    sp.set_defaults(func=cmd_lowerbound)

    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return 3
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 4
    except Exception:
        traceback.print_exc()
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
