"""Command line: ``eprnet {spectrum,route,allocate,experiment,plot}``.

Exit codes: 0 success, 1 configuration or input error, 2 an experiment
finished with failed cells (listed in its manifest).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .allocation import STRATEGIES, allocate, round_robin
from .errors import ConfigError, EprNetError
from .harness import ExperimentConfig, plan_for, run_and_write
from .metrics import report
from .netgraph import expand
from .plotting import KINDS, plot
from .routing import route_all
from .spectrum import CALIBRATED_REP_RATE, SourceParams, channel_rates, scaled_plan
from .topology import DEFAULT_ALPHA, load_ilec, load_topology

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _topology(args):
    if args.topology == "ilec":
        return load_ilec(args.alpha)
    return load_topology(args.topology)  # files carry their own alpha


def _source(args, topo):
    src = args.source or topo.source
    if src is None:
        raise ConfigError(f"{topo.n}-node topology has no default source; pass --source")
    return src


def cmd_spectrum(args) -> int:
    params = SourceParams(rep_rate=args.rep_rate)
    plan = channel_rates(params)
    if args.nodes:
        plan = scaled_plan(plan, 136, args.nodes, params=params)
    plan.to_csv(args.output)
    print(f"{plan.m} channels, total {plan.total_rate:.6g} pairs/s -> {args.output}")
    return EXIT_OK


def _routes(args):
    topo = _topology(args)
    graph = expand(topo, _source(args, topo), args.l_wss, mem_loss=args.mem_loss)
    return topo, graph, route_all(graph)


def cmd_route(args) -> int:
    _, graph, table = _routes(args)
    table.to_csv(args.output)
    if args.edge_list:
        graph.write_edge_list(args.edge_list)
    print(f"{table.kappa} pairs routed, loss {table.loss_db.min():.3f}..{table.loss_db.max():.3f} dB -> {args.output}")
    return EXIT_OK


def cmd_allocate(args) -> int:
    topo, _, table = _routes(args)
    config = ExperimentConfig(rep_rate=args.rep_rate)
    plan = plan_for(topo.n, config)
    options = {}
    if args.strategy == "first_fit":
        options["resolution"] = args.resolution
    if args.strategy == "exact":
        options["budget"] = args.budget
    res = allocate(args.strategy, table.lam, plan.rates, **options)
    metrics = report(res.allocation, round_robin(table.lam, plan.rates))
    out = {**res.to_dict(), **metrics.to_dict(), "pairs": table.kappa, "channels": plan.m}
    text = json.dumps(out, indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n")
    print(text)
    if args.allocation_csv:
        res.allocation.to_csv(args.allocation_csv, table.pair_labels())
    return EXIT_OK


def cmd_experiment(args) -> int:
    config = ExperimentConfig.from_json(args.config)
    result = run_and_write(config, args.output)
    out = args.output or config.output_dir
    print(f"{len(result.rows)} rows, {len(result.failures)} failed cells -> {out}")
    for f in result.failures:
        print(f"  failed: {f}", file=sys.stderr)
    return result.exit_code


def cmd_plot(args) -> int:
    kinds = KINDS if args.kind == "all" else (args.kind,)
    for kind in kinds:
        for path in plot(args.results, kind, args.output):
            print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="eprnet", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def network_args(sp):
        sp.add_argument("--topology", default="ilec", help="'ilec' or a topology JSON file")
        sp.add_argument("--source", help="source node label (default: the file's source)")
        sp.add_argument("--l-wss", type=float, default=4.0, help="WSS insertion loss, dB")
        sp.add_argument("--mem-loss", type=float, default=0.0, help="memory insertion loss, dB")
        sp.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="ILEC fiber loss, dB/km")

    s = sub.add_parser("spectrum", help="write a channel plan CSV")
    s.add_argument("--nodes", type=int, help="rescale the plan for an n-node network")
    s.add_argument("--rep-rate", type=float, default=CALIBRATED_REP_RATE)
    s.add_argument("-o", "--output", default="channel_plan.csv")
    s.set_defaults(func=cmd_spectrum)

    r = sub.add_parser("route", help="write the route table CSV for one source")
    network_args(r)
    r.add_argument("-o", "--output", default="routes.csv")
    r.add_argument("--edge-list", help="also dump the expanded graph")
    r.set_defaults(func=cmd_route)

    a = sub.add_parser("allocate", help="allocate channels for one source and print metrics")
    network_args(a)
    a.add_argument("--strategy", choices=STRATEGIES, default="modified_lpt")
    a.add_argument("--rep-rate", type=float, default=CALIBRATED_REP_RATE)
    a.add_argument("--resolution", type=float, default=1.0, help="First Fit threshold step")
    a.add_argument("--budget", type=float, default=60.0, help="exact solver time limit, s")
    a.add_argument("-o", "--output", help="write the JSON summary here")
    a.add_argument("--allocation-csv", help="write the channel assignment here")
    a.set_defaults(func=cmd_allocate)

    e = sub.add_parser("experiment", help="run an experiment grid from a JSON config")
    e.add_argument("config")
    e.add_argument("-o", "--output", help="output directory (default: the config's)")
    e.set_defaults(func=cmd_experiment)

    pl = sub.add_parser("plot", help="render SVG charts of an experiment directory")
    pl.add_argument("results")
    pl.add_argument("--kind", choices=KINDS + ("all",), default="all")
    pl.add_argument("-o", "--output", help="directory for the SVG files")
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (EprNetError, ValueError, OSError) as exc:
        print(f"eprnet {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
