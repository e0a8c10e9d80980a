"""Command-line entry point: ``secdispatch <subcommand> ...``."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .dispatch import DispatchInfeasible, price_of_security, solve_ed, solve_sced
from .experiments import SweepSpec, format_value, run_sweep, worst_case_search
from .network import load_case, load_instance, validate_instance
from .twobus import TwoBusParams, closed_form_costs, closed_form_pos, worst_case_instance


def _load(args):
    net = load_case(args.case)
    inst = load_instance(Path(args.instance).read_text("utf-8"), net)
    report = validate_instance(net, inst)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if not report.ok:
        raise SystemExit("invalid instance: " + "; ".join(report.errors))
    return net, inst


def _write_rows(path, rows):
    out = open(path, "w", encoding="utf-8", newline="") if path else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    finally:
        if path:
            out.close()


def _generation_rows(net, sol):
    yield ("bus", "generation")
    for bus, q in zip(net.buses, sol.generation):
        yield (bus.id, float(q))


def cmd_dispatch(args):
    net, inst = _load(args)
    solver = solve_ed if args.command == "solve-ed" else solve_sced
    sol = solver(net, inst)
    if not sol.feasible:
        print(f"{args.command}: problem is {sol.status}", file=sys.stderr)
        return 1
    rows = list(_generation_rows(net, sol))
    rows += [("cost",), (sol.cost,)]
    _write_rows(args.output, rows)
    return 0


def cmd_pos(args):
    net, inst = _load(args)
    try:
        rep = price_of_security(net, inst)
    except DispatchInfeasible as exc:
        print(f"pos: {exc}", file=sys.stderr)
        return 1
    rows = list(_generation_rows(net, rep.sc_solution))
    rows += [("cost_ed", "cost_sc", "pos"), (rep.c_ed, rep.c_sc, rep.pos)]
    _write_rows(args.output, rows)
    return 0


def cmd_two_bus(args):
    p = TwoBusParams.create(args.alpha1, args.alpha2, args.limit1, args.limit2, args.b1, args.b2)
    if p.bus_ids != (1, 2):
        d1, d2 = args.d2, args.d1
    else:
        d1, d2 = args.d1, args.d2
    c_ed, c_sc = closed_form_costs(p, d1, d2)
    wc = worst_case_instance(p)
    print(f"f_ed={p.f_ed:.9g} f_sc={p.f_sc:.9g} cheap_bus={p.bus_ids[0]}")
    print(f"c_ed={c_ed:.9g}")
    print(f"c_sc={c_sc:.9g}")
    print(f"pos={closed_form_pos(p, d1, d2):.9g}")
    print(f"worst_case: d_cheap={wc.d1:.9g} d_expensive={wc.d2:.9g} "
          f"cheap_capacity>={wc.min_cheap_capacity:.9g} pos={wc.pos:.9g}")
    return 0


def cmd_sweep(args):
    doc = json.loads(Path(args.spec).read_text("utf-8")) if args.spec else {}
    if args.case:
        doc["case"] = args.case
    if args.mode:
        doc["mode"] = args.mode
    spec = SweepSpec.from_dict(doc)
    result = run_sweep(spec, workers=args.workers)
    text = result.to_csv(args.output)
    if not args.output:
        sys.stdout.write(text)
    return 0


def cmd_worst_case(args):
    net = load_case(args.case)
    buses = args.demand_buses or net.bus_ids
    demand_box = {b: (0.0, args.dmax) for b in buses}
    capacity_box = {} if args.qmax is None else {b: (args.qmax, args.qmax) for b in net.bus_ids}
    wc = worst_case_search(net, capacity_box, demand_box, args.dstep)
    header = [f"d_{b}" for b in net.bus_ids] + ["c_ed", "c_sc", "pos"]
    row = [float(v) for v in wc.instance.demand] + [wc.c_ed, wc.c_sc, wc.pos]
    _write_rows(args.output, [header, row])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="secdispatch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("solve-ed", "solve-sced", "pos"):
        p = sub.add_parser(name)
        p.add_argument("--case", required=True, help="bundled case name (2bus, pjm5) or case file")
        p.add_argument("--instance", required=True, help="instance JSON file")
        p.add_argument("--output", help="CSV path (stdout if omitted)")
        p.set_defaults(func=cmd_pos if name == "pos" else cmd_dispatch)

    p = sub.add_parser("two-bus-oracle")
    for flag, default in (("--alpha1", 1.0), ("--alpha2", 2.0), ("--limit1", 100.0), ("--limit2", 100.0),
                          ("--b1", 1.0), ("--b2", 1.0), ("--d1", 0.0), ("--d2", 200.0)):
        p.add_argument(flag, type=float, default=default)
    p.set_defaults(func=cmd_two_bus)

    p = sub.add_parser("sweep")
    p.add_argument("--case")
    p.add_argument("--mode")
    p.add_argument("--spec", help="JSON file with SweepSpec fields")
    p.add_argument("--output")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("worst-case")
    p.add_argument("--case", required=True)
    p.add_argument("--dstep", type=float, default=10.0)
    p.add_argument("--dmax", type=float, default=300.0)
    p.add_argument("--qmax", type=float, default=None, help="capacity at every bus (unlimited if omitted)")
    p.add_argument("--demand-buses", type=int, nargs="+", help="buses with nonzero demand (default all)")
    p.add_argument("--output")
    p.set_defaults(func=cmd_worst_case)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
