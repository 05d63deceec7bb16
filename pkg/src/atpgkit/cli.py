"""atpgkit command line.

Subcommands: faults, partition, scoap, atpg, serve-env, report.  Every
subcommand accepts --seed and --config FILE (JSON; command-line flags win).
Exit codes: 0 ok, 1 usage, 2 input error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bench import BenchError, parse_bench_file
from .faults import enumerate_faults, collapse_faults, format_fault, read_fault_list
from .ffr import partition
from .podem import (gate_level_heuristic_policy, ffr_level_heuristic_policy,
                    run_fault_list)
from .report import ReportError, build_report, read_run_csv, write_run_csv
from .scoap import compute_scoap

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _common(sub):
    sub.add_argument("--seed", type=int, default=0, help="run seed (recorded in outputs)")
    sub.add_argument("--config", help="JSON config file; explicit flags override it")


def _apply_config(args: argparse.Namespace, parser_defaults: dict) -> argparse.Namespace:
    if not getattr(args, "config", None):
        return args
    with open(args.config) as f:
        cfg = json.load(f)
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            continue
        # a flag left at its parser default is overridable by the config file
        if getattr(args, attr) == parser_defaults.get(attr):
            setattr(args, attr, value)
    return args


import contextlib


@contextlib.contextmanager
def _out(args):
    if args.output:
        with open(args.output, "w") as f:
            yield f
    else:
        yield sys.stdout


def build_parser() -> _Parser:
    p = _Parser(prog="atpgkit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("faults", help="enumerate the pin-level stuck-at universe")
    f.add_argument("--bench", required=True)
    f.add_argument("--collapse", action="store_true", help="apply equivalence collapsing")
    f.add_argument("--prune-dead", action="store_true", help="drop faults on dead logic")
    f.add_argument("-o", "--output")
    _common(f)

    q = sub.add_parser("partition", help="fanout-free region summary CSV")
    q.add_argument("--bench", required=True)
    q.add_argument("-o", "--output")
    _common(q)

    s = sub.add_parser("scoap", help="controllability/observability CSV")
    s.add_argument("--bench", required=True)
    s.add_argument("-o", "--output")
    _common(s)

    a = sub.add_parser("atpg", help="run test generation over a fault list")
    a.add_argument("--bench", required=True)
    a.add_argument("--faults", default="all", help="fault list file, or 'all'")
    a.add_argument("--policy", choices=["gate", "ffr", "rl"], default="gate")
    a.add_argument("--backtrack-limit", type=int, default=100)
    a.add_argument("--parallel", type=int, default=1)
    a.add_argument("--report", help="write the per-fault run CSV here")
    a.add_argument("--endpoint", help="host:port to serve episodes on (policy=rl)")
    a.add_argument("--action-arity", type=int, default=16)
    _common(a)

    e = sub.add_parser("serve-env", help="serve the episode wire protocol")
    e.add_argument("--bench", help="default netlist for resets that omit one")
    e.add_argument("--port", type=int, help="TCP port (0 picks one); prints it when ready")
    e.add_argument("--host", default="127.0.0.1")
    e.add_argument("--stdio", action="store_true", help="speak the protocol on stdin/stdout")
    e.add_argument("--backtrack-limit", type=int, default=100)
    e.add_argument("--action-arity", type=int, default=16)
    _common(e)

    r = sub.add_parser("report", help="comparison table from run CSVs (focus first)")
    r.add_argument("runs", nargs="+", help="focus run CSV, then baseline run CSVs")
    r.add_argument("--bench", help="netlist for the FFR average-depth column")
    r.add_argument("--labels", help="comma-separated labels matching the run files")
    r.add_argument("-o", "--output")
    _common(r)
    return p


def cmd_faults(args) -> int:
    nl = parse_bench_file(args.bench)
    faults = enumerate_faults(nl, prune_dead=args.prune_dead)
    if args.collapse:
        faults = collapse_faults(nl, faults)
    with _out(args) as out:
        for fault in faults:
            out.write(format_fault(nl, fault) + "\n")
    return EXIT_OK


def cmd_partition(args) -> int:
    nl = parse_bench_file(args.bench)
    part = partition(nl)
    with _out(args) as out:
        out.write("ffr_head,member_count,depth,fanin_count\n")
        for ffr in part.ffrs:
            out.write(f"{nl.names[ffr.head]},{len(ffr.members)},{ffr.depth},"
                      f"{len(ffr.boundary_fanins)}\n")
        out.write(f"# average_depth,{part.average_depth():.4f}\n")
    return EXIT_OK


def cmd_scoap(args) -> int:
    nl = parse_bench_file(args.bench)
    sc = compute_scoap(nl)
    with _out(args) as out:
        out.write("gate,cc0,cc1,co\n")
        for g in range(len(nl)):
            out.write(f"{nl.names[g]},{int(sc.cc0[g])},{int(sc.cc1[g])},{int(sc.co[g])}\n")
    return EXIT_OK


def cmd_atpg(args) -> int:
    nl = parse_bench_file(args.bench)
    if args.faults.lower() == "all":
        faults = enumerate_faults(nl)
    else:
        faults = read_fault_list(nl, args.faults)
    limit = args.backtrack_limit if args.backtrack_limit > 0 else None

    if args.policy == "rl":
        if not args.endpoint:
            print("atpgkit atpg: error: --policy rl requires --endpoint", file=sys.stderr)
            return EXIT_USAGE
        from .protocol import RunContext, serve_tcp

        host, _, port = args.endpoint.rpartition(":")
        run = RunContext(args.bench, nl, faults, limit)
        print(f"serving {len(faults)} fault episodes on {host or '127.0.0.1'}:{port}",
              file=sys.stderr)
        serve_tcp(host or "127.0.0.1", int(port), action_arity=args.action_arity,
                  backtrack_limit=limit, run=run)
        results = [run.results[f] for f in faults if f in run.results]
    else:
        policy = gate_level_heuristic_policy() if args.policy == "gate" \
            else ffr_level_heuristic_policy()
        results, metrics = run_fault_list(nl, faults, policy, limit, args.parallel)
        print(f"{nl.name}: {metrics.total} faults  detected={metrics.detected}  "
              f"untestable={metrics.untestable}  aborted={metrics.aborted}  "
              f"backtracks={metrics.backtracks}  backtrace_steps={metrics.backtrace_steps}  "
              f"decisions={metrics.decisions}  UFP={metrics.ufp:.3f}%  "
              f"(policy={args.policy}, backtrack_limit={limit})", file=sys.stderr)
    if args.report:
        write_run_csv(args.report, nl, results)
    return EXIT_OK


def cmd_serve_env(args) -> int:
    import threading

    from .protocol import serve_stdio, serve_tcp

    if args.stdio:
        serve_stdio(action_arity=args.action_arity, backtrack_limit=args.backtrack_limit,
                    bench_path=args.bench)
        return EXIT_OK
    if args.port is None:
        print("atpgkit serve-env: error: need --port or --stdio", file=sys.stderr)
        return EXIT_USAGE

    ready = threading.Event()

    def announce():
        ready.wait()
        # ready.port carries the bound port (relevant when --port 0 was given)
        print(f"listening on {args.host}:{ready.port}", flush=True)

    threading.Thread(target=announce, daemon=True).start()
    serve_tcp(args.host, args.port, action_arity=args.action_arity,
              backtrack_limit=args.backtrack_limit, bench_path=args.bench,
              ready_event=ready)
    return EXIT_OK


def cmd_report(args) -> int:
    labels = args.labels.split(",") if args.labels else [None] * len(args.runs)
    if len(labels) != len(args.runs):
        print("atpgkit report: error: --labels count must match run files", file=sys.stderr)
        return EXIT_USAGE
    runs = [read_run_csv(path, label) for path, label in zip(args.runs, labels)]
    depth = None
    if args.bench:
        depth = partition(parse_bench_file(args.bench)).average_depth()
    table = build_report(runs[0], runs[1:], depth)
    with _out(args) as out:
        out.write(table)
    return EXIT_OK


_COMMANDS = {
    "faults": cmd_faults,
    "partition": cmd_partition,
    "scoap": cmd_scoap,
    "atpg": cmd_atpg,
    "serve-env": cmd_serve_env,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    defaults = {k: parser.get_default(k) for k in vars(args)}
    try:
        args = _apply_config(args, defaults)
        return _COMMANDS[args.command](args)
    except (FileNotFoundError, BenchError, ReportError, ValueError) as e:
        print(f"atpgkit: {e}", file=sys.stderr)
        return EXIT_INPUT
    except KeyboardInterrupt:
        return EXIT_INTERNAL
    except Exception as e:  # internal failure: report and exit 3
        import traceback

        traceback.print_exc()
        print(f"atpgkit: internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
