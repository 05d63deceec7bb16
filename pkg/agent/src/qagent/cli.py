"""qagent command line: train against a served environment, evaluate policies.

The environment comes either from --endpoint HOST:PORT (a running
`atpgkit serve-env` / `atpgkit atpg --policy rl`) or --spawn-bench PATH,
which launches `atpgkit serve-env --stdio` as a subprocess.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from .client import EpisodeClient
from .dqn import Trainer
from .model import AgentConfig, load_checkpoint


def read_fault_lines(path: str) -> list[str]:
    out = []
    with open(path) as f:
        for raw in f:
            line = raw.split("#", 1)[0].strip()
            if line:
                out.append(line)
    return out


def make_client(args, cfg: AgentConfig) -> EpisodeClient:
    if args.endpoint:
        host, _, port = args.endpoint.rpartition(":")
        return EpisodeClient.connect_tcp(host or "127.0.0.1", int(port))
    if args.spawn_bench:
        return EpisodeClient.spawn_stdio(args.spawn_bench, cfg.backtrack_limit,
                                         cfg.action_arity)
    raise SystemExit("need --endpoint or --spawn-bench")


def load_config(args) -> AgentConfig:
    cfg = AgentConfig()
    if args.config:
        with open(args.config) as f:
            cfg = AgentConfig(**{**json.loads(cfg.to_json()), **json.load(f)})
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def cmd_train(args) -> int:
    cfg = load_config(args)
    faults = read_fault_lines(args.faults)
    client = make_client(args, cfg)
    try:
        trainer = Trainer(client, faults, cfg, args.workdir)
        summary = trainer.train(args.epochs)
    finally:
        client.close()
    print(json.dumps(summary))
    return 0


def cmd_eval(args) -> int:
    cfg = load_config(args)
    faults = read_fault_lines(args.faults)
    if args.checkpoint:
        model, _ = load_checkpoint(args.checkpoint)
        cfg = model.cfg
        if args.seed is not None:
            cfg.seed = args.seed
    client = make_client(args, cfg)
    try:
        trainer = Trainer(client, faults, cfg, args.workdir)
        if args.checkpoint:
            trainer.online.load_state_dict(model.state_dict())
        results = trainer.evaluate(faults, mode=args.policy)
    finally:
        client.close()
    if args.report:
        with open(args.report, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["fault", "status", "backtracks", "backtrace_steps", "decisions"])
            for m in results:
                w.writerow([m["fault"], m["status"], m["backtracks"],
                            m["backtrace_steps"], m["decisions"]])
    total_bt = sum(m["backtracks"] for m in results)
    undetected = sum(1 for m in results if m["status"] != "DETECTED")
    print(json.dumps({"faults": len(results), "backtracks": total_bt,
                      "mean_backtracks": total_bt / max(1, len(results)),
                      "undetected": undetected}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qagent", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(s):
        s.add_argument("--endpoint", help="host:port of a running environment server")
        s.add_argument("--spawn-bench", help="bench path; spawn atpgkit serve-env --stdio")
        s.add_argument("--faults", required=True, help="fault list file")
        s.add_argument("--workdir", default="qagent-out")
        s.add_argument("--config", help="JSON overrides for AgentConfig")
        s.add_argument("--seed", type=int)

    t = sub.add_parser("train", help="train a checkpoint")
    common(t)
    t.add_argument("--epochs", type=int, default=10)

    e = sub.add_parser("eval", help="play episodes with a policy")
    common(e)
    e.add_argument("--checkpoint")
    e.add_argument("--policy", choices=["greedy", "random"], default="greedy")
    e.add_argument("--report", help="write an atpgkit-compatible run CSV")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "train":
        return cmd_train(args)
    return cmd_eval(args)


if __name__ == "__main__":
    sys.exit(main())
