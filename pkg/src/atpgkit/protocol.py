"""Newline-delimited JSON episode protocol over TCP or stdio.

One request line yields exactly one reply line.  Message shapes (see the
README for the full field reference):

    {"cmd": "hello", "version": 1}            -> {"ok": true, "version": 1}
    {"cmd": "reset", "bench": <path>, "fault": <fault>, "seed": <int>}
                                              -> {"obs": <obs>|null, "done": b, "status": s}
    {"cmd": "step", "action": i}              -> {"reward": r, "obs": <obs>|null,
                                                  "done": b, "status": s}
    {"cmd": "metrics"}                        -> per-episode counters
    {"cmd": "run-info"}                       -> harness run description (rl runs)

A fault is either a fault-list line ("g17 OUT SA0") or an object
{"gate": name, "pin": "OUT"|"IN:k", "stuck": 0|1}.  Malformed messages get
{"error": ...} and the connection stays open; a hello with an unsupported
version is refused and the connection closes.
"""

from __future__ import annotations

import json
import socket
import socketserver
import sys
import threading

from .bench import BenchError, Netlist, parse_bench, parse_bench_file
from .env import AtpgEnv, EnvError
from .faults import OUTPUT_PIN, FaultSite, format_fault, parse_fault_line

__all__ = ["PROTOCOL_VERSION", "Session", "RunContext", "serve_tcp", "serve_stdio", "EnvClient"]

PROTOCOL_VERSION = 1


def fault_from_json(netlist: Netlist, spec) -> FaultSite:
    if isinstance(spec, str):
        return parse_fault_line(netlist, spec)
    if isinstance(spec, dict):
        gate = netlist.id_of(str(spec["gate"]))
        pin = spec.get("pin", "OUT")
        if isinstance(pin, str):
            pin = OUTPUT_PIN if pin.upper() == "OUT" else int(pin.upper().removeprefix("IN:"))
        fault = FaultSite(gate, int(pin), int(spec["stuck"]))
        fault.validate(netlist)
        return fault
    raise ValueError(f"bad fault spec {spec!r}")


class RunContext:
    """Fault-list run served to an external agent (atpg --policy rl)."""

    def __init__(self, bench_path: str, netlist: Netlist, faults: list[FaultSite],
                 backtrack_limit: int | None):
        self.bench_path = bench_path
        self.netlist = netlist
        self.faults = faults
        self.backtrack_limit = backtrack_limit
        self.results: dict[FaultSite, object] = {}
        self.complete = threading.Event()

    def info(self) -> dict:
        return {
            "bench": self.bench_path,
            "faults": [format_fault(self.netlist, f) for f in self.faults],
            "backtrack_limit": self.backtrack_limit,
        }

    def record(self, fault: FaultSite, result) -> None:
        self.results[fault] = result
        if len(self.results) >= len(self.faults):
            self.complete.set()


class Session:
    """One client connection: at most one active episode at a time."""

    def __init__(self, action_arity: int = 16, backtrack_limit: int | None = 100,
                 run: RunContext | None = None, bench_path: str | None = None):
        self.K = action_arity
        self.backtrack_limit = backtrack_limit
        self.run = run
        self._netlists: dict[str, Netlist] = {}
        if run is not None:
            self._default_netlist = run.netlist
        elif bench_path is not None:
            self._default_netlist = parse_bench_file(bench_path)
        else:
            self._default_netlist = None
        self.env: AtpgEnv | None = None
        self._fault: FaultSite | None = None

    def handle_line(self, line: str) -> tuple[str, bool]:
        try:
            msg = json.loads(line)
            if not isinstance(msg, dict):
                raise ValueError("message must be a JSON object")
        except ValueError as e:
            return json.dumps({"error": f"malformed message: {e}"}), False
        try:
            reply, close = self.handle(msg)
        except (EnvError, BenchError, ValueError, KeyError) as e:
            reply, close = {"error": str(e) or repr(e)}, False
        return json.dumps(reply), close

    def handle(self, msg: dict) -> tuple[dict, bool]:
        cmd = msg.get("cmd")
        if cmd == "hello":
            version = msg.get("version")
            if version != PROTOCOL_VERSION:
                return {"error": f"unsupported protocol version {version!r}",
                        "version": PROTOCOL_VERSION}, True
            return {"ok": True, "version": PROTOCOL_VERSION}, False
        if cmd == "reset":
            return self._reset(msg), False
        if cmd == "step":
            return self._step(msg), False
        if cmd == "metrics":
            if self.env is None:
                raise EnvError("no active episode")
            return self.env.metrics(), False
        if cmd == "run-info":
            if self.run is None:
                raise EnvError("not serving a fault-list run")
            return self.run.info(), False
        raise ValueError(f"unknown command {cmd!r}")

    def _netlist_for(self, msg: dict) -> Netlist:
        if "bench_text" in msg:
            key = f"text:{hash(msg['bench_text'])}"
            if key not in self._netlists:
                self._netlists[key] = parse_bench(msg["bench_text"], name="inline")
            return self._netlists[key]
        if "bench" in msg:
            path = msg["bench"]
            if path not in self._netlists:
                self._netlists[path] = parse_bench_file(path)
            return self._netlists[path]
        if self._default_netlist is not None:
            return self._default_netlist
        raise ValueError("reset needs 'bench' or 'bench_text'")

    def _reset(self, msg: dict) -> dict:
        netlist = self._netlist_for(msg)
        fault = fault_from_json(netlist, msg["fault"])
        if self.env is None or self.env.netlist is not netlist:
            self.env = AtpgEnv(netlist, self.K, self.backtrack_limit)
        self._fault = fault
        obs, done, status = self.env.reset(fault, msg.get("seed"))
        if done and self.run is not None:
            self.run.record(fault, self.env.result())
        return {"obs": obs.to_json() if obs else None, "done": done, "status": status}

    def _step(self, msg: dict) -> dict:
        if self.env is None:
            raise EnvError("no active episode")
        action = msg.get("action")
        if not isinstance(action, int) or isinstance(action, bool):
            raise EnvError(f"action must be an integer, got {action!r}")
        reward, obs, done, status = self.env.step(action)
        if done and self.run is not None:
            self.run.record(self._fault, self.env.result())
        return {"reward": reward, "obs": obs.to_json() if obs else None,
                "done": done, "status": status}


def serve_tcp(host: str, port: int, *, action_arity: int = 16,
              backtrack_limit: int | None = 100, run: RunContext | None = None,
              bench_path: str | None = None, ready_event: threading.Event | None = None,
              stop_event: threading.Event | None = None) -> None:
    """Serve sessions over TCP; each connection gets an isolated session."""

    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            session = Session(action_arity, backtrack_limit, run, bench_path)
            for raw in self.rfile:
                line = raw.decode("utf-8", errors="replace").strip()
                if not line:
                    continue
                reply, close = session.handle_line(line)
                self.wfile.write(reply.encode() + b"\n")
                self.wfile.flush()
                if close:
                    break

    class Server(socketserver.ThreadingTCPServer):
        allow_reuse_address = True
        daemon_threads = True

    with Server((host, port), Handler) as server:
        if ready_event is not None:
            ready_event.port = server.server_address[1]  # resolved port when 0 was given
            ready_event.set()
        if stop_event is None and run is None:
            server.serve_forever()
        else:
            thread = threading.Thread(target=server.serve_forever, daemon=True)
            thread.start()
            if run is not None:
                run.complete.wait()
            else:
                stop_event.wait()
            server.shutdown()


def serve_stdio(*, action_arity: int = 16, backtrack_limit: int | None = 100,
                run: RunContext | None = None, bench_path: str | None = None,
                stdin=None, stdout=None) -> None:
    """Serve one session over stdin/stdout (one JSON line per message)."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    session = Session(action_arity, backtrack_limit, run, bench_path)
    for raw in stdin:
        line = raw.strip()
        if not line:
            continue
        reply, close = session.handle_line(line)
        stdout.write(reply + "\n")
        stdout.flush()
        if close:
            break
        if run is not None and run.complete.is_set():
            break


class EnvClient:
    """Minimal blocking client; used by tests and scripted drivers."""

    def __init__(self, host: str, port: int, timeout: float = 30.0):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self.rfile = self.sock.makefile("r", encoding="utf-8")
        self.hello()

    def request(self, msg: dict) -> dict:
        self.sock.sendall(json.dumps(msg).encode() + b"\n")
        line = self.rfile.readline()
        if not line:
            raise ConnectionError("server closed the connection")
        return json.loads(line)

    def hello(self) -> dict:
        reply = self.request({"cmd": "hello", "version": PROTOCOL_VERSION})
        if "error" in reply:
            raise ConnectionError(reply["error"])
        return reply

    def reset(self, **kwargs) -> dict:
        return self.request({"cmd": "reset", **kwargs})

    def step(self, action: int) -> dict:
        return self.request({"cmd": "step", "action": action})

    def metrics(self) -> dict:
        return self.request({"cmd": "metrics"})

    def run_info(self) -> dict:
        return self.request({"cmd": "run-info"})

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass
