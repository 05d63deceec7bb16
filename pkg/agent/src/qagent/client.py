"""Client side of the atpgkit episode protocol (newline-delimited JSON).

Talks to `atpgkit serve-env` over TCP or a spawned stdio subprocess; this
package touches the ATPG engine only through that protocol plus the
fault-list / run-CSV file formats.
"""

from __future__ import annotations

import json
import shutil
import socket
import subprocess
from dataclasses import dataclass

import numpy as np

PROTOCOL_VERSION = 1
FEATURE_DIM = 22
LOGIC_SLICE = slice(0, 3)  # documented feature layout: logic one-hot first


class ProtocolError(RuntimeError):
    pass


@dataclass
class Step:
    reward: float
    obs: "GraphObs | None"
    done: bool
    status: str | None


class GraphObs:
    """Parsed observation: node features, fanin edges, action targets/mask.

    ``order`` holds a reverse-topological node ordering of the sub-circuit
    (consumers before their fanins) and ``depth`` its longest path length,
    which sets the number of message-passing sweeps.
    """

    def __init__(self, payload: dict):
        nodes = payload["nodes"]
        self.node_ids = [int(g) for g, _ in nodes]
        self.features = np.asarray([f for _, f in nodes], dtype=np.float64)
        if self.features.shape[1] != FEATURE_DIM:
            raise ProtocolError(f"feature dim {self.features.shape[1]} != {FEATURE_DIM}")
        index = {g: i for i, g in enumerate(self.node_ids)}
        self.edges = np.asarray([[index[int(a)], index[int(b)]]
                                 for a, b in payload["edges"]], dtype=np.int64
                                ).reshape(-1, 2)
        # aggregation predecessors are the circuit fanins: agg edge [j, i]
        # lets node i attend over fanin j
        self.agg_edges = self.edges.copy()
        self.mask = np.asarray(payload["mask"], dtype=bool)
        self.targets = [int(t) for t in payload["targets"]]
        self.target_index = np.asarray([index[t] for t in self.targets], dtype=np.int64)
        # logic branch per node: argmax of the exact one-hot {0,1,X}
        self.branch = np.argmax(self.features[:, LOGIC_SLICE], axis=1).astype(np.int64)
        self.order, self.depth = self._reverse_topo()

    def _reverse_topo(self) -> tuple[np.ndarray, int]:
        n = len(self.node_ids)
        outdeg = np.zeros(n, dtype=np.int64)  # edges point fanin -> consumer
        preds: list[list[int]] = [[] for _ in range(n)]
        for a, b in self.edges:
            preds[b].append(a)
        depth = np.zeros(n, dtype=np.int64)
        for a, b in self.edges:
            outdeg[a] += 1
        ready = [i for i in range(n) if outdeg[i] == 0]  # heads first
        order = []
        while ready:
            nxt = []
            for i in sorted(ready):
                order.append(i)
                for p in preds[i]:
                    depth[p] = max(depth[p], depth[i] + 1)
                    outdeg[p] -= 1
                    if outdeg[p] == 0:
                        nxt.append(p)
            ready = nxt
        if len(order) != n:
            raise ProtocolError("observation graph is cyclic")
        return np.asarray(order, dtype=np.int64), int(depth.max())

    def valid_actions(self) -> list[int]:
        return [i for i, ok in enumerate(self.mask) if ok]


class EpisodeClient:
    """Blocking 1:1 request/reply client."""

    def __init__(self, send_line, recv_line, closer=None):
        self._send = send_line
        self._recv = recv_line
        self._close = closer
        reply = self.request({"cmd": "hello", "version": PROTOCOL_VERSION})
        if "error" in reply:
            raise ProtocolError(reply["error"])

    @classmethod
    def connect_tcp(cls, host: str, port: int, timeout: float = 60.0) -> "EpisodeClient":
        sock = socket.create_connection((host, port), timeout=timeout)
        rfile = sock.makefile("r", encoding="utf-8")

        def send(line: str) -> None:
            sock.sendall(line.encode() + b"\n")

        return cls(send, rfile.readline, sock.close)

    @classmethod
    def spawn_stdio(cls, bench: str, backtrack_limit: int = 100,
                    action_arity: int = 16, command: str = "atpgkit") -> "EpisodeClient":
        if shutil.which(command) is None:
            raise ProtocolError(f"{command!r} not found on PATH")
        proc = subprocess.Popen(
            [command, "serve-env", "--stdio", "--bench", bench,
             "--backtrack-limit", str(backtrack_limit),
             "--action-arity", str(action_arity)],
            stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True, bufsize=1)

        def send(line: str) -> None:
            proc.stdin.write(line + "\n")
            proc.stdin.flush()

        def close() -> None:
            proc.stdin.close()
            proc.wait(timeout=10)

        client = cls(send, proc.stdout.readline, close)
        client._proc = proc
        return client

    def request(self, msg: dict) -> dict:
        self._send(json.dumps(msg))
        line = self._recv()
        if not line:
            raise ProtocolError("server closed the connection")
        return json.loads(line)

    def reset(self, fault: str, seed: int | None = None, bench: str | None = None
              ) -> tuple[GraphObs | None, bool, str | None]:
        msg = {"cmd": "reset", "fault": fault}
        if bench is not None:
            msg["bench"] = bench
        if seed is not None:
            msg["seed"] = seed
        reply = self.request(msg)
        if "error" in reply:
            raise ProtocolError(reply["error"])
        obs = GraphObs(reply["obs"]) if reply.get("obs") else None
        return obs, bool(reply["done"]), reply.get("status")

    def step(self, action: int) -> Step:
        reply = self.request({"cmd": "step", "action": int(action)})
        if "error" in reply:
            raise ProtocolError(reply["error"])
        obs = GraphObs(reply["obs"]) if reply.get("obs") else None
        return Step(float(reply["reward"]), obs, bool(reply["done"]), reply.get("status"))

    def metrics(self) -> dict:
        reply = self.request({"cmd": "metrics"})
        if "error" in reply:
            raise ProtocolError(reply["error"])
        return reply

    def close(self) -> None:
        if self._close is not None:
            try:
                self._close()
            except Exception:
                pass
