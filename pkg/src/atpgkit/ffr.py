"""Fanout-free region partition and FFR-level backtrace structure.

Heads are the gates with fanout count != 1, the observation points, and
every primary input (PIs form degenerate single-gate regions so that
"reached a PI" stays well defined).  Every other gate joins the region of
its unique consumer, which makes each region a tree hanging below its head.
Boundary fanins (the gates outside a region driving its members) are always
heads of their own regions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bench import INVERTING, GateKind, Netlist
from .logic import GOOD, X

__all__ = ["Ffr", "FfrPartition", "BacktraceTarget", "partition", "backtrace_input_value"]


@dataclass(frozen=True)
class Ffr:
    head: int
    members: frozenset[int]
    boundary_fanins: tuple[int, ...]  # ascending gate id
    depth: int                        # longest member chain entered from a boundary fanin


@dataclass(frozen=True)
class BacktraceTarget:
    fanin: int
    required_value: int       # 0/1 desired at the fanin under the chosen path
    feasible_now: bool        # fanin is X or already carries the required value
    in_cone: bool             # some internal path reaches the objective gate
    path_gates: tuple[int, ...]  # members on the chosen fanin->objective path


class FfrPartition:
    def __init__(self, netlist: Netlist, ffrs: list[Ffr], ffr_of: np.ndarray):
        self.netlist = netlist
        self.ffrs = ffrs
        self.ffr_of = ffr_of

    def __len__(self) -> int:
        return len(self.ffrs)

    def of_gate(self, gid: int) -> Ffr:
        return self.ffrs[int(self.ffr_of[gid])]

    def average_depth(self) -> float:
        return float(np.mean([f.depth for f in self.ffrs])) if self.ffrs else 0.0

    def backtrace_targets(self, ffr: Ffr, objective: tuple[int, int],
                          values: np.ndarray | None = None) -> list[BacktraceTarget]:
        """Per-boundary-fanin required values for an objective inside `ffr`.

        For each boundary fanin with an internal path to the objective gate,
        the unique member chain is walked applying the per-gate backtrace
        value mapping; where the region reconverges (a fanin entering
        through several members), the branch the gate-level rule would take
        (minimum level, then minimum id) defines the path.
        """
        nl = self.netlist
        obj_gate, obj_value = objective
        if obj_gate not in ffr.members:
            raise ValueError(
                f"objective gate {nl.names[obj_gate]!r} is not a member of the FFR headed by "
                f"{nl.names[ffr.head]!r}"
            )
        if obj_value not in (0, 1):
            raise ValueError("objective value must be 0 or 1")

        # reach[g] = boundary fanins reachable from member g through member fanins
        reach: dict[int, frozenset[int]] = {}

        def _reach(g: int) -> frozenset[int]:
            got = reach.get(g)
            if got is None:
                acc = set()
                for s in nl.fanins[g]:
                    if s in ffr.members:
                        acc |= _reach(s)
                    else:
                        acc.add(s)
                got = reach[g] = frozenset(acc)
            return got

        targets = []
        cone = _reach(obj_gate)
        for fanin in ffr.boundary_fanins:
            if fanin not in cone:
                targets.append(BacktraceTarget(fanin, obj_value, False, False, ()))
                continue
            want = obj_value
            g = obj_gate
            path: list[int] = []
            while True:
                path.append(g)
                want ^= int(GateKind(int(nl.kinds[g])) in INVERTING)
                cands = []
                for s in nl.fanins[g]:
                    if s == fanin or (s in ffr.members and fanin in _reach(s)):
                        cands.append(s)
                nxt = min(cands, key=lambda s: (int(nl.levels[s]), s))
                if nxt == fanin:
                    break
                g = nxt
            feasible = True
            if values is not None:
                v = int(values[fanin])
                feasible = v == X or GOOD[v] == want
            targets.append(BacktraceTarget(fanin, want, feasible, True, tuple(path)))
        return targets


def backtrace_input_value(kind: GateKind, desired_output: int) -> int:
    """Desired value on the steered input of a gate whose output should be
    ``desired_output`` (standard PODEM mapping; XOR steers as BUF, XNOR as NOT)."""
    return desired_output ^ int(kind in INVERTING)


def partition(netlist: Netlist) -> FfrPartition:
    n = len(netlist)
    is_head = np.zeros(n, dtype=bool)
    for gid in range(n):
        if (netlist.kinds[gid] == GateKind.INPUT or netlist.is_po[gid]
                or len(netlist.fanouts[gid]) != 1):
            is_head[gid] = True

    ffr_of = np.full(n, -1, dtype=np.int32)
    heads = [g for g in range(n) if is_head[g]]
    head_index = {h: i for i, h in enumerate(heads)}
    members: list[list[int]] = [[] for _ in heads]
    # non-heads adopt their unique consumer's region; sweep in reverse topo
    # order so the consumer is resolved first
    for gid in netlist.topo_order[::-1]:
        gid = int(gid)
        if is_head[gid]:
            ffr_of[gid] = head_index[gid]
        else:
            ffr_of[gid] = ffr_of[netlist.fanouts[gid][0]]
        members[ffr_of[gid]].append(gid)

    ffrs = []
    for idx, head in enumerate(heads):
        mset = frozenset(members[idx])
        boundary = sorted({s for m in mset for s in netlist.fanins[m] if s not in mset})
        # chain length from each entry member (one with an external fanin) to head
        dist = {head: 1}
        depth = 0
        for m in sorted(mset, key=lambda g: -int(netlist.levels[g])):
            if m != head:
                dist[m] = dist[netlist.fanouts[m][0]] + 1
            if any(s not in mset for s in netlist.fanins[m]):
                depth = max(depth, dist[m])
        ffrs.append(Ffr(head, mset, tuple(boundary), depth))
    return FfrPartition(netlist, ffrs, ffr_of)
