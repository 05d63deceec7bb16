"""SCOAP combinational controllability/observability (Goldstein recurrences).

Forward pass over the topological order computes CC0/CC1, backward pass CO.
XOR/XNOR measures follow the same left-fold 2-input decomposition the
evaluator uses.  Arithmetic saturates at SENTINEL so deep circuits cannot
overflow; unobservable (dead) gates keep CO = SENTINEL.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bench import GateKind, Netlist

__all__ = ["SENTINEL", "ScoapValues", "Scoap", "compute_scoap"]

SENTINEL = 2**31 - 1


def _sat(x: int) -> int:
    return x if x < SENTINEL else SENTINEL


@dataclass(frozen=True)
class ScoapValues:
    cc0: int
    cc1: int
    co: int


@dataclass
class Scoap:
    cc0: np.ndarray
    cc1: np.ndarray
    co: np.ndarray

    def __getitem__(self, gid: int) -> ScoapValues:
        return ScoapValues(int(self.cc0[gid]), int(self.cc1[gid]), int(self.co[gid]))


def _xor2_cc(a0, a1, b0, b1, xnor: bool):
    """(cc0, cc1) of one 2-input XOR/XNOR fold step."""
    same = _sat(min(_sat(a0 + b0), _sat(a1 + b1)) + 1)
    diff = _sat(min(_sat(a0 + b1), _sat(a1 + b0)) + 1)
    return (diff, same) if xnor else (same, diff)


def _fold_cc(kind: GateKind, pairs: list[tuple[int, int]]) -> tuple[int, int]:
    a0, a1 = pairs[0]
    xnor = kind is GateKind.XNOR
    for b0, b1 in pairs[1:]:
        a0, a1 = _xor2_cc(a0, a1, b0, b1, xnor)
    return a0, a1


def compute_scoap(netlist: Netlist) -> Scoap:
    n = len(netlist)
    cc0 = np.zeros(n, dtype=np.int64)
    cc1 = np.zeros(n, dtype=np.int64)
    co = np.full(n, SENTINEL, dtype=np.int64)

    for gid in netlist.topo_order:
        gid = int(gid)
        kind = GateKind(int(netlist.kinds[gid]))
        fi = netlist.fanins[gid]
        if kind is GateKind.INPUT:
            cc0[gid] = cc1[gid] = 1
            continue
        f0 = [int(cc0[s]) for s in fi]
        f1 = [int(cc1[s]) for s in fi]
        if kind in (GateKind.AND, GateKind.NAND):
            all1 = _sat(sum(f1) + 1)
            any0 = _sat(min(f0) + 1)
            c0, c1 = (all1, any0) if kind is GateKind.NAND else (any0, all1)
        elif kind in (GateKind.OR, GateKind.NOR):
            all0 = _sat(sum(f0) + 1)
            any1 = _sat(min(f1) + 1)
            c0, c1 = (any1, all0) if kind is GateKind.NOR else (all0, any1)
        elif kind is GateKind.NOT:
            c0, c1 = _sat(f1[0] + 1), _sat(f0[0] + 1)
        elif kind in (GateKind.BUF, GateKind.DFF):
            c0, c1 = _sat(f0[0] + 1), _sat(f1[0] + 1)
        else:  # XOR / XNOR
            c0, c1 = _fold_cc(kind, list(zip(f0, f1)))
        cc0[gid], cc1[gid] = c0, c1

    for po in netlist.all_outputs:
        co[po] = 0

    for gid in netlist.topo_order[::-1]:
        gid = int(gid)
        # stem observability: best branch (POs already pinned at 0)
        if not netlist.is_po[gid]:
            best = SENTINEL
            for out in netlist.fanouts[gid]:
                for pin, src in enumerate(netlist.fanins[out]):
                    if src == gid:
                        best = min(best, _pin_co(netlist, cc0, cc1, co, out, pin))
            co[gid] = best
        else:
            co[gid] = 0
    return Scoap(cc0, cc1, co)


def _pin_co(netlist: Netlist, cc0, cc1, co, gid: int, pin: int) -> int:
    """Observability of input `pin` of gate `gid`."""
    kind = GateKind(int(netlist.kinds[gid]))
    fi = netlist.fanins[gid]
    base = int(co[gid])
    if base >= SENTINEL:
        return SENTINEL
    if kind in (GateKind.AND, GateKind.NAND):
        return _sat(base + sum(int(cc1[s]) for k, s in enumerate(fi) if k != pin) + 1)
    if kind in (GateKind.OR, GateKind.NOR):
        return _sat(base + sum(int(cc0[s]) for k, s in enumerate(fi) if k != pin) + 1)
    if kind in (GateKind.NOT, GateKind.BUF, GateKind.DFF):
        return _sat(base + 1)
    # XOR/XNOR: walk the fold chain.  Virtual accumulator x_k folds inputs
    # 0..k; observing pin j costs the best-side setup of every other operand
    # along the unique chain from j to the gate output.
    pairs = [(int(cc0[s]), int(cc1[s])) for s in fi]
    n = len(pairs)
    xnor = kind is GateKind.XNOR
    # prefix accumulator ccs: acc[k] = cc of x_k (fold of pairs[0..k])
    acc = [pairs[0]]
    for k in range(1, n):
        acc.append(_xor2_cc(*acc[k - 1], *pairs[k], xnor))
    best = lambda p: min(p[0], p[1])
    if pin == n - 1:
        cost = best(acc[n - 2]) + 1
    else:
        # chain from the fold step introducing `pin` up to the last step
        if pin == 0:
            cost = best(pairs[1]) + 1
            start = 1
        else:
            cost = best(acc[pin - 1]) + 1
            start = pin
        for k in range(start + 1, n):
            cost += best(pairs[k]) + 1
    return _sat(base + cost)
