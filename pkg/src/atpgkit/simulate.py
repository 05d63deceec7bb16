"""Circuit state under one injected fault: forward implication and fault simulation.

``imply`` follows PODEM's forward-only discipline: a primary-input assignment
is propagated in topological order; conflicts cannot arise.  Refining a PI
from X to a definite value takes an event-driven fast path; rebuilding after
a backtrack re-sweeps the whole circuit through the compiled kernel.  Both
paths produce identical values and D-frontier (property-tested).
"""

from __future__ import annotations

import heapq

import numpy as np

from . import _kernels
from ._kernels import pure as _pure
from .bench import GateKind, Netlist
from .faults import OUTPUT_PIN, FaultSite
from .logic import D, DBAR, GOOD, X

__all__ = ["CircuitState", "imply", "fault_simulate", "good_simulate"]


class CircuitState:
    """Per-fault, single-owner 5-valued state with decision stack and D-frontier."""

    def __init__(self, netlist: Netlist, fault: FaultSite):
        fault.validate(netlist)
        self.netlist = netlist
        self.fault = fault
        n = len(netlist)
        self.pi_vals = np.full(n, 2, dtype=np.int8)   # 3-valued good assignment of INPUT gates
        self.values = np.full(n, X, dtype=np.int8)
        self.d_frontier: set[int] = set()
        # (pi id, assigned value, alternative-tried flag)
        self.decision_stack: list[tuple[int, int, bool]] = []
        self._frontier_buf = np.empty(n, dtype=np.int32)
        self.resweep()

    # -- full rebuild ------------------------------------------------------

    def resweep(self) -> None:
        """Full topological re-sweep from the current PI assignment."""
        nl = self.netlist
        nf = _kernels.full_sweep(
            nl.kinds, nl.fanin_off, nl.fanin_flat, nl.topo_order,
            self.pi_vals, self.values,
            self.fault.gate, self.fault.pin, self.fault.stuck,
            self._frontier_buf,
        )
        self.d_frontier = set(int(g) for g in self._frontier_buf[:nf])

    # -- event-driven fast path --------------------------------------------

    def _eval_gate_now(self, gid: int) -> int:
        nl = self.netlist
        f = self.fault
        codes = [int(self.values[s]) for s in nl.fanins[gid]]
        sub_pin = f.pin if (gid == f.gate and f.pin != OUTPUT_PIN) else -1
        out_stuck = f.stuck if (gid == f.gate and f.pin == OUTPUT_PIN) else -1
        return _pure.eval_one(int(nl.kinds[gid]), codes, sub_pin, f.stuck, out_stuck)

    def _effective_fanin_codes(self, gid: int) -> list[int]:
        nl = self.netlist
        f = self.fault
        codes = [int(self.values[s]) for s in nl.fanins[gid]]
        if gid == f.gate and f.pin != OUTPUT_PIN:
            codes[f.pin] = _pure._ENC[GOOD[codes[f.pin]]][f.stuck]
        return codes

    def _in_frontier(self, gid: int) -> bool:
        if self.values[gid] != X or not self.netlist.fanins[gid]:
            return False
        return any(c in (D, DBAR) for c in self._effective_fanin_codes(gid))

    def assign(self, pi: int, value: int) -> None:
        """Assign a currently-X primary input and propagate.

        X-to-definite refinements take the event-driven fast path when the
        pure backend is active (it beats a full interpreted sweep); the
        compiled backend re-sweeps, which is faster still.  Both paths agree
        exactly (property-tested).
        """
        nl = self.netlist
        if nl.kinds[pi] != GateKind.INPUT:
            raise ValueError(f"gate {nl.names[pi]!r} is not a primary input")
        if self.pi_vals[pi] == value:
            return  # idempotent re-imply
        if self.pi_vals[pi] != 2 or _kernels.BACKEND == "cython":
            self.pi_vals[pi] = value
            self.resweep()
            return
        self.assign_event(pi, value)

    def assign_event(self, pi: int, value: int) -> None:
        """Event-driven X-to-definite propagation (the optimization path)."""
        nl = self.netlist
        if self.pi_vals[pi] == value:
            return
        assert self.pi_vals[pi] == 2, "event path only refines X inputs"
        self.pi_vals[pi] = value
        f = self.fault
        g3 = value
        f3 = f.stuck if (pi == f.gate and f.pin == OUTPUT_PIN) else g3
        new = _pure._ENC[g3][f3]
        if new == self.values[pi]:
            return
        self.values[pi] = new
        changed = [pi]
        heap = [(int(nl.levels[g]), int(g)) for g in nl.fanouts[pi]]
        heapq.heapify(heap)
        queued = set(nl.fanouts[pi])
        while heap:
            _, gid = heapq.heappop(heap)
            queued.discard(gid)
            new = self._eval_gate_now(gid)
            if new != self.values[gid]:
                self.values[gid] = np.int8(new)
                changed.append(gid)
                for out in nl.fanouts[gid]:
                    if out not in queued:
                        queued.add(out)
                        heapq.heappush(heap, (int(nl.levels[out]), int(out)))
        recheck = set(changed)
        for c in changed:
            recheck.update(nl.fanouts[c])
        for gid in recheck:
            if self._in_frontier(gid):
                self.d_frontier.add(gid)
            else:
                self.d_frontier.discard(gid)

    # -- queries -------------------------------------------------------------

    def detected(self) -> bool:
        """True when a D/DBAR value has reached an observation point."""
        for po in self.netlist.all_outputs:
            if self.values[po] in (D, DBAR):
                return True
        return False

    def assignment(self) -> dict[int, int]:
        """Current definite PI assignment, gate id -> 0/1."""
        return {int(p): int(self.pi_vals[p])
                for p in self.netlist.all_inputs if self.pi_vals[p] != 2}

    def check_frontier_invariant(self) -> bool:
        """Debug check: stored D-frontier equals direct recomputation."""
        fresh = {g for g in range(len(self.netlist)) if self._in_frontier(g)}
        return fresh == self.d_frontier


def imply(netlist: Netlist, state: CircuitState, pi_assignment: tuple[int, int]) -> CircuitState:
    """Assign one PI and propagate; returns the mutated state."""
    assert state.netlist is netlist
    state.assign(*pi_assignment)
    return state


def _pattern_to_pi_vals(netlist: Netlist, pattern: dict[int, int]) -> np.ndarray:
    pi_vals = np.full(len(netlist), 2, dtype=np.int8)
    for pi in netlist.all_inputs:
        if pi not in pattern:
            raise ValueError(f"incomplete pattern: input {netlist.names[pi]!r} unassigned")
        v = pattern[pi]
        if v not in (0, 1):
            raise ValueError(f"pattern value for {netlist.names[pi]!r} must be 0 or 1")
        pi_vals[pi] = v
    return pi_vals


def fault_simulate(netlist: Netlist, pattern: dict[int, int], fault: FaultSite) -> bool:
    """Detection oracle: does a full input pattern expose the fault at any output?"""
    fault.validate(netlist)
    pi_vals = _pattern_to_pi_vals(netlist, pattern)
    values = np.full(len(netlist), X, dtype=np.int8)
    buf = np.empty(len(netlist), dtype=np.int32)
    _kernels.full_sweep(netlist.kinds, netlist.fanin_off, netlist.fanin_flat,
                        netlist.topo_order, pi_vals, values,
                        fault.gate, fault.pin, fault.stuck, buf)
    return any(values[po] in (D, DBAR) for po in netlist.all_outputs)


def good_simulate(netlist: Netlist, pattern: dict[int, int]) -> dict[int, int]:
    """Fault-free simulation of a full pattern; returns output values."""
    pi_vals = _pattern_to_pi_vals(netlist, pattern)
    values = np.full(len(netlist), X, dtype=np.int8)
    buf = np.empty(len(netlist), dtype=np.int32)
    _kernels.full_sweep(netlist.kinds, netlist.fanin_off, netlist.fanin_flat,
                        netlist.topo_order, pi_vals, values, -1, -1, 0, buf)
    return {int(po): int(values[po]) for po in netlist.all_outputs}
