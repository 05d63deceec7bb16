"""PODEM branch-and-bound test generation with pluggable backtrace policies.

The search loop is the classic one: activate the fault, then propagate a
D/DBAR to an observation point, branching only on primary inputs.  The
backtrace from an objective to an unassigned PI is delegated to a policy:
gate-level policies walk fanin-by-fanin, FFR-level policies jump boundary
fanin to boundary fanin.  An FFR-mode search can also be driven one hop at
a time through :meth:`PodemSearch.decisions` - the RL environment and the
scripted FFR heuristic share that exact code path.

Counting rules:
- decision: one PI assignment made via backtrace;
- backtrace step: one gate hop (gate mode) or one FFR hop (FFR mode), with
  a minimum of one step per walk so a fault sitting directly on a PI still
  costs a step;
- backtrack: one flip or pop of the decision stack; every backtrack is
  charged to the most recently assigned PI until the next walk begins.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bench import GateKind, Netlist
from .faults import OUTPUT_PIN, FaultSite, format_fault
from .ffr import BacktraceTarget, Ffr, FfrPartition, backtrace_input_value, partition
from .logic import D, DBAR, GOOD, NONCONTROLLING, X
from .scoap import Scoap, compute_scoap
from .simulate import CircuitState, fault_simulate

__all__ = [
    "DETECTED", "UNTESTABLE", "ABORTED",
    "AtpgResult", "RunMetrics", "FfrDecision", "PodemSearch",
    "BacktracePolicy", "gate_level_heuristic_policy", "ffr_level_heuristic_policy",
    "generate_test", "run_fault_list",
]

DETECTED = "DETECTED"
UNTESTABLE = "UNTESTABLE"
ABORTED = "ABORTED"


@dataclass
class AtpgResult:
    fault: FaultSite
    status: str
    pattern: dict[int, int] | None
    backtracks: int
    backtrace_steps: int
    decisions: int
    pi_visits: dict[int, int]
    pi_backtracks: dict[int, int]

    def pattern_str(self, netlist: Netlist) -> str:
        if self.pattern is None:
            return ""
        return "".join(str(self.pattern[p]) for p in netlist.all_inputs)


@dataclass
class RunMetrics:
    total: int = 0
    detected: int = 0
    untestable: int = 0
    aborted: int = 0
    backtracks: int = 0
    backtrace_steps: int = 0
    decisions: int = 0

    @property
    def undetected(self) -> int:
        return self.untestable + self.aborted

    @property
    def ufp(self) -> float:
        return 100.0 * self.undetected / self.total if self.total else 0.0

    def add(self, r: AtpgResult) -> None:
        self.total += 1
        if r.status == DETECTED:
            self.detected += 1
        elif r.status == UNTESTABLE:
            self.untestable += 1
        else:
            self.aborted += 1
        self.backtracks += r.backtracks
        self.backtrace_steps += r.backtrace_steps
        self.decisions += r.decisions


@dataclass(frozen=True)
class FfrDecision:
    """One FFR-hop decision point: pick a boundary fanin of ``ffr``."""

    gate: int
    value: int
    ffr: Ffr
    targets: tuple[BacktraceTarget, ...]
    valid: tuple[int, ...]  # indices into targets: in-cone and X-valued


class BacktracePolicy:
    """Behavioral interface; ``mode`` selects the walk granularity."""

    mode: str = "gate"
    name: str = "policy"

    def choose_fanin(self, netlist: Netlist, values: np.ndarray, gate: int,
                     want: int, candidates: list[int]) -> int:
        raise NotImplementedError

    def choose_target(self, netlist: Netlist, values: np.ndarray,
                      decision: FfrDecision) -> int:
        raise NotImplementedError


class _GateHeuristic(BacktracePolicy):
    """Distance-from-primary-inputs rule: minimum level, ties to low id."""

    mode = "gate"
    name = "gate"

    def choose_fanin(self, netlist, values, gate, want, candidates):
        return min(candidates, key=lambda s: (int(netlist.levels[s]), s))


class _FfrHeuristic(BacktracePolicy):
    """Same distance rule applied to the valid boundary fanins of each hop."""

    mode = "ffr"
    name = "ffr"

    def choose_target(self, netlist, values, decision):
        return min(decision.valid,
                   key=lambda i: (int(netlist.levels[decision.targets[i].fanin]),
                                  decision.targets[i].fanin))


def gate_level_heuristic_policy() -> BacktracePolicy:
    return _GateHeuristic()


def ffr_level_heuristic_policy() -> BacktracePolicy:
    return _FfrHeuristic()


class PodemSearch:
    """Single-fault PODEM search owning all mutable state."""

    def __init__(self, netlist: Netlist, fault: FaultSite, backtrack_limit: int | None = 100,
                 scoap: Scoap | None = None, ffr_partition: FfrPartition | None = None):
        fault.validate(netlist)
        if backtrack_limit is not None and backtrack_limit < 1:
            raise ValueError("backtrack_limit must be >= 1 (or None for unlimited)")
        self.netlist = netlist
        self.fault = fault
        self.limit = backtrack_limit
        self.scoap = scoap if scoap is not None else compute_scoap(netlist)
        self.part = ffr_partition
        self.state = CircuitState(netlist, fault)
        self.status: str | None = None
        self.backtracks = 0
        self.backtrace_steps = 0
        self.decisions = 0
        self.pi_visits: dict[int, int] = {}
        self.pi_backtracks: dict[int, int] = {}
        self._owner: int | None = None  # PI charged for backtracks until the next walk
        if not netlist.reaches_po[fault.gate]:
            # dead logic: no observation point is structurally reachable
            self.status = UNTESTABLE

    # -- bookkeeping ---------------------------------------------------------

    def _assign(self, pi: int, value: int) -> None:
        self.state.decision_stack.append((pi, value, False))
        self.state.assign(pi, value)
        self.decisions += 1
        self.pi_visits[pi] = self.pi_visits.get(pi, 0) + 1
        self._owner = pi

    def _count_backtrack(self) -> bool:
        """False when the next backtrack would exceed the limit (sets ABORTED)."""
        if self.limit is not None and self.backtracks >= self.limit:
            self.status = ABORTED
            return False
        self.backtracks += 1
        if self._owner is not None:
            self.pi_backtracks[self._owner] = self.pi_backtracks.get(self._owner, 0) + 1
        return True

    def _backtrack(self) -> bool:
        """Flip the most recent untried decision, popping exhausted ones.

        Every flip and every pop counts as one backtrack.  Returns False when
        the search ends here (stack exhausted -> UNTESTABLE, or limit hit).
        """
        stack = self.state.decision_stack
        while stack:
            pi, value, tried = stack[-1]
            if not self._count_backtrack():
                return False
            if tried:
                stack.pop()
                self.state.pi_vals[pi] = 2
            else:
                stack[-1] = (pi, 1 - value, True)
                self.state.pi_vals[pi] = 1 - value
                self.state.resweep()
                return True
        self.status = UNTESTABLE
        return False

    # -- objective selection ---------------------------------------------------

    def _site_net(self) -> int:
        f = self.fault
        return f.gate if f.pin == OUTPUT_PIN else self.netlist.fanins[f.gate][f.pin]

    def _objective(self) -> tuple[int, int] | None:
        """Next (gate, value) objective, or None on a dead end."""
        nl = self.netlist
        values = self.state.values
        site = self._site_net()
        good = GOOD[int(values[site])]
        if good == self.fault.stuck:
            return None  # fault can no longer be activated on this branch
        if good == 2:
            return (site, 1 - self.fault.stuck)
        # activated: drive the frontier toward an observation point
        alive = [g for g in self.state.d_frontier if self._xpath_ok(g)]
        if not alive:
            return None
        co = self.scoap.co
        gate = min(alive, key=lambda g: (int(co[g]), g))
        kind = GateKind(int(nl.kinds[gate]))
        objective_value = NONCONTROLLING.get(kind, 0)
        for s in nl.fanins[gate]:
            if values[s] == X:
                return (int(s), objective_value)
        raise AssertionError("D-frontier gate without an X input")

    def _xpath_ok(self, gate: int) -> bool:
        nl = self.netlist
        values = self.state.values
        if nl.is_po[gate]:
            return True
        seen = {gate}
        stack = [gate]
        while stack:
            u = stack.pop()
            for w in nl.fanouts[u]:
                if w in seen or values[w] != X:
                    continue
                if nl.is_po[w]:
                    return True
                seen.add(w)
                stack.append(w)
        return False

    def _advance(self) -> tuple[int, int] | None:
        """Drive checks/backtracking to the next objective; None when finished."""
        while self.status is None:
            if self.state.detected():
                self.status = DETECTED
                return None
            obj = self._objective()
            if obj is not None:
                return obj
            if not self._backtrack():
                return None
        return None

    # -- walks -----------------------------------------------------------------

    def _gate_walk(self, gate: int, want: int, policy: BacktracePolicy) -> None:
        nl = self.netlist
        values = self.state.values
        steps = 0
        while nl.kinds[gate] != GateKind.INPUT:
            u = backtrace_input_value(GateKind(int(nl.kinds[gate])), want)
            candidates = [s for s in nl.fanins[gate] if values[s] == X]
            if not candidates:
                raise AssertionError("backtrace reached a gate with no X fanin")
            gate = policy.choose_fanin(nl, values, gate, want, candidates)
            want = u
            steps += 1
        self.backtrace_steps += max(1, steps)
        self._assign(int(gate), want)

    def decisions_iter(self):
        """Generator over FFR-hop decision points.

        Yields :class:`FfrDecision` and must be sent a target index from the
        decision's ``valid`` set.  Runs to completion (use :meth:`result`).
        Walks whose objective already sits on a PI are resolved internally.
        """
        if self.part is None:
            self.part = partition(self.netlist)
        nl = self.netlist
        while True:
            obj = self._advance()
            if obj is None:
                return
            gate, want = obj
            hops = 0
            while nl.kinds[gate] != GateKind.INPUT:
                ffr = self.part.of_gate(gate)
                targets = tuple(self.part.backtrace_targets(ffr, (gate, want),
                                                            self.state.values))
                valid = tuple(i for i, t in enumerate(targets)
                              if t.in_cone and self.state.values[t.fanin] == X)
                if not valid:
                    raise AssertionError("FFR hop with no X-valued cone fanin")
                choice = yield FfrDecision(gate, want, ffr, targets, valid)
                if choice not in valid:
                    raise ValueError(f"chosen target index {choice} is not valid")
                t = targets[choice]
                gate, want = t.fanin, t.required_value
                hops += 1
            self.backtrace_steps += max(1, hops)
            self._assign(int(gate), want)

    # -- drivers -----------------------------------------------------------------

    def run(self, policy: BacktracePolicy) -> AtpgResult:
        if self.status is None:
            if policy.mode == "gate":
                while True:
                    obj = self._advance()
                    if obj is None:
                        break
                    self._gate_walk(obj[0], obj[1], policy)
            else:
                gen = self.decisions_iter()
                try:
                    decision = next(gen)
                    while True:
                        decision = gen.send(
                            policy.choose_target(self.netlist, self.state.values, decision))
                except StopIteration:
                    pass
        return self.result()

    def result(self) -> AtpgResult:
        if self.status is None:
            raise RuntimeError("search has not terminated")
        pattern = None
        if self.status == DETECTED:
            # X inputs cannot disturb a justified D at an output; fill with 0
            pattern = {int(p): (int(self.state.pi_vals[p]) if self.state.pi_vals[p] != 2 else 0)
                       for p in self.netlist.all_inputs}
        return AtpgResult(
            fault=self.fault,
            status=self.status,
            pattern=pattern,
            backtracks=self.backtracks,
            backtrace_steps=self.backtrace_steps,
            decisions=self.decisions,
            pi_visits=dict(self.pi_visits),
            pi_backtracks=dict(self.pi_backtracks),
        )


def generate_test(netlist: Netlist, fault: FaultSite, policy: BacktracePolicy,
                  backtrack_limit: int | None = 100, scoap: Scoap | None = None,
                  ffr_partition: FfrPartition | None = None,
                  verify: bool = True) -> AtpgResult:
    """Run one PODEM search; DETECTED results are confirmed by fault_simulate."""
    search = PodemSearch(netlist, fault, backtrack_limit, scoap, ffr_partition)
    result = search.run(policy)
    if verify and result.status == DETECTED:
        if not fault_simulate(netlist, result.pattern, fault):
            raise AssertionError(
                f"unsound pattern for {format_fault(netlist, fault)}: "
                f"{result.pattern_str(netlist)}")
    return result


# -- fault-list runs -------------------------------------------------------------

_FORK_CTX: dict = {}


def _run_chunk(args):
    lo, hi = args
    nl = _FORK_CTX["netlist"]
    return [generate_test(nl, f, _FORK_CTX["policy"], _FORK_CTX["limit"],
                          _FORK_CTX["scoap"], _FORK_CTX["part"])
            for f in _FORK_CTX["faults"][lo:hi]]


def run_fault_list(netlist: Netlist, faults: list[FaultSite], policy: BacktracePolicy,
                   backtrack_limit: int | None = 100, parallelism: int = 1,
                   ) -> tuple[list[AtpgResult], RunMetrics]:
    """Process faults independently; metrics merge in fault-list order."""
    scoap = compute_scoap(netlist)
    part = partition(netlist) if policy.mode != "gate" else None
    results: list[AtpgResult]
    if parallelism <= 1 or len(faults) < 2 * parallelism:
        results = [generate_test(netlist, f, policy, backtrack_limit, scoap, part)
                   for f in faults]
    else:
        import multiprocessing as mp

        _FORK_CTX.update(netlist=netlist, policy=policy, limit=backtrack_limit,
                         scoap=scoap, part=part, faults=faults)
        step = max(1, (len(faults) + parallelism - 1) // parallelism)
        chunks = [(lo, min(lo + step, len(faults))) for lo in range(0, len(faults), step)]
        with mp.get_context("fork").Pool(parallelism) as pool:
            results = [r for chunk in pool.map(_run_chunk, chunks) for r in chunk]
        _FORK_CTX.clear()
    metrics = RunMetrics()
    for r in results:
        metrics.add(r)
    return results, metrics
