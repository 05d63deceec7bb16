"""Episodic MDP over PODEM-with-FFR-backtrace.

One episode is one fault.  Actions pick a boundary fanin of the FFR holding
the current objective gate; the engine advances between decision points, so
backtracking, auto-resolved objectives that already sit on a PI, and
termination all happen inside a step.  Rewards follow the piecewise scheme:

    -0.1                     hop that does not reach a PI
    10 - l1 * exp(l2 * N)    hop that assigns a PI, N = visits + backtracks
                             charged to that PI (both per-episode)
    +100                     episode ends DETECTED or UNTESTABLE
    -100                     episode ends ABORTED (backtrack limit)

The environment is deterministic given (netlist, fault, action sequence);
the seed is recorded for transcript bookkeeping only.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .bench import GateKind, Netlist
from .faults import FaultSite
from .features import FeatureExtractor
from .ffr import partition
from .logic import X
from .podem import ABORTED, FfrDecision, PodemSearch
from .scoap import compute_scoap

__all__ = ["LAMBDA1", "LAMBDA2", "STEP_PENALTY", "TERMINAL_SUCCESS", "TERMINAL_FAILURE",
           "pi_reach_reward", "Observation", "EnvError", "AtpgEnv"]

log = logging.getLogger(__name__)

LAMBDA1 = 7.5
LAMBDA2 = 0.07
STEP_PENALTY = -0.1
TERMINAL_SUCCESS = 100.0   # test found or proven untestable
TERMINAL_FAILURE = -100.0  # over the backtrack limit


def pi_reach_reward(n: int, lam1: float = LAMBDA1, lam2: float = LAMBDA2) -> float:
    """Reward for a hop that assigns a PI whose combined counter is ``n``.

    The assignment itself increments the visit counter first, so a clean
    first visit evaluates at n=1; backtracks charged to the PI inside the
    step's window raise ``n`` further.  This is the single place the
    formula and its counter accounting live.
    """
    return 10.0 - lam1 * math.exp(lam2 * n)


@dataclass
class Observation:
    nodes: list[tuple[int, list[float]]]
    edges: list[tuple[int, int]]
    action_mask: list[bool]
    action_targets: list[int]

    def to_json(self) -> dict:
        return {
            "nodes": [[g, f] for g, f in self.nodes],
            "edges": [[a, b] for a, b in self.edges],
            "mask": list(self.action_mask),
            "targets": list(self.action_targets),
        }


class EnvError(ValueError):
    """Protocol-level misuse: invalid action, no active episode, bad fault."""


class AtpgEnv:
    """One netlist, many episodes; per-episode engine state is isolated."""

    def __init__(self, netlist: Netlist, action_arity: int = 16,
                 backtrack_limit: int | None = 100):
        if action_arity < 1:
            raise ValueError("action_arity must be >= 1")
        self.netlist = netlist
        self.K = action_arity
        self.backtrack_limit = backtrack_limit
        self.scoap = compute_scoap(netlist)
        self.part = partition(netlist)
        self.features = FeatureExtractor(netlist, self.scoap)
        self._search: PodemSearch | None = None
        self._gen = None
        self._decision: FfrDecision | None = None
        self.seed: int | None = None
        self.truncated_decisions = 0
        self.reward_total = 0.0
        self.episode_steps = 0

    # -- episode control -----------------------------------------------------

    def reset(self, fault: FaultSite, seed: int | None = None
              ) -> tuple[Observation | None, bool, str | None]:
        """Start an episode; returns (obs, done, status).  done at reset means
        the fault resolved without any decision point."""
        fault.validate(self.netlist)
        self.seed = seed
        self.truncated_decisions = 0
        self.reward_total = 0.0
        self.episode_steps = 0
        self._search = PodemSearch(self.netlist, fault, self.backtrack_limit,
                                   self.scoap, self.part)
        self._gen = self._search.decisions_iter()
        return self._advance_to_decision(first=True)

    def _advance_to_decision(self, first: bool = False, send=None
                             ) -> tuple[Observation | None, bool, str | None]:
        """Run the engine to the next presentable decision point or the end."""
        gen = self._gen
        try:
            decision = next(gen) if first else gen.send(send)
            while not self._presentable(decision):
                # every valid fanin was truncated away by the unified action
                # arity: auto-resolve this hop with the heuristic rule
                self.truncated_decisions += 1
                log.warning("FFR at gate %s has no valid fanin among the %d lowest-id "
                            "targets; auto-resolving (raise action_arity)",
                            self.netlist.names[decision.gate], self.K)
                choice = min(decision.valid,
                             key=lambda i: (int(self.netlist.levels[decision.targets[i].fanin]),
                                            decision.targets[i].fanin))
                decision = gen.send(choice)
        except StopIteration:
            self._decision = None
            return None, True, self._search.status
        self._decision = decision
        return self._observe(decision), False, None

    def _presentable(self, decision: FfrDecision) -> bool:
        return any(i < self.K for i in decision.valid)

    def step(self, action: int) -> tuple[float, Observation | None, bool, str | None]:
        """Apply one FFR hop; returns (reward, obs, done, status)."""
        decision = self._decision
        if self._search is None or self._gen is None:
            raise EnvError("no active episode")
        if decision is None:
            raise EnvError("episode is over; reset first")
        if not isinstance(action, int) or not (0 <= action < self.K):
            raise EnvError(f"action {action!r} outside [0, {self.K})")
        if action >= len(decision.targets) or action not in decision.valid:
            raise EnvError(f"action {action} is masked")

        target = decision.targets[action]
        reaches_pi = self.netlist.kinds[target.fanin] == GateKind.INPUT
        pi = int(target.fanin) if reaches_pi else None

        obs, done, status = self._advance_to_decision(send=action)
        if done:
            reward = TERMINAL_FAILURE if status == ABORTED else TERMINAL_SUCCESS
        elif reaches_pi:
            n = self._search.pi_visits.get(pi, 0) + self._search.pi_backtracks.get(pi, 0)
            reward = pi_reach_reward(n)
        else:
            reward = STEP_PENALTY
        self.reward_total += reward
        self.episode_steps += 1
        return reward, obs, done, status

    # -- observation ----------------------------------------------------------

    def _observe(self, decision: FfrDecision) -> Observation:
        nl = self.netlist
        ffr = decision.ffr
        node_ids = sorted(ffr.members | set(ffr.boundary_fanins))
        node_set = set(node_ids)
        objective = (decision.gate, decision.value)
        values = self._search.state.values
        nodes = [(g, self.features.node_features(g, values, objective)) for g in node_ids]
        edges = sorted((int(s), int(m)) for m in ffr.members
                       for s in nl.fanins[m] if s in node_set)
        targets = [t.fanin for t in decision.targets[:self.K]]
        mask = [i in decision.valid for i in range(len(targets))]
        if len(decision.targets) > self.K:
            self.truncated_decisions += 1
            log.warning("FFR headed by %s exposes %d of %d boundary fanins",
                        nl.names[ffr.head], self.K, len(decision.targets))
        return Observation(nodes, edges, mask, targets)

    # -- reporting --------------------------------------------------------------

    def metrics(self) -> dict:
        if self._search is None:
            raise EnvError("no active episode")
        s = self._search
        names = self.netlist.names
        return {
            "status": s.status,
            "backtracks": s.backtracks,
            "backtrace_steps": s.backtrace_steps,
            "decisions": s.decisions,
            "episode_steps": self.episode_steps,
            "reward_total": round(self.reward_total, 9),
            "truncated_decisions": self.truncated_decisions,
            "pi_visits": {names[p]: c for p, c in sorted(s.pi_visits.items())},
            "pi_backtracks": {names[p]: c for p, c in sorted(s.pi_backtracks.items())},
        }

    def result(self):
        if self._search is None or self._search.status is None:
            raise EnvError("episode has not terminated")
        return self._search.result()
