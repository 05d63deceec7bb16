"""Pin-level stuck-at fault sites, universe enumeration, and the fault-list file format.

One fault per line: ``<gate-name> <OUT|IN:k> <SA0|SA1>``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bench import GateKind, Netlist

__all__ = ["FaultSite", "enumerate_faults", "collapse_faults",
           "format_fault", "parse_fault_line", "write_fault_list", "read_fault_list"]

OUTPUT_PIN = -1


@dataclass(frozen=True, order=True)
class FaultSite:
    """A stuck-at fault on a gate pin; pin -1 is the output, k >= 0 the k-th fanin."""

    gate: int
    pin: int
    stuck: int

    def validate(self, netlist: Netlist) -> None:
        if not (0 <= self.gate < len(netlist)):
            raise ValueError(f"fault gate id {self.gate} out of range")
        if self.stuck not in (0, 1):
            raise ValueError(f"stuck value must be 0 or 1, got {self.stuck}")
        arity = len(netlist.fanins[self.gate])
        if self.pin != OUTPUT_PIN and not (0 <= self.pin < arity):
            raise ValueError(
                f"pin {self.pin} out of range for gate {netlist.names[self.gate]!r} (arity {arity})"
            )


def enumerate_faults(netlist: Netlist, prune_dead: bool = False) -> list[FaultSite]:
    """Full pin-level universe: output SA0/SA1 plus per-fanin-pin SA0/SA1 for every gate.

    Dead-logic gates are included by default (their faults are untestable by
    structure); ``prune_dead`` drops them.
    """
    out: list[FaultSite] = []
    for gid in range(len(netlist)):
        if prune_dead and not netlist.reaches_po[gid]:
            continue
        for stuck in (0, 1):
            out.append(FaultSite(gid, OUTPUT_PIN, stuck))
        for pin in range(len(netlist.fanins[gid])):
            for stuck in (0, 1):
                out.append(FaultSite(gid, pin, stuck))
    return out


def collapse_faults(netlist: Netlist, faults: list[FaultSite]) -> list[FaultSite]:
    """Standard gate-local equivalence collapsing.

    An input stuck at the controlling value is equivalent to the output stuck
    at the corresponding response (AND: in-SA0 == out-SA0; NAND: in-SA0 ==
    out-SA1; OR/NOR dually); both NOT/BUF input faults fold onto the output.
    The output-pin representative is kept.
    """
    dropped = set()
    for f in faults:
        if f.pin == OUTPUT_PIN:
            continue
        kind = GateKind(int(netlist.kinds[f.gate]))
        if kind in (GateKind.AND, GateKind.NAND) and f.stuck == 0:
            dropped.add(f)
        elif kind in (GateKind.OR, GateKind.NOR) and f.stuck == 1:
            dropped.add(f)
        elif kind in (GateKind.NOT, GateKind.BUF):
            dropped.add(f)
    return [f for f in faults if f not in dropped]


def format_fault(netlist: Netlist, fault: FaultSite) -> str:
    pin = "OUT" if fault.pin == OUTPUT_PIN else f"IN:{fault.pin}"
    return f"{netlist.names[fault.gate]} {pin} SA{fault.stuck}"


def parse_fault_line(netlist: Netlist, line: str) -> FaultSite:
    parts = line.split()
    if len(parts) != 3:
        raise ValueError(f"malformed fault line {line!r} (want '<gate> <OUT|IN:k> <SA0|SA1>')")
    name, pin_s, sa = parts
    gid = netlist.id_of(name)
    pin_s = pin_s.upper()
    if pin_s == "OUT":
        pin = OUTPUT_PIN
    elif pin_s.startswith("IN:"):
        pin = int(pin_s[3:])
    else:
        raise ValueError(f"bad pin spec {pin_s!r} in fault line {line!r}")
    sa = sa.upper()
    if sa not in ("SA0", "SA1"):
        raise ValueError(f"bad stuck value {sa!r} in fault line {line!r}")
    fault = FaultSite(gid, pin, int(sa[2]))
    fault.validate(netlist)
    return fault


def write_fault_list(netlist: Netlist, faults: list[FaultSite], path: str) -> None:
    with open(path, "w") as f:
        for fault in faults:
            f.write(format_fault(netlist, fault) + "\n")


def read_fault_list(netlist: Netlist, path: str) -> list[FaultSite]:
    faults = []
    with open(path) as f:
        for raw in f:
            line = raw.split("#", 1)[0].strip()
            if line:
                faults.append(parse_fault_line(netlist, line))
    return faults
