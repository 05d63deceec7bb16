"""ISCAS-style bench netlist parsing, validation, levelization and scan transform.

The parser accepts the classic ISCAS-89 syntax::

    # comment
    INPUT(a)
    OUTPUT(y)
    y = NAND(a, b)

Gate keywords are case-insensitive, whitespace is free-form, and signal
names are case-sensitive.  Sequential circuits are handled with the
full-scan assumption: every DFF is split at parse time, its output
becoming a pseudo primary input and its data input a pseudo primary
output, which leaves a purely combinational graph.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

__all__ = [
    "GateKind",
    "Gate",
    "Netlist",
    "BenchError",
    "parse_bench",
    "parse_bench_file",
    "emit_bench",
    "levelize",
]


class GateKind(IntEnum):
    INPUT = 0
    AND = 1
    NAND = 2
    OR = 3
    NOR = 4
    NOT = 5
    BUF = 6
    XOR = 7
    XNOR = 8
    DFF = 9


# Gate kinds whose output inverts the steered input during backtrace.
INVERTING = frozenset({GateKind.NAND, GateKind.NOR, GateKind.NOT, GateKind.XNOR})

_KIND_BY_NAME = {k.name: k for k in GateKind}
_KIND_BY_NAME["INV"] = GateKind.NOT
_KIND_BY_NAME["BUFF"] = GateKind.BUF
_KIND_BY_NAME["BUFFER"] = GateKind.BUF


class BenchError(ValueError):
    """Raised on syntax or semantic errors in a bench netlist."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Gate:
    id: int
    kind: GateKind
    fanins: tuple[int, ...]
    fanouts: tuple[int, ...]
    level: int
    is_po: bool


@dataclass
class Netlist:
    """Immutable levelized gate graph with dense integer ids.

    ``primary_inputs``/``primary_outputs`` keep the declaration order of the
    source file; pseudo inputs/outputs created by the scan transform follow
    in file order.  ``topo_order`` is stable: ascending level, then id.
    """

    name: str
    names: list[str]
    kinds: np.ndarray            # int8, GateKind codes
    fanins: tuple[tuple[int, ...], ...]
    fanouts: tuple[tuple[int, ...], ...]
    levels: np.ndarray           # int32
    topo_order: np.ndarray       # int32
    primary_inputs: list[int]
    primary_outputs: list[int]
    pseudo_inputs: list[int]     # scan-split DFF outputs
    pseudo_outputs: list[int]    # gates driving a DFF data pin
    is_po: np.ndarray            # bool, true at primary and pseudo outputs
    reaches_po: np.ndarray       # bool, false marks dead logic
    dff_count: int = 0
    # flat CSR copies of the fanin/fanout lists for the sweep kernels
    fanin_off: np.ndarray = field(default=None, repr=False)
    fanin_flat: np.ndarray = field(default=None, repr=False)
    fanout_off: np.ndarray = field(default=None, repr=False)
    fanout_flat: np.ndarray = field(default=None, repr=False)
    _name_to_id: dict[str, int] = field(default=None, repr=False)

    def __post_init__(self):
        if self._name_to_id is None:
            self._name_to_id = {n: i for i, n in enumerate(self.names)}
        if self.fanin_off is None:
            self.fanin_off, self.fanin_flat = _csr(self.fanins)
            self.fanout_off, self.fanout_flat = _csr(self.fanouts)

    def __len__(self) -> int:
        return len(self.names)

    @property
    def num_gates(self) -> int:
        return len(self.names)

    @property
    def num_logic_gates(self) -> int:
        return int(np.sum(self.kinds != GateKind.INPUT))

    @property
    def all_inputs(self) -> list[int]:
        """True plus pseudo primary inputs - the assignable universe."""
        return self.primary_inputs + self.pseudo_inputs

    @property
    def all_outputs(self) -> list[int]:
        """True plus pseudo primary outputs - the observation points."""
        return self.primary_outputs + self.pseudo_outputs

    @property
    def max_level(self) -> int:
        return int(self.levels.max()) if len(self.levels) else 0

    def id_of(self, name: str) -> int:
        try:
            return self._name_to_id[name]
        except KeyError:
            raise BenchError(f"unknown signal name {name!r}") from None

    def gate(self, gid: int) -> Gate:
        return Gate(
            id=gid,
            kind=GateKind(int(self.kinds[gid])),
            fanins=self.fanins[gid],
            fanouts=self.fanouts[gid],
            level=int(self.levels[gid]),
            is_po=bool(self.is_po[gid]),
        )


def _csr(lists: tuple[tuple[int, ...], ...]) -> tuple[np.ndarray, np.ndarray]:
    off = np.zeros(len(lists) + 1, dtype=np.int32)
    for i, l in enumerate(lists):
        off[i + 1] = off[i] + len(l)
    flat = np.fromiter((g for l in lists for g in l), dtype=np.int32, count=int(off[-1]))
    return off, flat


_LINE_RE = re.compile(
    r"""^\s*(?:
        (?P<io>INPUT|OUTPUT)\s*\(\s*(?P<io_name>[^\s(),=#]+)\s*\)
      | (?P<lhs>[^\s(),=#]+)\s*=\s*(?P<kind>[A-Za-z][A-Za-z0-9_]*)\s*\(\s*(?P<args>[^()=#]*)\)
    )\s*$""",
    re.IGNORECASE | re.VERBOSE,
)


def parse_bench(text: str, name: str = "netlist") -> Netlist:
    """Parse bench text into a validated, levelized :class:`Netlist`.

    DFFs are split per the full-scan transform.  Raises :class:`BenchError`
    on syntax errors, undefined or duplicate signals, arity violations and
    combinational cycles.
    """
    inputs: list[str] = []
    outputs: list[str] = []
    defs: dict[str, tuple[GateKind, list[str], int]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE_RE.match(line)
        if m is None:
            col = len(raw) - len(raw.lstrip()) + 1
            raise BenchError(f"syntax error at column {col}: {line!r}", lineno)
        if m.group("io"):
            target = inputs if m.group("io").upper() == "INPUT" else outputs
            target.append(m.group("io_name"))
            continue
        lhs = m.group("lhs")
        kind_name = m.group("kind").upper()
        kind = _KIND_BY_NAME.get(kind_name)
        if kind is None or kind is GateKind.INPUT:
            raise BenchError(f"unknown gate keyword {kind_name!r}", lineno)
        args = [a.strip() for a in m.group("args").split(",") if a.strip()]
        if lhs in defs:
            raise BenchError(f"duplicate definition of {lhs!r}", lineno)
        if lhs in inputs:
            raise BenchError(f"{lhs!r} defined both as INPUT and as a gate", lineno)
        _check_arity(kind, len(args), lhs, lineno)
        defs[lhs] = (kind, args, lineno)

    for pi in inputs:
        if inputs.count(pi) > 1:
            raise BenchError(f"duplicate INPUT declaration {pi!r}")

    # Scan transform: a DFF's output becomes a pseudo-PI, its data input a
    # pseudo-PO observation point.
    pseudo_in_names: list[str] = []
    pseudo_out_names: list[str] = []
    dff_count = 0
    for lhs, (kind, args, lineno) in list(defs.items()):
        if kind is GateKind.DFF:
            dff_count += 1
            pseudo_in_names.append(lhs)
            pseudo_out_names.append(args[0])
            del defs[lhs]

    names = list(inputs) + pseudo_in_names + list(defs.keys())
    name_to_id = {}
    for n in names:
        if n in name_to_id:
            raise BenchError(f"duplicate definition of {n!r}")
        name_to_id[n] = len(name_to_id)

    n = len(names)
    kinds = np.zeros(n, dtype=np.int8)
    fanins: list[tuple[int, ...]] = [()] * n
    fanouts: list[list[int]] = [[] for _ in range(n)]

    for lhs, (kind, args, lineno) in defs.items():
        gid = name_to_id[lhs]
        kinds[gid] = int(kind)
        fi = []
        for a in args:
            if a not in name_to_id:
                raise BenchError(f"undefined signal {a!r} referenced by {lhs!r}", lineno)
            fi.append(name_to_id[a])
        fanins[gid] = tuple(fi)
        for src in fi:
            fanouts[src].append(gid)

    for po in outputs:
        if po not in name_to_id:
            raise BenchError(f"OUTPUT({po}) references an undefined signal")
    for ppo in pseudo_out_names:
        if ppo not in name_to_id:
            raise BenchError(f"DFF data input {ppo!r} is undefined")

    is_po = np.zeros(n, dtype=bool)
    primary_outputs = [name_to_id[o] for o in outputs]
    pseudo_outputs = []
    seen = set()
    for ppo in pseudo_out_names:
        gid = name_to_id[ppo]
        if gid not in seen:
            seen.add(gid)
            pseudo_outputs.append(gid)
    is_po[primary_outputs] = True
    is_po[pseudo_outputs] = True

    levels, topo = _levelize_arrays(kinds, fanins, names)

    reaches = np.array(is_po)
    for gid in topo[::-1]:
        if reaches[gid]:
            for src in fanins[gid]:
                reaches[src] = True

    nl = Netlist(
        name=name,
        names=names,
        kinds=kinds,
        fanins=tuple(fanins),
        fanouts=tuple(tuple(f) for f in fanouts),
        levels=levels,
        topo_order=topo,
        primary_inputs=[name_to_id[i] for i in inputs],
        primary_outputs=primary_outputs,
        pseudo_inputs=[name_to_id[i] for i in pseudo_in_names],
        pseudo_outputs=pseudo_outputs,
        is_po=is_po,
        reaches_po=reaches,
        dff_count=dff_count,
    )
    return nl


def _check_arity(kind: GateKind, arity: int, lhs: str, lineno: int) -> None:
    if kind in (GateKind.NOT, GateKind.BUF, GateKind.DFF):
        if arity != 1:
            raise BenchError(f"{kind.name} gate {lhs!r} needs exactly 1 input, got {arity}", lineno)
    elif arity < 2:
        raise BenchError(f"{kind.name} gate {lhs!r} needs at least 2 inputs, got {arity}", lineno)


def _levelize_arrays(kinds, fanins, names) -> tuple[np.ndarray, np.ndarray]:
    n = len(names)
    indeg = np.zeros(n, dtype=np.int64)
    fanout_tmp: list[list[int]] = [[] for _ in range(n)]
    for gid in range(n):
        indeg[gid] = len(fanins[gid])
        for src in fanins[gid]:
            fanout_tmp[src].append(gid)
    levels = np.zeros(n, dtype=np.int32)
    ready = [g for g in range(n) if indeg[g] == 0]
    order = []
    while ready:
        # Stable order: process lowest id at each level first.
        ready.sort()
        nxt = []
        for gid in ready:
            order.append(gid)
            for out in fanout_tmp[gid]:
                if levels[out] <= levels[gid]:
                    levels[out] = levels[gid] + 1
                indeg[out] -= 1
                if indeg[out] == 0:
                    nxt.append(out)
        ready = nxt
    if len(order) != n:
        stuck = [names[g] for g in range(n) if indeg[g] > 0][:5]
        raise BenchError(f"combinational cycle involving {stuck}")
    topo = np.array(sorted(range(n), key=lambda g: (int(levels[g]), g)), dtype=np.int32)
    return levels, topo


def levelize(netlist: Netlist) -> Netlist:
    """Recompute levels and the stable topological order in place."""
    levels, topo = _levelize_arrays(netlist.kinds, netlist.fanins, netlist.names)
    netlist.levels = levels
    netlist.topo_order = topo
    return netlist


def parse_bench_file(path: str) -> Netlist:
    import os

    with open(path) as f:
        text = f.read()
    return parse_bench(text, name=os.path.splitext(os.path.basename(path))[0])


def emit_bench(netlist: Netlist) -> str:
    """Serialize back to bench text (post-scan view: pseudo ports are real ports)."""
    lines = [f"# {netlist.name}"]
    for gid in netlist.primary_inputs + netlist.pseudo_inputs:
        lines.append(f"INPUT({netlist.names[gid]})")
    for gid in netlist.primary_outputs + netlist.pseudo_outputs:
        lines.append(f"OUTPUT({netlist.names[gid]})")
    for gid in netlist.topo_order:
        kind = GateKind(int(netlist.kinds[gid]))
        if kind is GateKind.INPUT:
            continue
        args = ", ".join(netlist.names[s] for s in netlist.fanins[gid])
        lines.append(f"{netlist.names[gid]} = {kind.name}({args})")
    return "\n".join(lines) + "\n"
