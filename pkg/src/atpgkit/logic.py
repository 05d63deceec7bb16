"""Five-valued D-calculus: value codes, projections, and gate evaluation.

A value is one of ZERO, ONE, X, D, DBAR.  D means good-circuit 1 / faulty 0,
DBAR the converse.  Evaluation projects every input onto its (good, faulty)
3-valued pair, evaluates both Boolean copies, and re-encodes; the result is
X whenever either projection is unknown.
"""

from __future__ import annotations

from enum import IntEnum

from .bench import GateKind

__all__ = ["LogicValue", "ZERO", "ONE", "X", "D", "DBAR", "good_value", "faulty_value",
           "encode", "eval3", "eval_gate", "CONTROLLING", "NONCONTROLLING"]


class LogicValue(IntEnum):
    ZERO = 0
    ONE = 1
    X = 2
    D = 3
    DBAR = 4


ZERO, ONE, X, D, DBAR = LogicValue

# 3-valued projections (0, 1, 2=unknown), indexable by value code.
GOOD = (0, 1, 2, 1, 0)
FAULTY = (0, 1, 2, 0, 1)

# encode[good3][faulty3] -> 5-valued code; unknown in either copy gives X.
_ENCODE = (
    (0, 4, 2),
    (3, 1, 2),
    (2, 2, 2),
)

# Controlling input value per kind (None: no controlling value).
CONTROLLING = {
    GateKind.AND: 0,
    GateKind.NAND: 0,
    GateKind.OR: 1,
    GateKind.NOR: 1,
}
NONCONTROLLING = {k: 1 - v for k, v in CONTROLLING.items()}


def good_value(v: int) -> int:
    """Good-circuit projection: 0, 1 or 2 (unknown)."""
    return GOOD[v]


def faulty_value(v: int) -> int:
    """Faulty-circuit projection: 0, 1 or 2 (unknown)."""
    return FAULTY[v]


def encode(good3: int, faulty3: int) -> int:
    return _ENCODE[good3][faulty3]


def eval3(kind: int, values3) -> int:
    """3-valued Boolean evaluation over one circuit copy.

    XOR/XNOR are n-ary with left-fold semantics; the fold of 2-input XNORs
    collapses to parity(inputs) xor ((n-1) & 1).
    """
    if kind == GateKind.AND or kind == GateKind.NAND:
        out = 1
        for v in values3:
            if v == 0:
                out = 0
                break
            if v == 2:
                out = 2
        if kind == GateKind.NAND and out != 2:
            out = 1 - out
        return out
    if kind == GateKind.OR or kind == GateKind.NOR:
        out = 0
        for v in values3:
            if v == 1:
                out = 1
                break
            if v == 2:
                out = 2
        if kind == GateKind.NOR and out != 2:
            out = 1 - out
        return out
    if kind == GateKind.NOT:
        v = values3[0]
        return v if v == 2 else 1 - v
    if kind == GateKind.BUF or kind == GateKind.DFF or kind == GateKind.INPUT:
        return values3[0]
    if kind == GateKind.XOR or kind == GateKind.XNOR:
        parity = 0
        n = 0
        for v in values3:
            if v == 2:
                return 2
            parity ^= v
            n += 1
        if kind == GateKind.XNOR:
            parity ^= (n - 1) & 1
        return parity
    raise ValueError(f"cannot evaluate gate kind {kind}")


def eval_gate(kind: int, inputs) -> int:
    """5-valued gate evaluation via good/faulty projection pairs."""
    kind = GateKind(kind)
    n = len(inputs)
    if kind in (GateKind.NOT, GateKind.BUF, GateKind.DFF):
        if n != 1:
            raise ValueError(f"{kind.name} takes exactly 1 input, got {n}")
    elif kind is GateKind.INPUT:
        raise ValueError("INPUT gates have no inputs to evaluate")
    elif n < 2:
        raise ValueError(f"{kind.name} takes at least 2 inputs, got {n}")
    g = eval3(kind, [GOOD[v] for v in inputs])
    f = eval3(kind, [FAULTY[v] for v in inputs])
    return _ENCODE[g][f]
