"""Pure-Python forward-implication sweep; reference semantics for the Cython kernel."""

from __future__ import annotations

BACKEND_NAME = "pure"

# GateKind codes (kept in sync with bench.GateKind; duplicated so the kernel
# module has no package imports, mirroring the compiled extension).
_INPUT, _AND, _NAND, _OR, _NOR, _NOT, _BUF, _XOR, _XNOR, _DFF = range(10)

_GOOD = (0, 1, 2, 1, 0)
_FAULTY = (0, 1, 2, 0, 1)
_ENC = ((0, 4, 2), (3, 1, 2), (2, 2, 2))


def _eval3(kind: int, vals: list[int]) -> int:
    if kind == _AND or kind == _NAND:
        out = 1
        for v in vals:
            if v == 0:
                out = 0
                break
            if v == 2:
                out = 2
        if kind == _NAND and out != 2:
            out = 1 - out
        return out
    if kind == _OR or kind == _NOR:
        out = 0
        for v in vals:
            if v == 1:
                out = 1
                break
            if v == 2:
                out = 2
        if kind == _NOR and out != 2:
            out = 1 - out
        return out
    if kind == _NOT:
        v = vals[0]
        return v if v == 2 else 1 - v
    if kind == _BUF or kind == _DFF:
        return vals[0]
    # XOR / XNOR, left-fold n-ary semantics
    parity = 0
    n = 0
    for v in vals:
        if v == 2:
            return 2
        parity ^= v
        n += 1
    if kind == _XNOR:
        parity ^= (n - 1) & 1
    return parity


def full_sweep(kinds, fanin_off, fanin_flat, topo, pi_vals, values,
               fault_gate: int, fault_pin: int, fault_stuck: int, frontier) -> int:
    """Evaluate every gate in topological order under one injected fault.

    ``pi_vals`` holds the 3-valued good assignment of INPUT gates (2 = X).
    ``values`` receives 5-valued codes; ``frontier`` receives the ids of
    D-frontier gates (output X, some consumed fanin value D/DBAR, where the
    faulted input pin consumes its substituted value).  Returns the number
    of frontier entries.
    """
    nf = 0
    for g in topo:
        g = int(g)
        kind = kinds[g]
        if kind == _INPUT:
            g3 = int(pi_vals[g])
            f3 = fault_stuck if (g == fault_gate and fault_pin < 0) else g3
            values[g] = _ENC[g3][f3]
            continue
        lo, hi = int(fanin_off[g]), int(fanin_off[g + 1])
        codes = [int(values[fanin_flat[i]]) for i in range(lo, hi)]
        goods = [_GOOD[c] for c in codes]
        faults = [_FAULTY[c] for c in codes]
        if g == fault_gate and fault_pin >= 0:
            faults[fault_pin] = fault_stuck
        g3 = _eval3(kind, goods)
        f3 = _eval3(kind, faults)
        if g == fault_gate and fault_pin < 0:
            f3 = fault_stuck
        out = _ENC[g3][f3]
        values[g] = out
        if out == 2:
            for j, c in enumerate(codes):
                if g == fault_gate and fault_pin == j:
                    c = _ENC[_GOOD[c]][fault_stuck]
                if c == 3 or c == 4:
                    frontier[nf] = g
                    nf += 1
                    break
    return nf


def eval_one(kind: int, codes: list[int], sub_pin: int = -1, sub_stuck: int = 0,
             out_stuck: int = -1) -> int:
    """Single-gate 5-valued evaluation with optional pin/output fault substitution."""
    goods = [_GOOD[c] for c in codes]
    faults = [_FAULTY[c] for c in codes]
    if sub_pin >= 0:
        faults[sub_pin] = sub_stuck
    g3 = _eval3(kind, goods)
    f3 = _eval3(kind, faults)
    if out_stuck >= 0:
        f3 = out_stuck
    return _ENC[g3][f3]
