# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled forward-implication sweep; semantics mirror _kernels/pure.py."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "cython"

cdef enum:
    K_INPUT = 0
    K_AND = 1
    K_NAND = 2
    K_OR = 3
    K_NOR = 4
    K_NOT = 5
    K_BUF = 6
    K_XOR = 7
    K_XNOR = 8
    K_DFF = 9

cdef inline signed char _good(signed char c) nogil:
    if c == 3:
        return 1
    if c == 4:
        return 0
    return c

cdef inline signed char _faulty(signed char c) nogil:
    if c == 3:
        return 0
    if c == 4:
        return 1
    return c

cdef inline signed char _enc(signed char g, signed char f) nogil:
    if g == 2 or f == 2:
        return 2
    if g == f:
        return g
    if g == 1:
        return 3
    return 4

cdef signed char _eval3(signed char kind, signed char* vals, Py_ssize_t n) nogil:
    cdef signed char out, v
    cdef Py_ssize_t i
    cdef int parity
    if kind == K_AND or kind == K_NAND:
        out = 1
        for i in range(n):
            v = vals[i]
            if v == 0:
                out = 0
                break
            if v == 2:
                out = 2
        if kind == K_NAND and out != 2:
            out = 1 - out
        return out
    if kind == K_OR or kind == K_NOR:
        out = 0
        for i in range(n):
            v = vals[i]
            if v == 1:
                out = 1
                break
            if v == 2:
                out = 2
        if kind == K_NOR and out != 2:
            out = 1 - out
        return out
    if kind == K_NOT:
        v = vals[0]
        return v if v == 2 else 1 - v
    if kind == K_BUF or kind == K_DFF:
        return vals[0]
    parity = 0
    for i in range(n):
        v = vals[i]
        if v == 2:
            return 2
        parity ^= v
    if kind == K_XNOR:
        parity ^= (n - 1) & 1
    return <signed char>parity


def full_sweep(signed char[::1] kinds, int[::1] fanin_off, int[::1] fanin_flat,
               int[::1] topo, signed char[::1] pi_vals, signed char[::1] values,
               int fault_gate, int fault_pin, int fault_stuck, int[::1] frontier):
    cdef Py_ssize_t n = topo.shape[0]
    cdef Py_ssize_t t, i, lo, hi, m, j
    cdef int g, nf = 0
    cdef signed char kind, g3, f3, out, c
    cdef signed char goods[64]
    cdef signed char faults[64]
    cdef signed char codes[64]

    for t in range(n):
        g = topo[t]
        kind = kinds[g]
        if kind == K_INPUT:
            g3 = pi_vals[g]
            f3 = <signed char>fault_stuck if (g == fault_gate and fault_pin < 0) else g3
            values[g] = _enc(g3, f3)
            continue
        lo = fanin_off[g]
        hi = fanin_off[g + 1]
        m = hi - lo
        if m > 64:
            raise ValueError("gate arity above 64 is not supported by the compiled kernel")
        for i in range(m):
            c = values[fanin_flat[lo + i]]
            codes[i] = c
            goods[i] = _good(c)
            faults[i] = _faulty(c)
        if g == fault_gate and fault_pin >= 0:
            faults[fault_pin] = <signed char>fault_stuck
        g3 = _eval3(kind, goods, m)
        f3 = _eval3(kind, faults, m)
        if g == fault_gate and fault_pin < 0:
            f3 = <signed char>fault_stuck
        out = _enc(g3, f3)
        values[g] = out
        if out == 2:
            for j in range(m):
                c = codes[j]
                if g == fault_gate and fault_pin == j:
                    c = _enc(_good(c), <signed char>fault_stuck)
                if c == 3 or c == 4:
                    frontier[nf] = g
                    nf += 1
                    break
    return nf
