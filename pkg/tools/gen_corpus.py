"""Regenerate the seeded/structured corpus circuits (rnd*, mul3, alu4, pic27).

Deterministic: re-running reproduces the committed .bench files byte for byte.
Run from the repo root:  python tools/gen_corpus.py
"""

from __future__ import annotations

import random
import sys
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "atpgkit" / "corpus"


class Builder:
    def __init__(self, title: str):
        self.lines = [f"# {title}"]
        self.inputs: list[str] = []
        self.outputs: list[str] = []
        self.gates: list[str] = []
        self.n = 0

    def pi(self, name: str) -> str:
        self.inputs.append(name)
        return name

    def po(self, sig: str) -> None:
        self.outputs.append(sig)

    def g(self, kind: str, *args: str, name: str | None = None) -> str:
        if name is None:
            self.n += 1
            name = f"n{self.n}"
        self.gates.append(f"{name} = {kind}({', '.join(args)})")
        return name

    def tree(self, kind: str, sigs: list[str], name: str | None = None) -> str:
        """Reduce a signal list with a balanced tree of 2-input gates."""
        sigs = list(sigs)
        while len(sigs) > 2:
            nxt = []
            for j in range(0, len(sigs) - 1, 2):
                nxt.append(self.g(kind, sigs[j], sigs[j + 1]))
            if len(sigs) % 2:
                nxt.append(sigs[-1])
            sigs = nxt
        return self.g(kind, *sigs, name=name)

    def and2(self, x: str, y: str, name: str | None = None) -> str:
        """Standard-cell style AND: NAND2 followed by an inverter."""
        return self.g("NOT", self.g("NAND", x, y), name=name)

    def or2(self, x: str, y: str, name: str | None = None) -> str:
        return self.g("NOT", self.g("NOR", x, y), name=name)

    def mapped_tree(self, op: str, sigs: list[str], name: str | None = None) -> str:
        """Balanced AND/OR reduction mapped to NAND2/NOR2 + INV cells."""
        make = self.and2 if op == "AND" else self.or2
        sigs = list(sigs)
        while len(sigs) > 2:
            nxt = []
            for j in range(0, len(sigs) - 1, 2):
                nxt.append(make(sigs[j], sigs[j + 1]))
            if len(sigs) % 2:
                nxt.append(sigs[-1])
            sigs = nxt
        if len(sigs) == 1:
            return self.g("BUF", sigs[0], name=name) if name else sigs[0]
        return make(sigs[0], sigs[1], name=name)

    def write(self, path: Path) -> None:
        body = (
            self.lines
            + [f"INPUT({i})" for i in self.inputs]
            + [f"OUTPUT({o})" for o in self.outputs]
            + self.gates
        )
        path.write_text("\n".join(body) + "\n")
        print(f"{path.name}: {len(self.inputs)} PI, {len(self.outputs)} PO, {len(self.gates)} gates")


def gen_random(seed: int, n_pi: int, n_gates: int) -> Builder:
    rng = random.Random(seed)
    b = Builder(f"random reconvergent circuit (seed {seed})")
    sigs = [b.pi(f"x{i}") for i in range(n_pi)]
    kinds = ["AND", "NAND", "OR", "NOR", "XOR", "XNOR", "NOT", "BUF"]
    weights = [5, 4, 5, 4, 3, 2, 2, 1]
    for _ in range(n_gates):
        kind = rng.choices(kinds, weights)[0]
        arity = 1 if kind in ("NOT", "BUF") else rng.choice([2, 2, 2, 3])
        # bias toward recent signals for depth, allow reuse for reconvergence
        pool = sigs[-6:] if rng.random() < 0.6 else sigs
        args = rng.sample(pool, min(arity, len(pool)))
        while len(args) < arity:
            args.append(rng.choice(sigs))
        sigs.append(b.g(kind, *args))
    used = {a for line in b.gates for a in line.split("(")[1].rstrip(")").split(", ")}
    produced = [line.split(" = ")[0] for line in b.gates]
    for s in b.inputs + produced:
        if s not in used:
            b.po(s)
    return b


def gen_mul3() -> Builder:
    b = Builder("3x3 array multiplier")
    a = [b.pi(f"a{i}") for i in range(3)]
    c = [b.pi(f"b{i}") for i in range(3)]
    pp = [[b.g("AND", a[i], c[j], name=f"pp{i}{j}") for j in range(3)] for i in range(3)]
    b.po(pp[0][0])  # p0

    def half(x, y, tag):
        s = b.g("XOR", x, y, name=f"s{tag}")
        cy = b.g("AND", x, y, name=f"c{tag}")
        return s, cy

    def full(x, y, z, tag):
        s = b.g("XOR", x, y, z, name=f"s{tag}")
        m0 = b.g("AND", x, y)
        m1 = b.g("AND", x, z)
        m2 = b.g("AND", y, z)
        cy = b.g("OR", m0, m1, m2, name=f"c{tag}")
        return s, cy

    p1, c1 = half(pp[1][0], pp[0][1], "1")
    p2, c2 = full(pp[2][0], pp[1][1], pp[0][2], "2a")
    p2b, c2b = half(p2, c1, "2b")
    p3, c3 = full(pp[2][1], pp[1][2], c2, "3a")
    p3b, c3b = half(p3, c2b, "3b")
    p4, c4 = full(pp[2][2], c3, c3b, "4")
    b.po(p1)
    b.po(p2b)
    b.po(p3b)
    b.po(p4)
    b.po(c4)
    return b


def gen_alu4() -> Builder:
    b = Builder("4-bit ALU slice: mode-selected add/and/or/xor, NAND2/NOR2/INV mapped")
    a = [b.pi(f"a{i}") for i in range(4)]
    c = [b.pi(f"b{i}") for i in range(4)]
    cin = b.pi("cin")
    m0 = b.pi("m0")
    m1 = b.pi("m1")
    nm0 = b.g("NOT", m0, name="nm0")
    nm1 = b.g("NOT", m1, name="nm1")
    carry = cin
    for i in range(4):
        gi = b.and2(a[i], c[i], name=f"g{i}")
        pi_ = b.or2(a[i], c[i], name=f"p{i}")
        xi = b.g("XOR", a[i], c[i], name=f"x{i}")
        s = b.g("XOR", xi, carry, name=f"sum{i}")
        sel_add = b.and2(s, b.and2(nm0, nm1))
        sel_and = b.and2(gi, b.and2(m0, nm1))
        sel_or = b.and2(pi_, b.and2(nm0, m1))
        sel_xor = b.and2(xi, b.and2(m0, m1))
        b.po(b.or2(b.or2(sel_add, sel_and), b.or2(sel_or, sel_xor), name=f"o{i}"))
        pc = b.and2(pi_, carry)
        carry = b.or2(gi, pc, name=f"cy{i + 1}")
    b.po(carry)
    return b


def gen_mux16() -> Builder:
    b = Builder("16:1 multiplexer, NAND2/NOR2/INV mapped selection tree")
    s = [b.pi(f"s{i}") for i in range(4)]
    d = [b.pi(f"d{i}") for i in range(16)]
    ns = [b.g("NOT", x, name=f"ns{i}") for i, x in enumerate(s)]
    terms = []
    for i in range(16):
        lits = [d[i]] + [s[k] if (i >> k) & 1 else ns[k] for k in range(4)]
        terms.append(b.mapped_tree("AND", lits))
    b.po(b.mapped_tree("OR", terms, name="y"))
    return b


def gen_pic27() -> Builder:
    """36-input 7-output priority interrupt controller, c432-class size.

    Three request buses a/b/c gated by an enable bus; class A beats B beats
    C; the winning class's lowest active channel is priority-encoded, and a
    parity check output folds the selection vector with an XOR tree.
    """
    b = Builder("27-channel priority interrupt controller (c432-class, NAND2/NOR2/INV mapped)")
    e = [b.pi(f"e{i}") for i in range(9)]
    a = [b.pi(f"a{i}") for i in range(9)]
    bb = [b.pi(f"b{i}") for i in range(9)]
    c = [b.pi(f"c{i}") for i in range(9)]
    ra = [b.and2(a[i], e[i], name=f"ra{i}") for i in range(9)]
    rb = [b.and2(bb[i], e[i], name=f"rb{i}") for i in range(9)]
    rc = [b.and2(c[i], e[i], name=f"rc{i}") for i in range(9)]
    pa = b.mapped_tree("OR", ra, name="pa")
    anyb = b.mapped_tree("OR", rb, name="anyb")
    anyc = b.mapped_tree("OR", rc, name="anyc")
    npa = b.g("NOT", pa, name="npa")
    pb = b.and2(anyb, npa, name="pb")
    npb = b.g("NOT", pb, name="npb")
    pc = b.and2(anyc, b.and2(npa, npb), name="pc")
    b.po(pa)
    b.po(pb)
    b.po(pc)
    # selection vector: channel i active in the winning class
    sel = []
    for i in range(9):
        sb = b.and2(rb[i], npa)
        sc = b.and2(rc[i], b.and2(npa, npb))
        sel.append(b.or2(ra[i], b.or2(sb, sc), name=f"sel{i}"))
    nsel = [b.g("NOT", s, name=f"nsel{i}") for i, s in enumerate(sel[:8])]
    # priority encode: lowest index wins
    pr = [sel[0]]
    for i in range(1, 9):
        blockers = nsel[:i]
        mask = b.mapped_tree("AND", blockers) if len(blockers) > 1 else blockers[0]
        pr.append(b.and2(sel[i], mask, name=f"pr{i}"))
    # 3-bit address covers channels 0-7; channel 8 folds into the check bit
    addr_bits: list[list[str]] = [[], [], []]
    for i in range(8):
        for bit in range(3):
            if (i >> bit) & 1:
                addr_bits[bit].append(pr[i])
    for bit in range(3):
        b.po(b.mapped_tree("OR", addr_bits[bit], name=f"ad{bit}"))
    par = b.tree("XOR", sel, name="par")
    b.po(b.g("XOR", par, pa, pr[8], name="chk"))
    return b


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    specs = [(11, 6, 16), (23, 7, 20), (37, 6, 24), (41, 8, 18),
             (53, 7, 26), (67, 6, 22), (71, 8, 28), (83, 7, 17)]
    for idx, (seed, n_pi, n_gates) in enumerate(specs, start=1):
        gen_random(seed, n_pi, n_gates).write(OUT / f"rnd{idx:02d}.bench")
    gen_mul3().write(OUT / "mul3.bench")
    gen_alu4().write(OUT / "alu4.bench")
    gen_mux16().write(OUT / "mux16.bench")
    gen_pic27().write(OUT / "pic27.bench")


if __name__ == "__main__":
    sys.exit(main())
