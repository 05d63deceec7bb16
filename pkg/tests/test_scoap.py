import pytest

from atpgkit.bench import GateKind, parse_bench
from atpgkit.scoap import SENTINEL, compute_scoap

from conftest import all_names, load
from oracles import scoap_recursive


def test_hand_example_and_gate():
    # cc1(c) = cc1(a)+cc1(b)+1 = 3; cc0(c) = min(cc0)+1 = 2;
    # co(a) = co(c)+cc1(b)+1 = 0+1+1 = 2
    nl = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(c)\nc = AND(a, b)")
    sc = compute_scoap(nl)
    c, a = nl.id_of("c"), nl.id_of("a")
    assert sc[c].cc1 == 3
    assert sc[c].cc0 == 2
    assert sc[a].co == 2


def test_buf_chain_unit_increments():
    length = 5
    lines = ["INPUT(a)", f"OUTPUT(b{length})", "b1 = BUF(a)"]
    lines += [f"b{i} = BUF(b{i - 1})" for i in range(2, length + 1)]
    nl = parse_bench("\n".join(lines))
    sc = compute_scoap(nl)
    last = nl.id_of(f"b{length}")
    assert sc[last].cc0 == 1 + length
    assert sc[last].cc1 == 1 + length


def test_stem_observability_is_min_branch():
    nl = parse_bench(
        "INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(y)\nOUTPUT(z)\n"
        "y = AND(a, b)\nz = OR(a, c)")
    sc = compute_scoap(nl)
    a = nl.id_of("a")
    via_y = sc[nl.id_of("y")].co + sc[nl.id_of("b")].cc1 + 1
    via_z = sc[nl.id_of("z")].co + sc[nl.id_of("c")].cc0 + 1
    assert sc[a].co == min(via_y, via_z)


@pytest.mark.parametrize("name", all_names())
def test_boundary_conditions(name):
    nl = load(name)
    sc = compute_scoap(nl)
    for pi in nl.all_inputs:
        assert sc[pi].cc0 == 1 and sc[pi].cc1 == 1
    for po in nl.all_outputs:
        assert sc[po].co == 0
    for g in range(len(nl)):
        assert 1 <= sc[g].cc0 <= SENTINEL and 1 <= sc[g].cc1 <= SENTINEL
        assert 0 <= sc[g].co <= SENTINEL


@pytest.mark.parametrize("name", all_names())
def test_monotonicity(name):
    # each controllability strictly exceeds the cheapest fanin measure
    nl = load(name)
    sc = compute_scoap(nl)
    for g in range(len(nl)):
        if nl.kinds[g] == GateKind.INPUT:
            continue
        floor = min(min(sc[s].cc0, sc[s].cc1) for s in nl.fanins[g])
        assert sc[g].cc0 > floor
        assert sc[g].cc1 > floor


@pytest.mark.parametrize("name", [n for n in all_names()
                                  if load(n).num_gates <= 200])
def test_agreement_with_recursive_oracle(name):
    nl = load(name)
    sc = compute_scoap(nl)
    cc, co = scoap_recursive(nl)
    for g in range(len(nl)):
        assert (sc[g].cc0, sc[g].cc1) == cc[g], (name, nl.names[g])
        assert sc[g].co == co[g], (name, nl.names[g])


def test_dead_gate_unobservable():
    nl = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = NOT(a)\ndead = AND(a, b)")
    sc = compute_scoap(nl)
    assert sc[nl.id_of("dead")].co == SENTINEL


def test_nary_xor_matches_two_input_decomposition():
    nary = parse_bench("INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(y)\ny = XOR(a, b, c)")
    split = parse_bench(
        "INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(y)\nt = XOR(a, b)\ny = XOR(t, c)")
    sn, ss = compute_scoap(nary), compute_scoap(split)
    yn, ys = nary.id_of("y"), split.id_of("y")
    assert (sn[yn].cc0, sn[yn].cc1) == (ss[ys].cc0, ss[ys].cc1)
    for sig in "abc":
        assert sn[nary.id_of(sig)].co == ss[split.id_of(sig)].co
