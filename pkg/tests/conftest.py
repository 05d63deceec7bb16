import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # oracles helper module

from atpgkit import corpus_names, corpus_path
from atpgkit.bench import Netlist, parse_bench_file

# circuits small enough for exhaustive two-copy simulation of every fault
SMALL_MAX_LOGIC_GATES = 30
SMALL_MAX_INPUTS = 16

_cache: dict[str, Netlist] = {}


def load(name: str) -> Netlist:
    if name not in _cache:
        _cache[name] = parse_bench_file(corpus_path(name))
    return _cache[name]


def all_names() -> list[str]:
    return corpus_names()


def small_names() -> list[str]:
    out = []
    for name in corpus_names():
        nl = load(name)
        if (nl.num_logic_gates <= SMALL_MAX_LOGIC_GATES
                and len(nl.all_inputs) <= SMALL_MAX_INPUTS):
            out.append(name)
    return out


@pytest.fixture(scope="session")
def corpus():
    return {name: load(name) for name in all_names()}


@pytest.fixture(scope="session")
def small_corpus():
    return {name: load(name) for name in small_names()}
