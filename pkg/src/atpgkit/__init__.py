"""Stuck-at ATPG toolkit.

Bench netlists in, test patterns out: a PODEM engine with pluggable
gate-level and FFR-level backtrace policies, 5-valued fault simulation,
SCOAP testability, fanout-free-region partitioning, and an episodic
environment served over a JSON line protocol for learning agents.
"""

from importlib import resources

from ._kernels import BACKEND as KERNEL_BACKEND
from .bench import GateKind, Netlist, parse_bench, parse_bench_file, emit_bench
from .faults import FaultSite, enumerate_faults
from .ffr import partition
from .logic import LogicValue, eval_gate
from .podem import (AtpgResult, generate_test, run_fault_list,
                    gate_level_heuristic_policy, ffr_level_heuristic_policy)
from .scoap import compute_scoap
from .simulate import CircuitState, fault_simulate, imply

__version__ = "0.1.0"


def corpus_path(name: str) -> str:
    """Filesystem path of a bundled corpus circuit (name without .bench)."""
    return str(resources.files("atpgkit").joinpath("corpus", f"{name}.bench"))


def corpus_names() -> list[str]:
    root = resources.files("atpgkit").joinpath("corpus")
    return sorted(p.name.removesuffix(".bench") for p in root.iterdir()
                  if p.name.endswith(".bench"))
