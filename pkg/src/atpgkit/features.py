"""Per-node feature vectors for the learning agent's observations.

Layout (FEATURE_DIM floats per node, fixed order, documented in README):

    [0:3]   logic value one-hot over {0, 1, X} (good-value projection)
    [3]     fault-activity bit (value is D or DBAR)
    [4:7]   objective value one-hot over {0, 1, none}
    [7:10]  normalized cc0, cc1, co
    [10:20] gate kind one-hot (GateKind order)
    [20]    normalized fanout count
    [21]    normalized depth (level)

SCOAP features are log(1+v) scaled by the circuit-wide log(1+max); fanout
and depth are min-max scaled per circuit, keeping every field in [0, 1].
"""

from __future__ import annotations

import math

import numpy as np

from .bench import GateKind, Netlist
from .logic import GOOD, D, DBAR
from .scoap import SENTINEL, Scoap

__all__ = ["FEATURE_DIM", "FeatureExtractor"]

FEATURE_DIM = 22
_NUM_KINDS = len(GateKind)


class FeatureExtractor:
    """Precomputes the static per-gate fields once per netlist."""

    def __init__(self, netlist: Netlist, scoap: Scoap):
        self.netlist = netlist
        n = len(netlist)

        def norm_log(arr):
            capped = np.minimum(arr, SENTINEL).astype(np.float64)
            logs = np.log1p(capped)
            top = logs.max()
            return logs / top if top > 0 else logs

        self.cc0_n = norm_log(scoap.cc0)
        self.cc1_n = norm_log(scoap.cc1)
        self.co_n = norm_log(scoap.co)
        fanout_counts = np.array([len(f) for f in netlist.fanouts], dtype=np.float64)
        top = fanout_counts.max()
        self.fanout_n = fanout_counts / top if top > 0 else fanout_counts
        top = float(netlist.levels.max())
        self.depth_n = netlist.levels / top if top > 0 else netlist.levels.astype(np.float64)

        self.static = np.zeros((n, FEATURE_DIM), dtype=np.float64)
        for g in range(n):
            row = self.static[g]
            row[7] = self.cc0_n[g]
            row[8] = self.cc1_n[g]
            row[9] = self.co_n[g]
            row[10 + int(netlist.kinds[g])] = 1.0
            row[20] = self.fanout_n[g]
            row[21] = self.depth_n[g]

    def node_features(self, gate: int, values: np.ndarray,
                      objective: tuple[int, int] | None) -> list[float]:
        row = self.static[gate].copy()
        v = int(values[gate])
        row[GOOD[v]] = 1.0
        row[3] = 1.0 if v in (D, DBAR) else 0.0
        if objective is not None and objective[0] == gate:
            row[4 + objective[1]] = 1.0
        else:
            row[6] = 1.0
        assert math.isfinite(row.sum())
        return [float(x) for x in row]
