"""Logic-value-aware graph attention encoder with a per-target Q head.

Message passing runs in reverse-topological sweeps over the observation
sub-circuit: every node attends over its circuit fanins with
softmax(query . key) weights, and the aggregated message updates the node
embedding through a GRU.  Three disjoint parameter branches (query/key/value
projections plus GRU) are selected by the aggregating node's logic value
(0, 1, X), so nodes in different logic states propagate information
differently.  Nodes without in-graph fanins (the boundary targets and other
sources) keep their feature projection.  Within a sweep every node reads
only previous-sweep embeddings, which makes sweeps fully vectorizable over
the edge list.

The Q head scores each action-target node embedding independently; masked
actions get -inf.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
import torch
from torch import nn

from .client import FEATURE_DIM, GraphObs

N_BRANCHES = 3  # logic 0 / logic 1 / logic X


@dataclass
class AgentConfig:
    feature_dim: int = FEATURE_DIM
    embed_dim: int = 16
    mlp_hidden: int = 32
    action_arity: int = 16
    num_layers: int = 0          # 0: depth-matched sweeps, capped at max_layers
    max_layers: int = 8
    learning_rate: float = 1e-4
    gamma: float = 0.95
    per_capacity: int = 512 * 1024
    per_alpha: float = 0.6
    per_beta_start: float = 0.4
    per_beta_steps: int = 20_000
    per_eps: float = 1e-3
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_steps: int = 50_000
    target_update_period: int = 500
    batch_size: int = 16
    train_every: int = 4
    warmup_transitions: int = 100
    backtrack_limit: int = 100
    reward_scale: float = 1.0    # agent-internal scaling of learning targets
    lambda1: float = 7.5         # mirrored for reward sanity checks
    lambda2: float = 0.07
    seed: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "AgentConfig":
        return cls(**json.loads(text))


class Qgnn(nn.Module):
    def __init__(self, cfg: AgentConfig):
        super().__init__()
        self.cfg = cfg
        e = cfg.embed_dim
        self.in_proj = nn.Linear(cfg.feature_dim, e)
        self.wq = nn.ModuleList(nn.Linear(e, e, bias=False) for _ in range(N_BRANCHES))
        self.wk = nn.ModuleList(nn.Linear(e, e, bias=False) for _ in range(N_BRANCHES))
        self.wv = nn.ModuleList(nn.Linear(e, e, bias=False) for _ in range(N_BRANCHES))
        self.gru = nn.ModuleList(nn.GRUCell(e, e) for _ in range(N_BRANCHES))
        self.mlp = nn.Sequential(nn.Linear(e, cfg.mlp_hidden), nn.ReLU(),
                                 nn.Linear(cfg.mlp_hidden, 1))
        self.double()

    # -- encoder -----------------------------------------------------------

    def _sweep(self, h: torch.Tensor, edges: torch.Tensor, branch: torch.Tensor
               ) -> torch.Tensor:
        n = h.shape[0]
        src, dst = edges[:, 0], edges[:, 1]
        # per-branch projections, gathered by the aggregating node's branch
        q_all = torch.stack([m(h) for m in self.wq])   # [B, n, e]
        k_all = torch.stack([m(h) for m in self.wk])
        v_all = torch.stack([m(h) for m in self.wv])
        b_dst = branch[dst]
        q_e = q_all[b_dst, dst]
        k_e = k_all[b_dst, src]
        v_e = v_all[b_dst, src]
        score = (q_e * k_e).sum(-1)
        # softmax over each node's incoming edges (global shift is exact)
        expd = torch.exp(score - score.max()) if score.numel() else score
        denom = h.new_zeros(n).index_add_(0, dst, expd)
        alpha = expd / denom[dst]
        msg = h.new_zeros(n, h.shape[1]).index_add_(0, dst, alpha.unsqueeze(-1) * v_e)
        has_pred = h.new_zeros(n, dtype=torch.bool)
        has_pred[dst] = True
        out = h.clone()  # nodes without predecessors keep their embedding
        for b in range(N_BRANCHES):
            sel = has_pred & (branch == b)
            if sel.any():
                out[sel] = self.gru[b](msg[sel], h[sel])
        return out

    def node_embeddings(self, obs: GraphObs) -> torch.Tensor:
        h = self.in_proj(torch.from_numpy(obs.features))
        if len(obs.edges) == 0:
            return h
        edges = torch.from_numpy(obs.agg_edges)
        branch = torch.from_numpy(obs.branch)
        sweeps = self.cfg.num_layers or min(max(obs.depth, 1), self.cfg.max_layers)
        for _ in range(sweeps):
            h = self._sweep(h, edges, branch)
        return h

    # -- Q head --------------------------------------------------------------

    def q_values(self, obs: GraphObs) -> torch.Tensor:
        """Length-K vector; -inf at masked or absent actions."""
        h = self.node_embeddings(obs)
        scores = self.mlp(h[torch.from_numpy(obs.target_index)]).squeeze(-1)
        out = torch.full((self.cfg.action_arity,), -torch.inf, dtype=scores.dtype)
        mask = torch.from_numpy(obs.mask)
        out[:len(obs.targets)] = torch.where(mask, scores, -torch.inf)
        return out

    def greedy_action(self, obs: GraphObs) -> int:
        with torch.no_grad():
            return int(torch.argmax(self.q_values(obs)).item())


def save_checkpoint(path: str, model: Qgnn, step: int) -> None:
    """Flat-array checkpoint: config JSON, step counter, named parameters."""
    arrays = {f"param/{k}": v.detach().cpu().numpy()
              for k, v in model.state_dict().items()}
    np.savez(path, config=model.cfg.to_json(), step=step, **arrays)


def load_checkpoint(path: str) -> tuple[Qgnn, int]:
    data = np.load(path, allow_pickle=False)
    cfg = AgentConfig.from_json(str(data["config"]))
    model = Qgnn(cfg)
    state = {k.removeprefix("param/"): torch.from_numpy(data[k])
             for k in data.files if k.startswith("param/")}
    model.load_state_dict(state)
    return model, int(data["step"])
