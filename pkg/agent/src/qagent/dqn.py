"""DQN training against the episode protocol.

Epsilon-greedy rollouts feed the prioritized replay buffer; minibatch
updates minimize the importance-weighted squared Bellman residual against a
periodically-refreshed target network.  Checkpoints and a per-episode
training-curve CSV (episode, fault, backtracks, reward_sum, epsilon) are
written to the work directory.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from pathlib import Path

import torch

from .client import EpisodeClient, GraphObs
from .model import AgentConfig, Qgnn, save_checkpoint

REWARD_TOLERANCE = 1e-9


@dataclass
class Transition:
    obs: GraphObs
    action: int
    reward: float
    next_obs: GraphObs | None
    done: bool


def check_reward(r: float, cfg: AgentConfig) -> None:
    """The environment's reward must be one of the published branches."""
    if abs(r - -0.1) < REWARD_TOLERANCE or abs(abs(r) - 100.0) < REWARD_TOLERANCE:
        return
    # 10 - l1*exp(l2*n)  =>  n = log((10 - r)/l1)/l2 must be a positive integer
    n = math.log((10.0 - r) / cfg.lambda1) / cfg.lambda2
    if abs(n - round(n)) > 1e-6 or round(n) < 1:
        raise ValueError(f"reward {r!r} is outside the protocol's reward scheme")


class Trainer:
    def __init__(self, client: EpisodeClient, faults: list[str], cfg: AgentConfig,
                 workdir: str):
        from .replay import PerBuffer

        self.client = client
        self.faults = faults
        self.cfg = cfg
        self.workdir = Path(workdir)
        self.workdir.mkdir(parents=True, exist_ok=True)
        torch.manual_seed(cfg.seed)
        self.rng = random.Random(cfg.seed)
        self.online = Qgnn(cfg)
        self.target = Qgnn(cfg)
        self.target.load_state_dict(self.online.state_dict())
        self.optimizer = torch.optim.Adam(self.online.parameters(), lr=cfg.learning_rate)
        self.buffer = PerBuffer(cfg.per_capacity, cfg.per_alpha, cfg.per_eps, cfg.seed)
        self.env_steps = 0
        self.updates = 0
        self.episode_rows: list[list] = []

    # -- policy --------------------------------------------------------------

    def epsilon(self) -> float:
        cfg = self.cfg
        frac = min(1.0, self.env_steps / max(1, cfg.eps_decay_steps))
        return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac

    def select_action(self, obs: GraphObs, mode: str = "train") -> int:
        """mode: 'train' (epsilon-greedy), 'greedy', or 'random' (epsilon = 1)."""
        valid = obs.valid_actions()
        if mode == "random" or (mode == "train" and self.rng.random() < self.epsilon()):
            return self.rng.choice(valid)
        with torch.no_grad():
            q = self.online.q_values(obs)
        return int(max(valid, key=lambda i: float(q[i])))

    # -- learning ---------------------------------------------------------------

    def beta(self) -> float:
        cfg = self.cfg
        frac = min(1.0, self.updates / max(1, cfg.per_beta_steps))
        return cfg.per_beta_start + (1.0 - cfg.per_beta_start) * frac

    def _targets(self, batch: list[Transition]) -> torch.Tensor:
        outs = []
        with torch.no_grad():
            for t in batch:
                y = t.reward * self.cfg.reward_scale
                if not t.done and t.next_obs is not None:
                    nq = self.target.q_values(t.next_obs)
                    y += self.cfg.gamma * float(nq.max())
                outs.append(y)
        return torch.tensor(outs, dtype=torch.float64)

    def learn_step(self) -> float:
        idxs, batch, weights = self.buffer.sample(self.cfg.batch_size, self.beta())
        targets = self._targets(batch)
        qs = torch.stack([self.online.q_values(t.obs)[t.action] for t in batch])
        td = qs - targets
        loss = (torch.from_numpy(weights) * td.pow(2)).mean()
        if not torch.isfinite(loss):
            raise FloatingPointError(f"non-finite loss at update {self.updates}")
        self.optimizer.zero_grad()
        loss.backward()
        torch.nn.utils.clip_grad_norm_(self.online.parameters(), 10.0)
        self.optimizer.step()
        self.buffer.update(idxs, td.detach().numpy())
        self.updates += 1
        if self.updates % self.cfg.target_update_period == 0:
            self.target.load_state_dict(self.online.state_dict())
        return float(loss.detach())

    # -- rollouts ------------------------------------------------------------------

    def run_episode(self, fault: str, learn: bool = True, mode: str = "train") -> dict:
        obs, done, status = self.client.reset(fault, seed=self.cfg.seed)
        reward_sum = 0.0
        while not done:
            action = self.select_action(obs, mode=mode)
            step = self.client.step(action)
            check_reward(step.reward, self.cfg)
            reward_sum += step.reward
            if learn:
                self.buffer.push(Transition(obs, action, step.reward,
                                            step.obs, step.done))
                self.env_steps += 1
                if (len(self.buffer) >= self.cfg.warmup_transitions
                        and self.env_steps % self.cfg.train_every == 0):
                    self.learn_step()
            obs, done, status = step.obs, step.done, step.status
        metrics = self.client.metrics()
        metrics["reward_sum"] = reward_sum
        return metrics

    def train(self, epochs: int, curve_path: str | None = None,
              checkpoint_path: str | None = None, keep_best: bool = True,
              eval_every: int = 1) -> dict:
        """Epsilon-greedy training over the fault set.

        Every ``eval_every`` epochs the greedy policy is scored on the
        training faults; with ``keep_best`` the lowest-backtrack snapshot is
        restored at the end (DQN's greedy argmax oscillates on small nets,
        so the final parameters are a selection, not just the last iterate).
        """
        episode = len(self.episode_rows)
        best_bt = None
        best_state = None
        for epoch in range(1, epochs + 1):
            for fault in self.faults:
                metrics = self.run_episode(fault, learn=True)
                episode += 1
                self.episode_rows.append([episode, fault, metrics["backtracks"],
                                          round(metrics["reward_sum"], 6),
                                          round(self.epsilon(), 6)])
            if keep_best and (epoch % eval_every == 0 or epoch == epochs):
                score = sum(m["backtracks"] for m in
                            self.evaluate(self.faults, mode="greedy"))
                if best_bt is None or score < best_bt:
                    best_bt = score
                    best_state = {k: v.clone() for k, v in
                                  self.online.state_dict().items()}
            # crash/disconnect recovery point: latest online parameters
            save_checkpoint(str(self.workdir / "latest.npz"), self.online,
                            self.env_steps)
        if keep_best and best_state is not None:
            self.online.load_state_dict(best_state)
            self.target.load_state_dict(best_state)
        curve = Path(curve_path) if curve_path else self.workdir / "training_curve.csv"
        with open(curve, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["episode", "fault", "backtracks", "reward_sum", "epsilon"])
            w.writerows(self.episode_rows)
        ckpt = Path(checkpoint_path) if checkpoint_path else self.workdir / "checkpoint.npz"
        save_checkpoint(str(ckpt), self.online, self.env_steps)
        return {"episodes": episode, "env_steps": self.env_steps,
                "updates": self.updates, "checkpoint": str(ckpt),
                "curve": str(curve), "best_eval_backtracks": best_bt}

    def evaluate(self, faults: list[str], mode: str = "greedy") -> list[dict]:
        out = []
        for fault in faults:
            metrics = self.run_episode(fault, learn=False, mode=mode)
            metrics["fault"] = fault
            out.append(metrics)
        return out
