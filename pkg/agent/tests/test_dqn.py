import math

import numpy as np
import pytest
import torch

from qagent.client import GraphObs
from qagent.dqn import Trainer, Transition, check_reward
from qagent.model import AgentConfig, Qgnn

from test_model import make_obs


class NullClient:
    """Offline stand-in so Trainer internals can be unit-tested."""

    def reset(self, *a, **k):
        raise AssertionError("offline test should not reset")

    def step(self, *a, **k):
        raise AssertionError("offline test should not step")

    def metrics(self):
        return {}

    def close(self):
        pass


def make_trainer(tmp_path, **overrides) -> Trainer:
    cfg = AgentConfig(embed_dim=8, mlp_hidden=8, batch_size=4,
                      warmup_transitions=1, **overrides)
    return Trainer(NullClient(), [], cfg, str(tmp_path))


def fixed_batch(n=4):
    batch = []
    for i in range(n):
        obs = make_obs(3, edges=[(0, 2), (1, 2)], targets=(0, 1),
                       mask=(True, True), seed=i)
        nxt = make_obs(3, edges=[(0, 2), (1, 2)], targets=(0, 1),
                       mask=(True, True), seed=100 + i)
        batch.append(Transition(obs, i % 2, [-0.1, 1.956, -100.0, 100.0][i % 4],
                                None if i % 3 == 0 else nxt, i % 3 == 0))
    return batch


def test_gamma_zero_targets_are_rewards(tmp_path):
    trainer = make_trainer(tmp_path, gamma=0.0)
    batch = fixed_batch()
    targets = trainer._targets(batch)
    assert torch.allclose(targets, torch.tensor([t.reward for t in batch],
                                                dtype=torch.float64))


def test_gamma_zero_loss_matches_hand_computation(tmp_path):
    trainer = make_trainer(tmp_path, gamma=0.0)
    batch = fixed_batch()
    weights = np.array([1.0, 0.5, 0.25, 1.0])
    with torch.no_grad():
        qs = [float(trainer.online.q_values(t.obs)[t.action]) for t in batch]
    expected = np.mean(weights * (np.array(qs) - np.array([t.reward for t in batch])) ** 2)
    targets = trainer._targets(batch)
    qs_t = torch.stack([trainer.online.q_values(t.obs)[t.action] for t in batch])
    loss = (torch.from_numpy(weights) * (qs_t - targets).pow(2)).mean()
    assert float(loss.detach()) == pytest.approx(expected, rel=1e-12)


def test_bellman_target_uses_max_next_q(tmp_path):
    trainer = make_trainer(tmp_path, gamma=0.95)
    t = fixed_batch(2)[1]
    assert not t.done
    with torch.no_grad():
        nq = trainer.target.q_values(t.next_obs)
    expected = t.reward + 0.95 * float(nq.max())
    assert float(trainer._targets([t])[0]) == pytest.approx(expected, rel=1e-12)


def test_terminal_drops_bootstrap_term(tmp_path):
    trainer = make_trainer(tmp_path, gamma=0.95)
    t = fixed_batch(1)[0]
    assert t.done
    assert float(trainer._targets([t])[0]) == pytest.approx(t.reward)


def test_learn_step_and_target_refresh(tmp_path):
    trainer = make_trainer(tmp_path, target_update_period=3, gamma=0.9)
    for tr in fixed_batch(8):
        trainer.buffer.push(tr)
    before = {k: v.clone() for k, v in trainer.online.state_dict().items()}
    for i in range(3):
        trainer.learn_step()
    after = trainer.online.state_dict()
    assert any(not torch.equal(before[k], after[k]) for k in before)
    # refresh happened at update 3: target must be parameter-wise identical
    for k, v in trainer.target.state_dict().items():
        assert torch.equal(v, after[k]), k
    trainer.learn_step()
    # one more online step: target now lags again
    assert any(not torch.equal(trainer.target.state_dict()[k],
                               trainer.online.state_dict()[k])
               for k in before)


def test_epsilon_schedule(tmp_path):
    trainer = make_trainer(tmp_path, eps_start=1.0, eps_end=0.05,
                           eps_decay_steps=100)
    assert trainer.epsilon() == 1.0
    trainer.env_steps = 50
    assert trainer.epsilon() == pytest.approx(0.525)
    trainer.env_steps = 1000
    assert trainer.epsilon() == pytest.approx(0.05)


def test_random_mode_ignores_q(tmp_path):
    trainer = make_trainer(tmp_path)
    obs = make_obs(3, edges=[(0, 2)], targets=(0, 1), mask=(True, True))
    picks = {trainer.select_action(obs, mode="random") for _ in range(50)}
    assert picks == {0, 1}


def test_check_reward_accepts_protocol_values():
    cfg = AgentConfig()
    for n in (1, 2, 7, 30):
        check_reward(10.0 - 7.5 * math.exp(0.07 * n), cfg)
    check_reward(-0.1, cfg)
    check_reward(100.0, cfg)
    check_reward(-100.0, cfg)
    with pytest.raises(ValueError):
        check_reward(3.14159, cfg)
    with pytest.raises(ValueError):
        check_reward(9.9, cfg)  # would need n < 1
