import random

import numpy as np
import pytest

from qagent.client import EpisodeClient, GraphObs, ProtocolError

from conftest import fixture_path


@pytest.fixture(scope="module")
def client():
    c = EpisodeClient.spawn_stdio(fixture_path("stemreconv.bench"), backtrack_limit=50)
    yield c
    c.close()


def test_reset_and_observation_shape(client):
    obs, done, status = client.reset("g8 OUT SA1")
    assert not done and status is None
    assert obs.features.shape[1] == 22
    assert len(obs.node_ids) == len(obs.features)
    assert obs.edges.shape[1] == 2
    assert len(obs.mask) == len(obs.targets)
    assert obs.depth >= 1
    assert obs.valid_actions()


def test_unknown_fault_raises(client):
    with pytest.raises(ProtocolError, match="unknown signal"):
        client.reset("bogus OUT SA0")


def test_full_episode_and_metrics(client):
    rng = random.Random(0)
    obs, done, status = client.reset("g8 OUT SA0")
    steps = 0
    while not done:
        step = client.step(rng.choice(obs.valid_actions()))
        obs, done, status = step.obs, step.done, step.status
        steps += 1
    assert status in ("DETECTED", "UNTESTABLE", "ABORTED")
    m = client.metrics()
    assert m["status"] == status
    assert m["decisions"] >= 1
    assert steps >= 1


def test_masked_action_raises_and_episode_survives(client):
    obs, done, _ = client.reset("g8 OUT SA1")
    masked = [i for i, ok in enumerate(obs.mask) if not ok]
    bad = masked[0] if masked else len(obs.targets) + 1
    with pytest.raises(ProtocolError):
        client.step(bad)
    step = client.step(obs.valid_actions()[0])
    assert step.obs is not None or step.done


def test_reverse_topo_order_is_consumers_first(client):
    obs, _, _ = client.reset("g8 OUT SA1")
    pos = {int(n): k for k, n in enumerate(obs.order)}
    for src, dst in obs.edges:
        assert pos[int(dst)] < pos[int(src)]  # consumer precedes its fanin


def test_branch_extraction_matches_one_hot(client):
    obs, _, _ = client.reset("g8 OUT SA1")
    for i in range(len(obs.node_ids)):
        onehot = obs.features[i, 0:3]
        assert onehot.sum() == pytest.approx(1.0)
        assert obs.branch[i] == int(np.argmax(onehot))
