import json
from pathlib import Path

import pytest

from qagent.client import GraphObs

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_path(name: str) -> str:
    return str(FIXTURES / name)


@pytest.fixture(scope="session")
def obs6() -> GraphObs:
    with open(FIXTURES / "obs6.json") as f:
        return GraphObs(json.load(f))


@pytest.fixture(scope="session")
def train_faults() -> list[str]:
    out = []
    with open(FIXTURES / "train20.txt") as f:
        for raw in f:
            line = raw.split("#", 1)[0].strip()
            if line:
                out.append(line)
    assert len(out) == 20
    return out
