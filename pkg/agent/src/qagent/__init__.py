"""Graph-attention DQN agent for the atpgkit episode protocol."""

from .client import EpisodeClient, GraphObs
from .dqn import Trainer, Transition
from .model import AgentConfig, Qgnn, load_checkpoint, save_checkpoint
from .replay import PerBuffer

__version__ = "0.1.0"
