"""Proportional prioritized experience replay on a binary sum tree."""

from __future__ import annotations

import numpy as np


class PerBuffer:
    """Fixed-capacity ring with priority-proportional sampling.

    Priorities are (|td| + eps)^alpha; sampling weights are the usual
    importance-sampling correction (n * P(i))^-beta normalized by the batch
    maximum.  alpha = 0 degenerates to uniform sampling.
    """

    def __init__(self, capacity: int, alpha: float = 0.6, eps: float = 1e-3,
                 seed: int = 0):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.alpha = alpha
        self.eps = eps
        self.tree = np.zeros(2 * capacity, dtype=np.float64)
        self.data: list = [None] * capacity
        self.size = 0
        self.head = 0
        self.max_priority = 1.0
        self.rng = np.random.default_rng(seed)

    def __len__(self) -> int:
        return self.size

    def _set(self, idx: int, priority: float) -> None:
        pos = idx + self.capacity
        delta = priority - self.tree[pos]
        while pos >= 1:
            self.tree[pos] += delta
            pos //= 2

    def push(self, transition) -> None:
        idx = self.head
        self.data[idx] = transition
        self._set(idx, self.max_priority)
        self.head = (self.head + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def _find(self, mass: float) -> int:
        pos = 1
        while pos < self.capacity:
            left = 2 * pos
            if mass <= self.tree[left]:
                pos = left
            else:
                mass -= self.tree[left]
                pos = left + 1
        return pos - self.capacity

    def sample(self, batch: int, beta: float):
        if self.size == 0:
            raise ValueError("buffer is empty")
        total = self.tree[1]
        # stratified draws keep coverage even at small batch sizes
        bounds = np.linspace(0.0, total, batch + 1)
        idxs = np.array([self._find(self.rng.uniform(bounds[i], bounds[i + 1]))
                         for i in range(batch)], dtype=np.int64)
        idxs = np.clip(idxs, 0, self.size - 1)
        probs = self.tree[idxs + self.capacity] / total
        weights = (self.size * probs) ** -beta
        weights /= weights.max()
        return idxs, [self.data[i] for i in idxs], weights

    def update(self, idxs, td_errors) -> None:
        for idx, td in zip(idxs, td_errors):
            priority = (abs(float(td)) + self.eps) ** self.alpha
            assert priority > 0.0
            self._set(int(idx), priority)
            self.max_priority = max(self.max_priority, priority)
