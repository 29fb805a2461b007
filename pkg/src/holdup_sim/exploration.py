"""Per-rule action-index selection policies and their exploration schedules."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "POLICY_KINDS",
    "PolicyConfig",
    "boltzmann_beta",
    "boltzmann_probabilities",
    "boltzmann_select",
    "epsilon",
    "epsilon_greedy_select",
    "ucb_select",
    "select_all",
]

POLICY_KINDS = ("boltzmann", "epsilon_greedy", "ucb")


@dataclass(frozen=True)
class PolicyConfig:
    """Exploration policy kind plus schedule parameters."""

    kind: str = "boltzmann"
    beta1: float = 12487.5
    beta2: float = 248.75
    eps1: float = 1.0 + 1.0 / 999.0
    eps2: float = 1.0 / 999.0
    c1: float = 30.0
    learn_horizon: int = 1000

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}; expected one of {POLICY_KINDS}")
        if self.beta2 + 1.0 <= 0.0:
            raise ValueError("beta2 + t must stay positive for all t >= 1")
        if self.c1 < 0.0:
            raise ValueError("c1 must be non-negative")
        if self.learn_horizon < 1:
            raise ValueError("learn_horizon must be at least 1")


def boltzmann_beta(t: float, cfg: PolicyConfig) -> float:
    """Experimentation tendency at step t (hyperbolic decay, never zero)."""
    return cfg.beta1 / (cfg.beta2 + t)


def boltzmann_probabilities(q_row: np.ndarray, beta: float) -> np.ndarray:
    """Selection distribution over one rule's stored actions.

    The row maximum is subtracted before exponentiation; the
    probabilities are unchanged and the exponentials cannot overflow.
    """
    q_row = np.asarray(q_row, dtype=float)
    e = np.exp((q_row - np.max(q_row)) / beta)
    return e / e.sum()


def _boltzmann_pick(q_row: np.ndarray, beta: float, u: float) -> int:
    e = np.exp((q_row - np.max(q_row)) / beta)
    cdf = np.cumsum(e)
    k = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    return min(k, q_row.size - 1)


def boltzmann_select(q_row: np.ndarray, t: float, cfg: PolicyConfig, rng: np.random.Generator) -> int:
    """Sample an index with probability proportional to exp(q/beta(t))."""
    return _boltzmann_pick(np.asarray(q_row, dtype=float), boltzmann_beta(t, cfg), rng.random())


def epsilon(t: float, cfg: PolicyConfig) -> float:
    """Exploration probability: linear decay to zero over the learning phase."""
    if t > cfg.learn_horizon:
        return 0.0
    return min(1.0, max(0.0, cfg.eps1 - cfg.eps2 * t))


def _epsilon_greedy_pick(q_row: np.ndarray, eps: float, u: float, v: float) -> int:
    k = q_row.size
    if u < eps:
        return min(int(v * k), k - 1)
    ties = np.nonzero(q_row == q_row.max())[0]
    return int(ties[min(int(v * ties.size), ties.size - 1)])


def epsilon_greedy_select(q_row: np.ndarray, t: float, cfg: PolicyConfig, rng: np.random.Generator) -> int:
    """Greedy index with probability 1-eps(t), else uniform; ties break uniformly."""
    u, v = rng.random(2)
    return _epsilon_greedy_pick(np.asarray(q_row, dtype=float), epsilon(t, cfg), u, v)


def _ucb_pick(q_row: np.ndarray, visits_row: np.ndarray, t: float, c1: float, u: float) -> int:
    unvisited = np.nonzero(visits_row == 0)[0]
    if unvisited.size:
        return int(unvisited[min(int(u * unvisited.size), unvisited.size - 1)])
    bonus = c1 * np.sqrt(math.log(t) / visits_row)
    return int(np.argmax(q_row + bonus))


def ucb_select(
    q_row: np.ndarray,
    visits_row: np.ndarray,
    t: float,
    cfg: PolicyConfig,
    rng: np.random.Generator,
) -> int:
    """Never-tried indices first (uniformly), else argmax of q plus bonus.

    The caller is responsible for incrementing ``visits_row[selected]``.
    """
    return _ucb_pick(
        np.asarray(q_row, dtype=float), np.asarray(visits_row), t, cfg.c1, rng.random()
    )


def select_all(qtable, t: int, cfg: PolicyConfig, uniforms: np.ndarray) -> np.ndarray:
    """Draw one stored-action index per rule from a (2, n_rules) uniform block.

    Row 0 drives the main draw, row 1 the epsilon-greedy random action or
    tie break.  Consuming a fixed-shape block keeps agent RNG streams
    aligned across policies.
    """
    u, v = uniforms
    n = qtable.n_rules
    sel = np.empty(n, dtype=np.int64)
    if cfg.kind == "boltzmann":
        beta = boltzmann_beta(t, cfg)
        for i in range(n):
            sel[i] = _boltzmann_pick(qtable.q[i], beta, u[i])
    elif cfg.kind == "epsilon_greedy":
        eps = epsilon(t, cfg)
        for i in range(n):
            sel[i] = _epsilon_greedy_pick(qtable.q[i], eps, u[i], v[i])
    else:
        for i in range(n):
            sel[i] = _ucb_pick(qtable.q[i], qtable.visits[i], t, cfg.c1, u[i])
    return sel
