"""Zero-order Takagi-Sugeno fuzzy approximation of the Q-function.

The joint state (both divisions' previous investments) is covered by a
strong fuzzy partition of triangular membership functions; each joint
rule stores q-values for a small grid of candidate actions.  Inference
blends the per-rule selected actions with the rule truth values, and
learning spreads the temporal-difference error over the active rules.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DEFAULT_CENTERS",
    "DEFAULT_ACTIONS",
    "FuzzyPartition",
    "StateVector",
    "QTable",
    "RuleSelection",
    "truth_values",
    "infer_action",
    "infer_q",
    "td_error",
    "update",
    "dump_qtable",
]

DEFAULT_CENTERS = (0.0, 12.5, 25.0, 37.5, 50.0)
DEFAULT_ACTIONS = tuple(float(a) for a in range(0, 51, 5))

# A rule selection is a (n_rules,) int array of stored-action indices.
RuleSelection = np.ndarray


@dataclass(frozen=True, eq=False)
class FuzzyPartition:
    """Triangular strong fuzzy partition over the 2-D joint state space.

    The same strictly increasing centers are used in both dimensions.
    Each membership function peaks at its center with support spanning
    the adjacent centers; the outermost functions are shoulders, so a
    clamped state always carries full membership mass and the grades sum
    to one everywhere (strong partition).
    """

    centers: np.ndarray = field(default_factory=lambda: np.asarray(DEFAULT_CENTERS))

    def __post_init__(self) -> None:
        c = np.asarray(self.centers, dtype=float)
        if c.ndim != 1 or c.size < 2 or not np.all(np.diff(c) > 0):
            raise ValueError("centers must be a strictly increasing 1-D grid")
        object.__setattr__(self, "centers", c)

    @property
    def n_per_dim(self) -> int:
        return int(self.centers.size)

    @property
    def n_rules(self) -> int:
        return int(self.centers.size**2)

    def memberships(self, s: float) -> np.ndarray:
        """Per-dimension membership grades of one scalar state component."""
        c = self.centers
        s = min(max(float(s), c[0]), c[-1])
        out = np.zeros(c.size)
        j = int(np.searchsorted(c, s, side="right")) - 1
        if j >= c.size - 1:
            out[-1] = 1.0
            return out
        w = (s - c[j]) / (c[j + 1] - c[j])
        out[j] = 1.0 - w
        out[j + 1] = w
        return out


@dataclass(frozen=True)
class StateVector:
    """Joint observed state: both divisions' previous investments.

    Components are clamped to the default partition hull on construction.
    """

    s_seller: float
    s_buyer: float

    def __post_init__(self) -> None:
        lo, hi = DEFAULT_CENTERS[0], DEFAULT_CENTERS[-1]
        object.__setattr__(self, "s_seller", min(max(float(self.s_seller), lo), hi))
        object.__setattr__(self, "s_buyer", min(max(float(self.s_buyer), lo), hi))


@dataclass(eq=False)
class QTable:
    """Per-rule q-values, candidate actions, and visit counts.

    ``q[i, k]`` estimates the value of stored action ``k`` under rule
    ``i``; the visit counts feed the UCB policy's uncertainty bonus.
    One table is owned by exactly one agent within one run.
    """

    q: np.ndarray
    stored_actions: np.ndarray
    visits: np.ndarray

    @classmethod
    def zeros(cls, n_rules: int = 25, stored_actions=DEFAULT_ACTIONS) -> "QTable":
        actions = np.asarray(stored_actions, dtype=float)
        if actions.ndim != 1 or actions.size < 2 or not np.all(np.diff(actions) > 0):
            raise ValueError("stored_actions must be a strictly increasing 1-D grid")
        return cls(
            q=np.zeros((n_rules, actions.size)),
            stored_actions=actions,
            visits=np.zeros((n_rules, actions.size), dtype=np.int64),
        )

    @property
    def n_rules(self) -> int:
        return int(self.q.shape[0])

    @property
    def n_actions(self) -> int:
        return int(self.q.shape[1])


def truth_values(partition: FuzzyPartition, state: StateVector) -> np.ndarray:
    """Truth value of every joint rule: product of per-dimension grades.

    Rules are indexed row-major (seller dimension first).  The result
    sums to one for any state.
    """
    mu_s = partition.memberships(state.s_seller)
    mu_b = partition.memberships(state.s_buyer)
    return np.outer(mu_s, mu_b).ravel()


def _weighted_sum(truth: np.ndarray, values: np.ndarray) -> float:
    # Accumulate active rules in index order so the compiled kernel can
    # reproduce the identical floating-point result.
    total = 0.0
    for i in np.nonzero(truth)[0]:
        total += truth[i] * values[i]
    return float(total)


def infer_action(qtable: QTable, truth: np.ndarray, selection: RuleSelection) -> float:
    """Blend the per-rule selected stored actions into one continuous action."""
    return _weighted_sum(truth, qtable.stored_actions[selection])


def infer_q(qtable: QTable, truth: np.ndarray, selection: RuleSelection) -> float:
    """Value estimate of the blended action under the current table."""
    return _weighted_sum(truth, qtable.q[np.arange(qtable.n_rules), selection])


def td_error(
    q_old_inferred: float,
    reward: float,
    next_truth: np.ndarray,
    qtable: QTable,
    learning_rate: float,
    discount: float,
) -> float:
    """Scaled temporal-difference error against the greedy next-state value.

    The greedy value uses the raw per-rule maxima over all stored
    actions, not the policy's selection.
    """
    next_value = _weighted_sum(next_truth, qtable.q.max(axis=1))
    return learning_rate * (reward + discount * next_value - q_old_inferred)


def update(qtable: QTable, truth: np.ndarray, selection: RuleSelection, delta: float) -> None:
    """Spread a TD error over the active rules' selected entries.

    Entries of rules with zero truth are left bit-identical.
    """
    active = np.nonzero(truth)[0]
    qtable.q[active, selection[active]] += truth[active] * delta


def dump_qtable(qtable: QTable, path) -> None:
    """Write (rule index, stored action, q-value, visit count) rows as CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rule_index", "stored_action", "q_value", "visit_count"])
        for i in range(qtable.n_rules):
            for k in range(qtable.n_actions):
                writer.writerow(
                    [
                        i,
                        repr(float(qtable.stored_actions[k])),
                        repr(float(qtable.q[i, k])),
                        int(qtable.visits[i, k]),
                    ]
                )
