"""Per-run event loop of the agent-based simulation.

Each run initializes two fuzzy Q-learning divisions with empty tables,
then repeats for ``t_learn + t_eval`` steps: select per-rule action
indices, infer the continuous investments, draw the state variables,
trade at the efficient quantity, realize division profits as rewards,
and apply the TD update.  Learning never stops; only the exploration
schedules reach their exploit regime.  A run's result is the mean over
the final ``t_eval`` steps.

All randomness of a run is pre-drawn at initialization from per-agent
streams seeded by (master_seed, run_index), in a fixed order: one
uniform for the agent's own initial state component, a
(t_total, 2, n_rules) block of selection uniforms, then t_total standard
normals for the agent's own state variable.  A run is therefore a pure
function of (config, run_index) and batches are reproducible under any
degree of parallelism.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import _kernel
from .econ import EconParams, Realization, division_profits, efficient_quantity
from .exploration import POLICY_KINDS, PolicyConfig, select_all
from .fuzzy import (
    FuzzyPartition,
    QTable,
    StateVector,
    infer_action,
    infer_q,
    td_error,
    truth_values,
    update,
)

__all__ = [
    "ScenarioConfig",
    "Agent",
    "StepRecord",
    "RunResult",
    "SimulationError",
    "TRACE_COLUMNS",
    "init_run",
    "step",
    "run_episode",
    "run_episode_reference",
    "run_batch",
]

log = logging.getLogger(__name__)

TRACE_COLUMNS = (
    "inv_s",
    "inv_b",
    "theta_s",
    "theta_b",
    "quantity",
    "profit_s",
    "profit_b",
    "profit_hq",
)


class SimulationError(RuntimeError):
    """A run produced a non-finite outcome (diagnostic in the message)."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Full definition of one simulation experiment."""

    econ: EconParams = EconParams()
    discount: float = 0.0
    learning_rate: float = 0.5
    policy: PolicyConfig = PolicyConfig()
    t_learn: int = 1000
    t_eval: int = 100
    runs: int = 10000
    master_seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.discount < 1.0:
            raise ValueError("discount must lie in [0, 1); at 1 the Q-function diverges")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must lie in (0, 1]")
        if self.t_learn < 1 or self.t_eval < 1:
            raise ValueError("t_learn and t_eval must be at least 1")
        if self.runs < 0:
            raise ValueError("runs must be non-negative")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")
        # The policy's schedule horizon follows the scenario's learning phase.
        if self.policy.learn_horizon != self.t_learn:
            object.__setattr__(self, "policy", replace(self.policy, learn_horizon=self.t_learn))

    @property
    def t_total(self) -> int:
        return self.t_learn + self.t_eval


@dataclass(eq=False)
class Agent:
    """One division's learning state plus its pre-drawn noise for the run."""

    role: str  # "seller" | "buyer"
    qtable: QTable
    partition: FuzzyPartition
    rng: np.random.Generator
    select_noise: np.ndarray  # (t_total, 2, n_rules) uniforms
    theta_noise: np.ndarray  # (t_total,) standard normals


class StepRecord(NamedTuple):
    inv_s: float
    inv_b: float
    theta_s: float
    theta_b: float
    quantity: float
    profit_s: float
    profit_b: float
    profit_hq: float


@dataclass(frozen=True, eq=False)
class RunResult:
    """Evaluation-window means of one run, plus an optional full trace."""

    mean_inv_s: float
    mean_inv_b: float
    mean_profit_hq: float
    mean_profit_s: float
    mean_profit_b: float
    trace: Optional[np.ndarray] = None  # (t_total, len(TRACE_COLUMNS))


def init_run(config: ScenarioConfig, run_index: int) -> tuple[Agent, Agent, StateVector]:
    """Create both agents and the shared initial joint state for one run.

    Both q-tables start at zero; each agent's initial state component is
    drawn uniformly from the partition hull from its own stream.
    """
    if run_index < 0:
        raise ValueError("run_index must be non-negative")
    root = np.random.SeedSequence([int(config.master_seed), int(run_index)])
    partition = FuzzyPartition()
    lo, hi = partition.centers[0], partition.centers[-1]
    t_total = config.t_total
    agents = []
    components = []
    for role, seed in zip(("seller", "buyer"), root.spawn(2)):
        rng = np.random.default_rng(seed)
        components.append(lo + (hi - lo) * rng.random())
        agents.append(
            Agent(
                role=role,
                qtable=QTable.zeros(partition.n_rules),
                partition=partition,
                rng=rng,
                select_noise=rng.random((t_total, 2, partition.n_rules)),
                theta_noise=rng.standard_normal(t_total),
            )
        )
    return agents[0], agents[1], StateVector(components[0], components[1])


def step(
    agents: tuple[Agent, Agent],
    state: StateVector,
    t: int,
    config: ScenarioConfig,
    forced_selections: Optional[Sequence[Optional[np.ndarray]]] = None,
) -> tuple[StateVector, StepRecord]:
    """Advance one time step; returns (next_state, record).

    Reference implementation built from the module-level operations; the
    compiled kernel in ``run_episode`` replays the same arithmetic.
    ``forced_selections`` is a test hook: a (seller, buyer) pair of
    per-rule index vectors that bypasses the exploration policy (a None
    entry keeps the policy for that agent).
    """
    if not 1 <= t <= config.t_total:
        raise ValueError(f"t must lie in [1, {config.t_total}]")
    seller, buyer = agents
    econ = config.econ
    truth = truth_values(seller.partition, state)

    selections = []
    investments = []
    for idx, agent in enumerate((seller, buyer)):
        forced = None if forced_selections is None else forced_selections[idx]
        if forced is None:
            sel = select_all(agent.qtable, t, config.policy, agent.select_noise[t - 1])
        else:
            sel = np.asarray(forced, dtype=np.int64)
        agent.qtable.visits[np.arange(agent.qtable.n_rules), sel] += 1
        selections.append(sel)
        investments.append(infer_action(agent.qtable, truth, sel))

    theta_s = econ.mean_theta_s + econ.sd_theta_s * seller.theta_noise[t - 1]
    theta_b = econ.mean_theta_b + econ.sd_theta_b * buyer.theta_noise[t - 1]
    quantity = efficient_quantity(theta_s, theta_b, investments[0], investments[1], econ.b)
    profit_s, profit_b = division_profits(
        Realization(theta_s=theta_s, theta_b=theta_b, inv_s=investments[0], inv_b=investments[1]),
        econ,
    )
    profit_hq = profit_s + profit_b
    record = StepRecord(
        investments[0], investments[1], theta_s, theta_b, quantity, profit_s, profit_b, profit_hq
    )
    if not all(map(math.isfinite, record)):
        raise SimulationError(f"non-finite outcome at t={t}: {record}")

    next_state = StateVector(investments[0], investments[1])
    next_truth = truth_values(seller.partition, next_state)
    for agent, sel, reward in zip((seller, buyer), selections, (profit_s, profit_b)):
        q_old = infer_q(agent.qtable, truth, sel)
        delta = td_error(q_old, reward, next_truth, agent.qtable, config.learning_rate, config.discount)
        update(agent.qtable, truth, sel, delta)

    return next_state, record


def _result_from_records(records: np.ndarray, t_eval: int, trace: bool) -> RunResult:
    window = records[-t_eval:]
    return RunResult(
        mean_inv_s=float(window[:, 0].mean()),
        mean_inv_b=float(window[:, 1].mean()),
        mean_profit_hq=float(window[:, 7].mean()),
        mean_profit_s=float(window[:, 5].mean()),
        mean_profit_b=float(window[:, 6].mean()),
        trace=records if trace else None,
    )


def simulate_run(
    config: ScenarioConfig, run_index: int
) -> tuple[np.ndarray, Agent, Agent]:
    """Run one episode on the compiled kernel.

    Returns the full (t_total, 8) record array plus both agents with
    their final q-tables and visit counts.
    """
    seller, buyer, state = init_run(config, run_index)
    econ = config.econ
    policy = config.policy
    records = np.empty((config.t_total, len(TRACE_COLUMNS)))
    failed_at = _kernel.simulate(
        econ.b,
        econ.lambda_s,
        econ.lambda_b,
        econ.mean_theta_s,
        econ.mean_theta_b,
        econ.sd_theta_s,
        econ.sd_theta_b,
        econ.gamma_share,
        config.learning_rate,
        config.discount,
        POLICY_KINDS.index(policy.kind),
        policy.beta1,
        policy.beta2,
        policy.eps1,
        policy.eps2,
        policy.c1,
        config.t_learn,
        seller.partition.centers,
        seller.qtable.stored_actions,
        seller.qtable.q,
        buyer.qtable.q,
        seller.qtable.visits,
        buyer.qtable.visits,
        state.s_seller,
        state.s_buyer,
        seller.select_noise,
        buyer.select_noise,
        seller.theta_noise,
        buyer.theta_noise,
        records,
    )
    if failed_at:
        raise SimulationError(f"run {run_index}: non-finite outcome at t={failed_at}")
    return records, seller, buyer


def run_episode(config: ScenarioConfig, run_index: int, *, trace: bool = False) -> RunResult:
    """Simulate one full run and aggregate the evaluation window."""
    records, _, _ = simulate_run(config, run_index)
    return _result_from_records(records, config.t_eval, trace)


def run_episode_reference(
    config: ScenarioConfig, run_index: int, *, trace: bool = False
) -> RunResult:
    """Pure-Python twin of :func:`run_episode`; slow, used for validation."""
    seller, buyer, state = init_run(config, run_index)
    records = np.empty((config.t_total, len(TRACE_COLUMNS)))
    for t in range(1, config.t_total + 1):
        state, record = step((seller, buyer), state, t, config)
        records[t - 1] = record
    return _result_from_records(records, config.t_eval, trace)


def _episode_task(args: tuple[ScenarioConfig, int]):
    config, run_index = args
    try:
        return run_episode(config, run_index)
    except SimulationError as exc:
        return (run_index, str(exc))


def run_batch(config: ScenarioConfig, jobs: Optional[int] = None) -> list[RunResult]:
    """Execute ``config.runs`` independent episodes.

    Results are keyed by run index, so they are identical for any worker
    count or execution order.  Failed runs are logged and skipped; the
    batch only raises if every run failed.
    """
    if config.runs == 0:
        return []
    tasks = [(config, i) for i in range(config.runs)]
    if not jobs or jobs <= 1:
        outcomes = [_episode_task(task) for task in tasks]
    else:
        chunk = max(1, config.runs // (jobs * 8))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_episode_task, tasks, chunksize=chunk))
    results = [r for r in outcomes if isinstance(r, RunResult)]
    failures = [r for r in outcomes if not isinstance(r, RunResult)]
    for run_index, message in failures:
        log.warning("run %d failed: %s", run_index, message)
    if failures and not results:
        raise SimulationError(f"all {config.runs} runs failed; first: {failures[0][1]}")
    return results
