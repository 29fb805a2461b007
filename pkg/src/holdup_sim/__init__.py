"""Simulator and analysis toolkit for the hold-up problem under negotiated transfer pricing.

Two boundedly rational divisions, modeled as fuzzy Q-learning agents,
repeatedly choose specific investments; outcomes are compared against
closed-form first-best and second-best equilibria via one-tailed
hypothesis tests and performance indicators.
"""

from .econ import (
    EconParams,
    EquilibriumSolution,
    Realization,
    buyer_revenue,
    contribution_margin,
    division_profits,
    efficient_quantity,
    first_best,
    gamma_second_best,
    hq_profit,
    second_best,
    second_best_at_gamma,
    seller_cost,
)
from .engine import (
    Agent,
    RunResult,
    ScenarioConfig,
    SimulationError,
    StepRecord,
    init_run,
    run_batch,
    run_episode,
    run_episode_reference,
    simulate_run,
    step,
)
from .exploration import (
    POLICY_KINDS,
    PolicyConfig,
    boltzmann_beta,
    boltzmann_probabilities,
    boltzmann_select,
    epsilon,
    epsilon_greedy_select,
    ucb_select,
)
from .fuzzy import (
    DEFAULT_ACTIONS,
    DEFAULT_CENTERS,
    FuzzyPartition,
    QTable,
    StateVector,
    dump_qtable,
    infer_action,
    infer_q,
    td_error,
    truth_values,
    update,
)
from .stats import (
    SampleSummary,
    SweepCell,
    build_sweep_cell,
    indicators,
    summarize,
    verdict_from,
    weighted_gamma_mean,
    welch_one_tailed,
    wilcoxon_rank_sum_shifted,
)
from .sweep import ConfigError, SweepSpec, execute, expand_grid, load_config, run_sweep

__version__ = "0.1.0"
