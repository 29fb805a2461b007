import math

import numpy as np
import pytest
from scipy import stats as sps

from holdup_sim import (
    PolicyConfig,
    boltzmann_beta,
    boltzmann_probabilities,
    boltzmann_select,
    epsilon,
    epsilon_greedy_select,
    ucb_select,
)

CFG = PolicyConfig()


class TestSchedules:
    def test_beta_endpoints_exact(self):
        assert boltzmann_beta(1, CFG) == 50.0
        assert boltzmann_beta(1000, CFG) == 10.0

    def test_beta_strictly_decreasing(self):
        values = [boltzmann_beta(t, CFG) for t in range(1, 1101)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_epsilon_endpoints_exact(self):
        assert epsilon(1, CFG) == 1.0
        assert epsilon(1000, CFG) == 0.0

    def test_epsilon_midpoint(self):
        assert epsilon(500, CFG) == pytest.approx(0.5005, abs=1e-4)

    def test_epsilon_zero_after_learning(self):
        assert epsilon(1001, CFG) == 0.0
        assert epsilon(5000, CFG) == 0.0

    def test_epsilon_clamped(self):
        cfg = PolicyConfig(kind="epsilon_greedy", eps1=2.0, eps2=0.5, learn_horizon=10)
        assert epsilon(1, cfg) == 1.0
        assert epsilon(10, cfg) == 0.0


class TestPolicyConfig:
    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            PolicyConfig(kind="thompson")

    def test_rejects_negative_c1(self):
        with pytest.raises(ValueError):
            PolicyConfig(c1=-1)

    def test_rejects_nonpositive_beta_denominator(self):
        with pytest.raises(ValueError):
            PolicyConfig(beta2=-2.0)


class TestBoltzmann:
    def test_probabilities_normalize(self):
        rng = np.random.default_rng(0)
        for beta in (10.0, 25.0, 50.0):
            for _ in range(50):
                row = rng.normal(0, 200, 11)
                probs = boltzmann_probabilities(row, beta)
                assert abs(probs.sum() - 1.0) < 1e-12
                assert np.all(probs >= 0)

    def test_equal_values_give_uniform(self):
        probs = boltzmann_probabilities(np.zeros(11), 10.0)
        assert probs == pytest.approx(np.full(11, 1 / 11))

    def test_probability_ratio_is_exponential(self):
        probs = boltzmann_probabilities(np.array([10.0, 0.0]), 10.0)
        assert probs[0] / probs[1] == pytest.approx(math.e)

    def test_tiny_beta_selects_argmax(self):
        cfg = PolicyConfig(beta1=1e-9, beta2=0.0)
        rng = np.random.default_rng(3)
        row = np.array([1.0, 8.0, 3.0, -2.0])
        assert all(boltzmann_select(row, 1, cfg, rng) == 1 for _ in range(50))

    def test_no_overflow_with_large_values(self):
        rng = np.random.default_rng(4)
        row = np.array([900.0, 880.0, 500.0])
        probs = boltzmann_probabilities(row, 10.0)
        assert np.isfinite(probs).all()
        assert boltzmann_select(row, 1000, CFG, rng) in (0, 1, 2)

    def test_shift_invariance_frequency(self):
        # Adding a constant to the whole row must not change the selection
        # distribution: two-sample chi-square on 1e5 draws each.
        row = np.array([0.0, 5.0, 10.0, 15.0, 20.0])
        rng_a = np.random.default_rng(11)
        rng_b = np.random.default_rng(12)
        n = 100_000
        t = 500
        counts_a = np.bincount(
            [boltzmann_select(row, t, CFG, rng_a) for _ in range(n)], minlength=5
        )
        counts_b = np.bincount(
            [boltzmann_select(row + 123.4, t, CFG, rng_b) for _ in range(n)], minlength=5
        )
        _, p, _, _ = sps.chi2_contingency(np.vstack([counts_a, counts_b]))
        assert p > 0.001

    def test_frequencies_match_probabilities(self):
        row = np.array([0.0, 10.0, 20.0])
        beta = boltzmann_beta(200, CFG)
        expected = boltzmann_probabilities(row, beta)
        rng = np.random.default_rng(21)
        n = 100_000
        counts = np.bincount(
            [boltzmann_select(row, 200, CFG, rng) for _ in range(n)], minlength=3
        )
        _, p = sps.chisquare(counts, expected * n)
        assert p > 0.001


class TestEpsilonGreedy:
    def test_exploit_is_argmax(self):
        cfg = PolicyConfig(kind="epsilon_greedy", eps1=0.0, eps2=0.0)
        rng = np.random.default_rng(5)
        row = np.array([3.0, 9.0, 1.0])
        assert all(epsilon_greedy_select(row, 1, cfg, rng) == 1 for _ in range(50))

    def test_full_exploration_is_uniform(self):
        cfg = PolicyConfig(kind="epsilon_greedy", eps1=1.0, eps2=0.0)
        rng = np.random.default_rng(6)
        row = np.array([3.0, 9.0, 1.0, 0.0])
        n = 40_000
        counts = np.bincount(
            [epsilon_greedy_select(row, 1, cfg, rng) for _ in range(n)], minlength=4
        )
        _, p = sps.chisquare(counts)
        assert p > 0.001

    def test_ties_break_uniformly(self):
        cfg = PolicyConfig(kind="epsilon_greedy", eps1=0.0, eps2=0.0)
        rng = np.random.default_rng(7)
        row = np.array([5.0, 1.0, 5.0, 5.0])
        n = 30_000
        counts = np.bincount(
            [epsilon_greedy_select(row, 1, cfg, rng) for _ in range(n)], minlength=4
        )
        assert counts[1] == 0
        _, p = sps.chisquare(counts[[0, 2, 3]])
        assert p > 0.001


class TestUcb:
    def test_all_unvisited_is_uniform(self):
        rng = np.random.default_rng(8)
        row = np.zeros(6)
        visits = np.zeros(6, dtype=np.int64)
        n = 30_000
        counts = np.bincount(
            [ucb_select(row, visits, 1, CFG, rng) for _ in range(n)], minlength=6
        )
        _, p = sps.chisquare(counts)
        assert p > 0.001

    def test_unvisited_always_preferred(self):
        rng = np.random.default_rng(9)
        row = np.array([100.0, 100.0, -5.0, 100.0])
        visits = np.array([3, 7, 0, 2], dtype=np.int64)
        assert all(ucb_select(row, visits, 50, CFG, rng) == 2 for _ in range(50))

    def test_zero_c1_is_argmax(self):
        cfg = PolicyConfig(kind="ucb", c1=0.0)
        rng = np.random.default_rng(10)
        row = np.array([1.0, 4.0, 2.0])
        visits = np.array([5, 1, 9], dtype=np.int64)
        assert all(ucb_select(row, visits, 100, cfg, rng) == 1 for _ in range(20))

    def test_bonus_ratio(self):
        # At t=e the log term is 1, so the bonuses are c1*(1 vs 1/10).
        rng = np.random.default_rng(11)
        row = np.array([0.0, 0.0])
        visits = np.array([1, 100], dtype=np.int64)
        assert ucb_select(row, visits, math.e, CFG, rng) == 0


def test_exploiting_policies_agree_on_distinct_rows():
    eps_cfg = PolicyConfig(kind="epsilon_greedy", eps1=0.0, eps2=0.0)
    ucb_cfg = PolicyConfig(kind="ucb", c1=0.0)
    rng = np.random.default_rng(12)
    for _ in range(200):
        row = rng.normal(0, 10, 11)
        visits = rng.integers(1, 50, 11)
        expected = int(np.argmax(row))
        assert epsilon_greedy_select(row, 1, eps_cfg, rng) == expected
        assert ucb_select(row, visits, 17, ucb_cfg, rng) == expected
