"""Distribution summaries, one-tailed two-sample tests, and sweep-cell evaluation.

The tests compare per-run mean profits of a sweep cell against its
baseline cell with a positive hypothesized difference (one percent of
the baseline mean), so "significant" means "better than the baseline by
at least one percent".  Per-run means, not pooled per-step observations,
are the samples; pooling would shrink the standard errors through
within-run autocorrelation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import stats as _sps

from .econ import first_best, second_best

__all__ = [
    "ALPHA",
    "VERDICTS",
    "SampleSummary",
    "SweepCell",
    "summarize",
    "welch_one_tailed",
    "wilcoxon_rank_sum_shifted",
    "indicators",
    "verdict_from",
    "weighted_gamma_mean",
    "build_sweep_cell",
]

ALPHA = 0.05
VERDICTS = ("both_significant", "welch_only", "wilcoxon_only", "neither")

# Exhaustive enumeration of rank splits is used up to this many splits;
# beyond it the tie-corrected normal approximation takes over (production
# samples are >= 1000 per side, where the approximation error is negligible).
_MAX_EXACT_SPLITS = 100_000


@dataclass(frozen=True)
class SampleSummary:
    """Moments of a sample; ``degenerate`` flags zero spread (skewness 0 by convention)."""

    n: int
    mean: float
    sd: float
    skewness: float
    degenerate: bool = False


def summarize(samples: Sequence[float]) -> SampleSummary:
    """Mean, sample sd (ddof=1) and skewness (standardized third central moment)."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("cannot summarize an empty sample")
    mean = float(x.mean())
    if x.size < 2:
        return SampleSummary(int(x.size), mean, 0.0, 0.0, degenerate=True)
    centered = x - mean
    m2 = float((centered**2).mean())
    if m2 == 0.0:
        return SampleSummary(int(x.size), mean, 0.0, 0.0, degenerate=True)
    m3 = float((centered**3).mean())
    return SampleSummary(int(x.size), mean, float(x.std(ddof=1)), m3 / m2**1.5)


def welch_one_tailed(sample_a: Sequence[float], sample_b: Sequence[float], d_h: float) -> float:
    """Upper-tail p-value for H1: mean(a) - mean(b) > d_h, unequal variances.

    Welch-Satterthwaite degrees of freedom; a zero-variance pair of
    samples degenerates to a direct mean comparison (p in {0, 1}).
    """
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("both samples need at least two observations")
    if d_h < 0:
        raise ValueError("d_h must be non-negative")
    shifted_diff = a.mean() - b.mean() - d_h
    var_a = a.var(ddof=1) / a.size
    var_b = b.var(ddof=1) / b.size
    se2 = var_a + var_b
    if se2 == 0.0:
        return 0.0 if shifted_diff > 0 else 1.0
    dof = se2**2 / (var_a**2 / (a.size - 1) + var_b**2 / (b.size - 1))
    return float(_sps.t.sf(shifted_diff / math.sqrt(se2), dof))


def wilcoxon_rank_sum_shifted(
    sample_a: Sequence[float], sample_b: Sequence[float], d_h: float
) -> float:
    """One-sided rank-sum p-value for a exceeding b shifted up by d_h.

    Pooled data is midranked.  Small problems are solved by exhaustive
    enumeration of all rank splits (exact, ties included); larger ones
    use the tie-corrected normal approximation.
    """
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float) + d_h
    n_a, n_b = a.size, b.size
    if n_a == 0 or n_b == 0:
        raise ValueError("both samples must be nonempty")
    pooled = np.concatenate([a, b])
    if np.all(pooled == pooled[0]):
        return 0.5
    ranks = _sps.rankdata(pooled)
    w_obs = float(ranks[:n_a].sum())
    n = n_a + n_b
    if math.comb(n, n_a) <= _MAX_EXACT_SPLITS:
        # Midranks are exact binary fractions, so the comparison is exact.
        at_least = sum(1 for idx in combinations(range(n), n_a) if ranks[list(idx)].sum() >= w_obs)
        return at_least / math.comb(n, n_a)
    mu = n_a * (n + 1) / 2.0
    _, tie_sizes = np.unique(pooled, return_counts=True)
    tie_sizes = tie_sizes.astype(float)
    variance = n_a * n_b / 12.0 * ((n + 1) - float((tie_sizes**3 - tie_sizes).sum()) / (n * (n - 1)))
    if variance <= 0.0:
        return 0.5
    return float(_sps.norm.sf((w_obs - mu) / math.sqrt(variance)))


def indicators(
    profit_mean: float, hq_star: float, hq_sb: float, baseline_mean: float
) -> tuple[float, float, float]:
    """(first-best, second-best, baseline) performance indicators.

    fpi normalizes by the highest feasible profit; spi and bpi are
    relative changes against the second-best and baseline profits.
    """
    if hq_star == 0.0 or hq_sb == 0.0 or baseline_mean == 0.0:
        raise ValueError("performance indicator denominators must be nonzero")
    return (
        profit_mean / hq_star,
        (profit_mean - hq_sb) / hq_sb,
        (profit_mean - baseline_mean) / baseline_mean,
    )


def verdict_from(p_welch: float, p_wilcoxon: float, alpha: float = ALPHA) -> str:
    welch_hit = p_welch < alpha
    wilcoxon_hit = p_wilcoxon < alpha
    if welch_hit and wilcoxon_hit:
        return "both_significant"
    if welch_hit:
        return "welch_only"
    if wilcoxon_hit:
        return "wilcoxon_only"
    return "neither"


def weighted_gamma_mean(cells: Iterable[tuple[float, float, str]]) -> Optional[float]:
    """BPI-weighted mean of the margin share over fully significant cells.

    ``cells`` yields (gamma_share, bpi, verdict) triples.  Returns None
    when no cell is fully significant (a sentinel, deliberately not 0).
    """
    numerator = 0.0
    denominator = 0.0
    seen = False
    for gamma_share, bpi, verdict in cells:
        if verdict == "both_significant":
            seen = True
            numerator += gamma_share * bpi
            denominator += bpi
    if not seen or denominator == 0.0:
        return None
    return numerator / denominator


@dataclass(frozen=True)
class SweepCell:
    """Aggregated statistics and test verdicts of one sweep-grid cell."""

    gamma_share: float
    discount: float
    profit_mean: float
    fpi: float
    spi: float
    bpi: float
    p_welch: float
    p_wilcoxon: float
    verdict: str


def build_sweep_cell(batch_results, baseline_results, config) -> SweepCell:
    """Evaluate one cell's batch against its baseline batch.

    ``config`` is the cell's ScenarioConfig; the hypothesized difference
    is one percent of the baseline mean, and the second-best reference
    profit always uses the optimal margin share, not the cell's.
    """
    if not batch_results or not baseline_results:
        raise ValueError("batch and baseline results must be nonempty")
    profits = np.asarray([r.mean_profit_hq for r in batch_results])
    baseline = np.asarray([r.mean_profit_hq for r in baseline_results])
    # A loss-making baseline (only reachable at smoke scale) would flip the
    # one-percent hurdle's sign; floor it at an ordinary one-sided test.
    d_h = max(0.0, float(baseline.mean()) / 100.0)
    p_welch = welch_one_tailed(profits, baseline, d_h)
    p_wilcoxon = wilcoxon_rank_sum_shifted(profits, baseline, d_h)
    profit_mean = float(profits.mean())
    fpi, spi, bpi = indicators(
        profit_mean,
        first_best(config.econ).profit_hq,
        second_best(config.econ).profit_hq,
        float(baseline.mean()),
    )
    return SweepCell(
        gamma_share=config.econ.gamma_share,
        discount=config.discount,
        profit_mean=profit_mean,
        fpi=fpi,
        spi=spi,
        bpi=bpi,
        p_welch=p_welch,
        p_wilcoxon=p_wilcoxon,
        verdict=verdict_from(p_welch, p_wilcoxon),
    )
