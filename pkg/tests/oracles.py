"""Independent numerical oracles used by the test suite.

These deliberately avoid the library's own code paths: the t upper tail
comes from direct quadrature of the density, and the rank-sum p-value
from exhaustive enumeration of rank splits.
"""

import math
from itertools import combinations

import numpy as np
from scipy import integrate


def t_sf_by_quadrature(x: float, dof: float) -> float:
    """Upper tail of Student's t by numerical integration of the density.

    Integrates the bounded interval [0, |x|] and uses the symmetry of the
    density, which keeps the quadrature error estimate tight.
    """
    const = math.exp(math.lgamma((dof + 1) / 2) - math.lgamma(dof / 2)) / math.sqrt(dof * math.pi)

    def pdf(u):
        return const * (1 + u * u / dof) ** (-(dof + 1) / 2)

    value, err = integrate.quad(pdf, 0.0, abs(x), limit=400, epsabs=1e-12, epsrel=1e-12)
    assert err < 1e-9
    return 0.5 - value if x >= 0 else 0.5 + value


def welch_stat_and_dof(a, b, d_h):
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    var_a = a.var(ddof=1) / a.size
    var_b = b.var(ddof=1) / b.size
    stat = (a.mean() - b.mean() - d_h) / math.sqrt(var_a + var_b)
    dof = (var_a + var_b) ** 2 / (var_a**2 / (a.size - 1) + var_b**2 / (b.size - 1))
    return stat, dof


def welch_fixtures(count=20, seed=42):
    """Frozen fixture set; the first entry is a hand-written case."""
    rng = np.random.default_rng(seed)
    fixtures = [(np.array([2.1, 2.0, 1.9, 2.2]), np.array([1.0, 1.1, 0.9, 1.0]), 0.5)]
    while len(fixtures) < count:
        n_a = int(rng.integers(3, 60))
        n_b = int(rng.integers(3, 60))
        a = rng.normal(rng.uniform(-5, 5), rng.uniform(0.5, 4), n_a)
        b = rng.normal(rng.uniform(-5, 5), rng.uniform(0.5, 4), n_b)
        fixtures.append((a, b, float(rng.uniform(0, 2))))
    return fixtures


def midranks(values):
    """Average ranks with ties shared, computed from scratch."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def rank_sum_p_by_enumeration(a, b, d_h):
    """Exhaustive permutation oracle: P(rank sum of a >= observed)."""
    pooled = list(a) + [x + d_h for x in b]
    ranks = midranks(pooled)
    observed = sum(ranks[: len(a)])
    n = len(pooled)
    hits = 0
    total = 0
    for idx in combinations(range(n), len(a)):
        total += 1
        if sum(ranks[i] for i in idx) >= observed:
            hits += 1
    return hits / total


def small_rank_sum_cases(seed=9):
    """Two-sample fixtures covering every size pair up to six per side."""
    rng = np.random.default_rng(seed)
    cases = []
    for n_a in range(2, 7):
        for n_b in range(2, 7):
            cases.append((rng.normal(0.5, 1, n_a).round(1), rng.normal(0, 1, n_b).round(1), 0.0))
            cases.append(
                (rng.integers(0, 4, n_a).astype(float), rng.integers(0, 4, n_b).astype(float), 0.3)
            )
    return cases
