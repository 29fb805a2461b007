"""Published reference equilibria for the standard parameter grid.

The grid uses b=12, E[theta_s]=60, E[theta_b]=100 and the convex cost
split lambda_b = 1 - lambda_s, which makes the symmetric case come out
in integers.  ``check_rows`` re-derives every row from the closed forms
and compares against these reference values at their printed rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .econ import EconParams, first_best, second_best

__all__ = ["BenchmarkRow", "ROWS", "VALUE_NAMES", "TOLERANCE", "check_rows"]

VALUE_NAMES = ("inv_s", "inv_b", "quantity", "profit_s", "profit_b", "profit_hq")

# Expected values are rounded to at most two decimals, so the recomputed
# solutions must match within half of the last printed digit.
TOLERANCE = 0.005


@dataclass(frozen=True)
class BenchmarkRow:
    gamma_share: float
    lambda_s: float
    lambda_b: float
    first_best: tuple[float, float, float, float, float, float]
    second_best: tuple[float, float, float, float, float, float]


def _row(gamma: float, lam_s: Fraction, fb, sb) -> BenchmarkRow:
    return BenchmarkRow(
        gamma_share=gamma,
        lambda_s=float(lam_s),
        lambda_b=float(1 - lam_s),
        first_best=fb,
        second_best=sb,
    )


ROWS: tuple[BenchmarkRow, ...] = (
    _row(0.1, Fraction(5, 6), (10, 50, 8.33, 0, 166.67, 166.67), (0.74, 33.33, 6.17, 22.63, 113.17, 135.80)),
    _row(0.2, Fraction(3, 4), (8, 24, 6, 19.2, 100.8, 120), (1.25, 15, 4.69, 25.78, 77.34, 103.13)),
    _row(0.3, Fraction(2, 3), (8, 16, 5.33, 29.87, 76.8, 106.67), (1.90, 8.89, 4.23, 31.04, 62.08, 93.12)),
    _row(0.4, Fraction(7, 12), (8.70, 12.17, 5.07, 39.70, 61.75, 101.45), (2.78, 5.83, 4.05, 37.13, 51.99, 89.12)),
    _row(0.5, Fraction(1, 2), (10, 10, 5, 50, 50, 100), (4, 4, 4, 44, 44, 88)),
    _row(0.6, Fraction(5, 12), (12.17, 8.70, 5.07, 61.75, 39.70, 101.45), (5.83, 2.78, 4.05, 51.99, 37.13, 89.12)),
    _row(0.7, Fraction(1, 3), (16, 8, 5.33, 76.8, 29.87, 106.67), (8.89, 1.90, 4.23, 62.08, 31.04, 93.12)),
    _row(0.8, Fraction(1, 4), (24, 8, 6, 100.8, 19.2, 120), (15, 1.25, 4.69, 77.34, 25.78, 103.13)),
    _row(0.9, Fraction(1, 6), (50, 10, 8.33, 166.67, 0, 166.67), (33.33, 0.74, 6.17, 113.17, 22.63, 135.80)),
)


@dataclass(frozen=True)
class RowCheck:
    label: str
    passed: bool
    max_abs_error: float
    mismatches: tuple[str, ...]


def _compare(label: str, solution, expected) -> RowCheck:
    computed = (
        solution.inv_s,
        solution.inv_b,
        solution.quantity,
        solution.profit_s,
        solution.profit_b,
        solution.profit_hq,
    )
    errors = [abs(c - e) for c, e in zip(computed, expected)]
    mismatches = tuple(
        f"{name}: got {c:.4f}, expected {e}"
        for name, c, e, err in zip(VALUE_NAMES, computed, expected, errors)
        if err > TOLERANCE + 1e-9
    )
    return RowCheck(label, not mismatches, max(errors), mismatches)


def check_rows() -> list[RowCheck]:
    """Recompute all 18 reference rows; one check result per row."""
    out = []
    for row in ROWS:
        econ = EconParams(
            lambda_s=row.lambda_s, lambda_b=row.lambda_b, gamma_share=row.gamma_share
        )
        out.append(_compare(f"first-best  gamma={row.gamma_share:.1f}", first_best(econ), row.first_best))
    for row in ROWS:
        econ = EconParams(
            lambda_s=row.lambda_s, lambda_b=row.lambda_b, gamma_share=row.gamma_share
        )
        out.append(_compare(f"second-best gamma={row.gamma_share:.1f}", second_best(econ), row.second_best))
    return out
