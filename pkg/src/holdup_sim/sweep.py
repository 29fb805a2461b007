"""Scenario-grid expansion, batch execution, and analysis-ready outputs.

A sweep varies the margin share, the discount factor, the seller's
marginal cost, the state-variable volatility, and the exploration
policy.  Every grid cell gets a deterministic seed derived from the
master seed and the cell coordinates, so any subset of a sweep can be
reproduced independently and results do not depend on execution order.

Floats in CSV outputs are written with ``repr``, the shortest string
that parses back to the identical double, so re-running with the same
spec yields byte-identical payloads and re-parsing is lossless.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import sys
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .econ import EconParams, gamma_second_best
from .engine import ScenarioConfig, RunResult, run_batch, simulate_run, TRACE_COLUMNS
from .exploration import POLICY_KINDS, PolicyConfig
from .stats import SweepCell, build_sweep_cell, weighted_gamma_mean

__all__ = [
    "ConfigError",
    "SweepSpec",
    "CellSpec",
    "load_config",
    "expand_grid",
    "execute",
    "read_summary",
]

log = logging.getLogger(__name__)

SUMMARY_COLUMNS = (
    "lambda_s",
    "lambda_b",
    "sd_theta",
    "policy",
    "gamma_share",
    "discount",
    "profit_mean",
    "inv_s_mean",
    "inv_b_mean",
    "fpi",
    "spi",
    "bpi",
    "p_welch",
    "p_wilcoxon",
    "verdict",
)

# Marginal-cost values are decimal roundings of simple fractions; inputs
# within half a printed digit snap to the exact rational.
_CANONICAL_LAMBDAS = tuple(
    Fraction(*pair)
    for pair in ((1, 6), (1, 4), (1, 3), (5, 12), (1, 2), (7, 12), (2, 3), (3, 4), (5, 6))
)
_SNAP_TOLERANCE = 0.005


class ConfigError(ValueError):
    """Invalid sweep configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class SweepSpec:
    """Full experiment grid plus the fixed scenario parameters."""

    lambda_s_values: list[float] = field(default_factory=lambda: [0.5])
    gamma_values: list[float] = field(default_factory=lambda: [0.5])
    discount_values: list[float] = field(default_factory=lambda: [0.0])
    sd_values: list[float] = field(default_factory=lambda: [0.0])
    policies: list[str] = field(default_factory=lambda: ["boltzmann"])
    runs: int = 10000
    t_learn: int = 1000
    t_eval: int = 100
    master_seed: int = 0
    output_dir: Path = Path("sweep_out")
    b: float = 12.0
    mean_theta_s: float = 60.0
    mean_theta_b: float = 100.0
    learning_rate: float = 0.5
    beta1: float = 12487.5
    beta2: float = 248.75
    eps1: float = 1.0 + 1.0 / 999.0
    eps2: float = 1.0 / 999.0
    c1: float = 30.0


@dataclass(frozen=True)
class CellSpec:
    """One grid cell: coordinates, runnable config, and its baseline's key."""

    lambda_s: float
    lambda_b: float
    sd_theta: float
    policy: str
    gamma_share: float
    discount: float
    config: ScenarioConfig
    key: tuple
    baseline_key: tuple


def _snap_lambda(value: float) -> float:
    for frac in _CANONICAL_LAMBDAS:
        if abs(value - float(frac)) <= _SNAP_TOLERANCE:
            return float(frac)
    return float(value)


def _lambda_pair(value) -> tuple[float, float]:
    if isinstance(value, str):
        lam = Fraction(value)
        if not 0 < lam < 1:
            raise ConfigError("lambda_s_values", f"{value!r} must lie strictly in (0, 1)")
        return float(lam), float(1 - lam)
    lam = _snap_lambda(float(value))
    for frac in _CANONICAL_LAMBDAS:
        if lam == float(frac):
            return lam, float(1 - frac)
    if not 0.0 < lam < 1.0:
        raise ConfigError("lambda_s_values", f"{value!r} must lie strictly in (0, 1)")
    return lam, 1.0 - lam


_SCALAR_FIELDS = {
    "runs": int,
    "t_learn": int,
    "t_eval": int,
    "master_seed": int,
    "b": float,
    "mean_theta_s": float,
    "mean_theta_b": float,
    "learning_rate": float,
}
_GRID_FIELDS = ("lambda_s_values", "gamma_values", "discount_values", "sd_values", "policies")
_POLICY_PARAM_FIELDS = ("beta1", "beta2", "eps1", "eps2", "c1")


def load_config(path) -> SweepSpec:
    """Parse a YAML sweep config; unspecified fields take the standard defaults.

    An empty file yields the full default spec (b=12, E[theta]=(60,100),
    alpha=0.5, t_learn=1000, t_eval=100, runs=10000 after applying the
    default single-cell grid).
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError("config", f"file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError("config", f"malformed YAML: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a mapping")

    spec = SweepSpec()
    known = set(_SCALAR_FIELDS) | set(_GRID_FIELDS) | {"output_dir", "policy_params"}
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown configuration field")

    for name, cast in _SCALAR_FIELDS.items():
        if name in raw:
            try:
                setattr(spec, name, cast(raw[name]))
            except (TypeError, ValueError) as exc:
                raise ConfigError(name, f"expected {cast.__name__}, got {raw[name]!r}") from exc
    if "output_dir" in raw:
        spec.output_dir = Path(str(raw["output_dir"]))
    params = raw.get("policy_params", {})
    if not isinstance(params, dict):
        raise ConfigError("policy_params", "must be a mapping")
    for name in params:
        if name not in _POLICY_PARAM_FIELDS:
            raise ConfigError(f"policy_params.{name}", "unknown policy parameter")
        setattr(spec, name, float(params[name]))

    for name in _GRID_FIELDS:
        if name in raw:
            value = raw[name]
            if not isinstance(value, list) or not value:
                raise ConfigError(name, "must be a nonempty list")
            setattr(spec, name, value)

    validate_spec(spec)
    return spec


def validate_spec(spec: SweepSpec) -> None:
    for name in _GRID_FIELDS:
        if not getattr(spec, name):
            raise ConfigError(name, "must be a nonempty list")
    spec.lambda_s_values = [_lambda_pair(v)[0] for v in spec.lambda_s_values]
    for g in spec.gamma_values:
        if not 0.0 <= float(g) <= 1.0:
            raise ConfigError("gamma_values", f"{g!r} must lie in [0, 1]")
    if any(float(g) in (0.0, 1.0) for g in spec.gamma_values):
        log.warning(
            "gamma_values contains 0 or 1: one division has no margin share and "
            "no incentive to invest; baseline comparisons are degenerate there"
        )
    spec.gamma_values = [float(g) for g in spec.gamma_values]
    for d in spec.discount_values:
        if not 0.0 <= float(d) < 1.0:
            raise ConfigError("discount_values", f"{d!r} must lie in [0, 1)")
    spec.discount_values = [float(d) for d in spec.discount_values]
    for s in spec.sd_values:
        if float(s) < 0.0:
            raise ConfigError("sd_values", f"{s!r} must be non-negative")
    spec.sd_values = [float(s) for s in spec.sd_values]
    for p in spec.policies:
        if p not in POLICY_KINDS:
            raise ConfigError("policies", f"{p!r} is not one of {POLICY_KINDS}")
    if spec.runs < 0:
        raise ConfigError("runs", "must be non-negative")
    if spec.t_learn < 1 or spec.t_eval < 1:
        raise ConfigError("t_learn/t_eval", "must be at least 1")
    if not 0.0 < spec.learning_rate <= 1.0:
        raise ConfigError("learning_rate", "must lie in (0, 1]")
    if spec.master_seed < 0:
        raise ConfigError("master_seed", "must be non-negative")


def _cell_seed(master_seed: int, key: tuple) -> int:
    payload = f"{master_seed}|" + "|".join(repr(part) for part in key)
    digest = hashlib.blake2b(payload.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1  # keep it a non-negative int64


def _nearest(value: float, grid: list[float]) -> float:
    return min(grid, key=lambda g: abs(g - value))


def expand_grid(spec: SweepSpec) -> list[CellSpec]:
    """Cartesian product of the grid axes, each cell tagged with its baseline.

    The baseline shares every coordinate except the margin share, which
    is the profit-maximizing one rounded to the gamma grid.
    """
    validate_spec(spec)
    cells = []
    for lam_raw in spec.lambda_s_values:
        lam_s, lam_b = _lambda_pair(lam_raw)
        probe = EconParams(
            b=spec.b,
            lambda_s=lam_s,
            lambda_b=lam_b,
            mean_theta_s=spec.mean_theta_s,
            mean_theta_b=spec.mean_theta_b,
        )
        gamma_sb = gamma_second_best(probe)
        gamma_base = _nearest(gamma_sb, spec.gamma_values)
        if abs(gamma_base - gamma_sb) > 1e-9:
            log.info(
                "lambda_s=%.6f: optimal share %.4f is off the gamma grid; baseline uses %.4f",
                lam_s,
                gamma_sb,
                gamma_base,
            )
        for sd in spec.sd_values:
            for policy in spec.policies:
                for gamma in spec.gamma_values:
                    for discount in spec.discount_values:
                        key = (lam_s, sd, policy, gamma, discount)
                        config = ScenarioConfig(
                            econ=EconParams(
                                b=spec.b,
                                lambda_s=lam_s,
                                lambda_b=lam_b,
                                mean_theta_s=spec.mean_theta_s,
                                mean_theta_b=spec.mean_theta_b,
                                sd_theta_s=sd,
                                sd_theta_b=sd,
                                gamma_share=gamma,
                            ),
                            discount=discount,
                            learning_rate=spec.learning_rate,
                            policy=PolicyConfig(
                                kind=policy,
                                beta1=spec.beta1,
                                beta2=spec.beta2,
                                eps1=spec.eps1,
                                eps2=spec.eps2,
                                c1=spec.c1,
                                learn_horizon=spec.t_learn,
                            ),
                            t_learn=spec.t_learn,
                            t_eval=spec.t_eval,
                            runs=spec.runs,
                            master_seed=_cell_seed(spec.master_seed, key),
                        )
                        cells.append(
                            CellSpec(
                                lambda_s=lam_s,
                                lambda_b=lam_b,
                                sd_theta=sd,
                                policy=policy,
                                gamma_share=gamma,
                                discount=discount,
                                config=config,
                                key=key,
                                baseline_key=(lam_s, sd, policy, gamma_base, discount),
                            )
                        )
    return cells


def run_sweep(
    spec: SweepSpec,
    jobs: Optional[int] = None,
    progress=None,
) -> list[tuple[CellSpec, SweepCell, list[RunResult]]]:
    """Run every cell once (baselines shared) and evaluate against baselines."""
    cells = expand_grid(spec)
    by_key: dict[tuple, CellSpec] = {c.key: c for c in cells}
    for cell in cells:
        if cell.baseline_key not in by_key:
            raise ConfigError("gamma_values", "baseline cell missing from the grid")
    batches: dict[tuple, list[RunResult]] = {}
    for index, cell in enumerate(cells):
        if cell.key not in batches:
            started = time.perf_counter()
            batches[cell.key] = run_batch(cell.config, jobs=jobs)
            if progress is not None:
                progress(
                    f"[{index + 1}/{len(cells)}] lambda_s={cell.lambda_s:.4f} sd={cell.sd_theta:g} "
                    f"{cell.policy} gamma={cell.gamma_share:.2f} discount={cell.discount:.2f} "
                    f"({time.perf_counter() - started:.1f}s)"
                )
    rows = []
    for cell in cells:
        sweep_cell = build_sweep_cell(batches[cell.key], batches[cell.baseline_key], cell.config)
        rows.append((cell, sweep_cell, batches[cell.key]))
    return rows


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_summary(path: Path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for cell, stats_cell, batch in rows:
            inv_s = float(np.mean([r.mean_inv_s for r in batch]))
            inv_b = float(np.mean([r.mean_inv_b for r in batch]))
            writer.writerow(
                [
                    _fmt(cell.lambda_s),
                    _fmt(cell.lambda_b),
                    _fmt(cell.sd_theta),
                    cell.policy,
                    _fmt(cell.gamma_share),
                    _fmt(cell.discount),
                    _fmt(stats_cell.profit_mean),
                    _fmt(inv_s),
                    _fmt(inv_b),
                    _fmt(stats_cell.fpi),
                    _fmt(stats_cell.spi),
                    _fmt(stats_cell.bpi),
                    _fmt(stats_cell.p_welch),
                    _fmt(stats_cell.p_wilcoxon),
                    stats_cell.verdict,
                ]
            )


def _group_slug(lam_s: float, sd: float, policy: str) -> str:
    return f"lamS{lam_s:.6f}_sd{sd:g}_{policy}"


def _write_contours(outdir: Path, spec: SweepSpec, rows) -> list[Path]:
    """One matrix CSV per (lambda, sd, policy) group and per quantity.

    Rows are the gamma grid, columns the discount grid, mirroring the
    contour-plot layout.
    """
    written = []
    groups: dict[tuple, dict[tuple, SweepCell]] = {}
    for cell, stats_cell, _ in rows:
        group = (cell.lambda_s, cell.sd_theta, cell.policy)
        groups.setdefault(group, {})[(cell.gamma_share, cell.discount)] = stats_cell
    gammas = sorted(set(spec.gamma_values))
    discounts = sorted(set(spec.discount_values))
    for (lam_s, sd, policy), cells in groups.items():
        slug = _group_slug(lam_s, sd, policy)
        for quantity, getter in (
            ("profit_mean", lambda c: _fmt(c.profit_mean)),
            ("bpi", lambda c: _fmt(c.bpi)),
            ("verdict", lambda c: c.verdict),
        ):
            path = outdir / f"contour_{quantity}__{slug}.csv"
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["gamma_share"] + [_fmt(d) for d in discounts])
                for gamma in gammas:
                    writer.writerow(
                        [_fmt(gamma)] + [getter(cells[(gamma, d)]) for d in discounts]
                    )
            written.append(path)
    return written


def _write_trace(outdir: Path, cell: CellSpec) -> Path:
    records, _, _ = simulate_run(cell.config, 0)
    path = outdir / f"trace_run0__{_group_slug(cell.lambda_s, cell.sd_theta, cell.policy)}" \
                    f"_g{cell.gamma_share:g}_d{cell.discount:g}.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("t",) + TRACE_COLUMNS)
        for t, row in enumerate(records, start=1):
            writer.writerow([t] + [_fmt(float(v)) for v in row])
    return path


def _versions() -> dict:
    import numba
    import scipy

    from . import __version__

    return {
        "holdup_sim": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
    }


def _spec_echo(spec: SweepSpec) -> dict:
    echo = {}
    for name in list(_SCALAR_FIELDS) + list(_GRID_FIELDS) + list(_POLICY_PARAM_FIELDS):
        echo[name] = getattr(spec, name)
    echo["output_dir"] = str(spec.output_dir)
    return echo


def execute(spec: SweepSpec, jobs: Optional[int] = None, trace: bool = False) -> int:
    """Run the whole sweep and write summary, contour CSVs, and manifest.

    The manifest is written up front with an explicit incomplete marker
    and finalized after all outputs land.  Returns a process exit code.
    """
    validate_spec(spec)
    outdir = Path(spec.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest_path = outdir / "manifest.json"
    started = time.perf_counter()
    manifest = {
        "complete": False,
        "master_seed": spec.master_seed,
        "spec": _spec_echo(spec),
        "versions": _versions(),
    }
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")

    rows = run_sweep(spec, jobs=jobs, progress=lambda msg: print(msg, flush=True))

    summary_path = outdir / "summary.csv"
    _write_summary(summary_path, rows)
    outputs = [summary_path]
    outputs += _write_contours(outdir, spec, rows)
    if trace:
        seen = set()
        for cell, _, _ in rows:
            if cell.key not in seen:
                seen.add(cell.key)
                outputs.append(_write_trace(outdir, cell))

    significant = [
        (cell.gamma_share, sc.bpi, sc.verdict) for cell, sc, _ in rows
    ]
    manifest.update(
        {
            "complete": True,
            "n_cells": len(rows),
            "runs_per_cell": spec.runs,
            "weighted_gamma_mean": weighted_gamma_mean(significant),
            "wall_time_s": round(time.perf_counter() - started, 3),
            "outputs": [str(p.name) for p in outputs],
        }
    )
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    return 0


def read_summary(path) -> list[dict]:
    """Parse a summary CSV back into typed rows (lossless for floats)."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            parsed = {}
            for key, value in row.items():
                if key in ("policy", "verdict"):
                    parsed[key] = value
                else:
                    parsed[key] = float(value)
            out.append(parsed)
    return out
