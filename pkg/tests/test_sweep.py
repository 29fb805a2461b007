import json
import math

import pytest

from holdup_sim import ConfigError, SweepSpec, expand_grid, load_config
from holdup_sim.cli import main
from holdup_sim.sweep import execute, read_summary, validate_spec


def write_config(tmp_path, text):
    path = tmp_path / "sweep.yaml"
    path.write_text(text)
    return path


class TestLoadConfig:
    def test_empty_file_gives_full_defaults(self, tmp_path):
        spec = load_config(write_config(tmp_path, ""))
        assert spec.b == 12.0
        assert (spec.mean_theta_s, spec.mean_theta_b) == (60.0, 100.0)
        assert spec.learning_rate == 0.5
        assert (spec.t_learn, spec.t_eval) == (1000, 100)
        assert spec.runs == 10000
        assert spec.lambda_s_values == [0.5]

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.yaml")

    def test_malformed_yaml(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(write_config(tmp_path, "runs: [unclosed"))

    def test_unknown_field_is_named(self, tmp_path):
        with pytest.raises(ConfigError, match="wobble"):
            load_config(write_config(tmp_path, "wobble: 3"))

    def test_bad_gamma_named(self, tmp_path):
        with pytest.raises(ConfigError, match="gamma_values"):
            load_config(write_config(tmp_path, "gamma_values: [1.5]"))

    def test_lambda_snaps_to_exact_rationals(self, tmp_path):
        spec = load_config(
            write_config(tmp_path, "lambda_s_values: [0.83, 0.58, 0.67, '5/6']")
        )
        assert spec.lambda_s_values == [5 / 6, 7 / 12, 2 / 3, 5 / 6]

    def test_degenerate_gamma_warns(self, tmp_path, caplog):
        with caplog.at_level("WARNING"):
            load_config(write_config(tmp_path, "gamma_values: [0.0, 0.5]"))
        assert any("no incentive" in message for message in caplog.messages)

    def test_policy_params_override(self, tmp_path):
        spec = load_config(write_config(tmp_path, "policy_params: {c1: 12.5}"))
        assert spec.c1 == 12.5

    def test_empty_grid_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="policies"):
            load_config(write_config(tmp_path, "policies: []"))


class TestExpandGrid:
    def test_lambda_b_is_complement(self):
        spec = SweepSpec(lambda_s_values=[5 / 6], runs=1, t_learn=5, t_eval=2)
        cell = expand_grid(spec)[0]
        assert cell.lambda_b == pytest.approx(1 / 6)
        assert cell.lambda_s + cell.lambda_b == pytest.approx(1.0)

    def test_scenario3_grid_size(self):
        spec = SweepSpec(
            lambda_s_values=[0.5, 5 / 6],
            gamma_values=[round(0.1 * k, 1) for k in range(1, 10)],
            discount_values=[round(0.1 * k, 1) for k in range(10)],
            runs=1,
        )
        assert len(expand_grid(spec)) == 180

    def test_scenario4_grid_size(self):
        spec = SweepSpec(
            lambda_s_values=[0.5, 7 / 12, 2 / 3, 3 / 4, 5 / 6],
            gamma_values=[round(0.1 * k, 1) for k in range(1, 10)],
            discount_values=[round(0.1 * k, 1) for k in range(10)],
            sd_values=[0.0, 5.0, 10.0],
            policies=["boltzmann", "epsilon_greedy", "ucb"],
            runs=1,
        )
        assert len(expand_grid(spec)) == 5 * 9 * 10 * 3 * 3

    def test_single_point_grid_is_its_own_baseline(self):
        spec = SweepSpec(runs=1)
        cells = expand_grid(spec)
        assert len(cells) == 1
        assert cells[0].key == cells[0].baseline_key

    def test_baseline_tagging_uses_optimal_share(self):
        spec = SweepSpec(
            lambda_s_values=[5 / 6],
            gamma_values=[round(0.1 * k, 1) for k in range(1, 10)],
            discount_values=[0.0, 0.9],
            runs=1,
        )
        for cell in expand_grid(spec):
            assert cell.baseline_key == (cell.lambda_s, cell.sd_theta, cell.policy, 0.1, cell.discount)

    def test_off_grid_baseline_snaps_to_nearest(self, caplog):
        spec = SweepSpec(gamma_values=[0.3, 0.7], runs=1)  # optimal share 0.5 not on grid
        with caplog.at_level("INFO"):
            cells = expand_grid(spec)
        assert cells[0].baseline_key[3] in (0.3, 0.7)

    def test_deterministic_ordering_and_seeds(self):
        spec = SweepSpec(gamma_values=[0.3, 0.5, 0.7], discount_values=[0.0, 0.5], runs=1)
        first = [(c.key, c.config.master_seed) for c in expand_grid(spec)]
        second = [(c.key, c.config.master_seed) for c in expand_grid(spec)]
        assert first == second
        assert len({seed for _, seed in first}) == len(first)

    def test_distinct_master_seeds_give_distinct_cell_seeds(self):
        spec_a = SweepSpec(runs=1, master_seed=1)
        spec_b = SweepSpec(runs=1, master_seed=2)
        assert expand_grid(spec_a)[0].config.master_seed != expand_grid(spec_b)[0].config.master_seed


def tiny_spec(tmp_path, **overrides):
    spec = SweepSpec(
        gamma_values=[0.4, 0.5],
        discount_values=[0.0],
        runs=6,
        t_learn=40,
        t_eval=10,
        master_seed=777,
        output_dir=tmp_path / "out",
    )
    for key, value in overrides.items():
        setattr(spec, key, value)
    return spec


class TestExecute:
    def test_outputs_and_manifest(self, tmp_path):
        spec = tiny_spec(tmp_path)
        assert execute(spec, jobs=1) == 0
        outdir = spec.output_dir
        rows = read_summary(outdir / "summary.csv")
        assert len(rows) == 2
        manifest = json.loads((outdir / "manifest.json").read_text())
        assert manifest["complete"] is True
        assert manifest["n_cells"] == 2
        assert manifest["master_seed"] == 777
        assert set(manifest["versions"]) >= {"holdup_sim", "python", "numpy", "scipy", "numba"}
        contours = sorted(p.name for p in outdir.glob("contour_*.csv"))
        assert len(contours) == 3  # profit_mean, bpi, verdict for the single group
        baseline_row = [r for r in rows if r["gamma_share"] == 0.5][0]
        assert baseline_row["bpi"] == 0.0
        assert baseline_row["verdict"] == "neither"

    def test_rerun_is_byte_identical(self, tmp_path):
        spec_a = tiny_spec(tmp_path, output_dir=tmp_path / "a")
        spec_b = tiny_spec(tmp_path, output_dir=tmp_path / "b")
        execute(spec_a, jobs=1)
        execute(spec_b, jobs=2)
        for name in [p.name for p in (tmp_path / "a").glob("*.csv")]:
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_summary_round_trips_floats_exactly(self, tmp_path):
        from holdup_sim.sweep import run_sweep

        spec = tiny_spec(tmp_path)
        rows = run_sweep(spec, jobs=1)
        execute(spec, jobs=1)
        parsed = read_summary(spec.output_dir / "summary.csv")
        by_gamma = {r["gamma_share"]: r for r in parsed}
        for cell, stats_cell, _ in rows:
            row = by_gamma[cell.gamma_share]
            assert row["profit_mean"] == stats_cell.profit_mean
            assert row["p_welch"] == stats_cell.p_welch
            assert row["bpi"] == stats_cell.bpi

    def test_trace_flag_writes_trace(self, tmp_path):
        spec = tiny_spec(tmp_path)
        execute(spec, jobs=1, trace=True)
        traces = list(spec.output_dir.glob("trace_run0__*.csv"))
        assert len(traces) == 2
        header = traces[0].read_text().splitlines()[0]
        assert header.startswith("t,inv_s,inv_b,theta_s,theta_b,quantity,profit_s,profit_b,profit_hq")


class TestCli:
    def test_verify_tables_passes(self, capsys):
        assert main(["verify-tables"]) == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 18
        assert "FAIL" not in out

    def test_run_smoke_and_summarize(self, tmp_path, capsys):
        config = tmp_path / "cfg.yaml"
        config.write_text(
            "gamma_values: [0.4, 0.5]\ndiscount_values: [0.0]\n"
            f"runs: 5\nt_learn: 30\nt_eval: 10\noutput_dir: {tmp_path / 'out'}\n"
        )
        assert main(["run", str(config), "--jobs", "1"]) == 0
        assert main(["summarize", str(tmp_path / "out")]) == 0
        out = capsys.readouterr().out
        assert "verdicts" in out
        assert "weighted gamma mean" in out

    def test_run_override_flags(self, tmp_path):
        config = tmp_path / "cfg.yaml"
        config.write_text("gamma_values: [0.5]\nruns: 99\nt_learn: 30\nt_eval: 10\n")
        out = tmp_path / "alt"
        assert main(["run", str(config), "--runs", "4", "--seed", "3", "--out", str(out)]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["runs_per_cell"] == 4
        assert manifest["master_seed"] == 3

    def test_bad_config_exits_one(self, tmp_path):
        config = tmp_path / "cfg.yaml"
        config.write_text("gamma_values: [2.0]\n")
        assert main(["run", str(config)]) == 1

    def test_missing_config_exits_one(self, tmp_path):
        assert main(["run", str(tmp_path / "absent.yaml")]) == 1
