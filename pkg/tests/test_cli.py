"""CLI surface: presets, convergence traces, sweeps, exit codes, determinism."""

import pytest

from uavstream.cli import (DEFAULT_GRIDS, SweepSpec, apply_sweep_value, build_parser,
                           cmd_converge, cmd_presets, cmd_sweep, main, read_rows)
from uavstream.scenario import (ConfigError, load_config, table2_config)
from uavstream.subproblems import InfeasibleProblem

read_csv = read_rows    # every emitted CSV must round-trip through the harness reader


class TestPresets:
    def test_table2_round_trip(self, tmp_path):
        assert cmd_presets("table2", tmp_path) == 0
        cfg = load_config(tmp_path / "table2.cfg")
        assert cfg == table2_config()

    def test_table2_reference_values(self, tmp_path):
        cmd_presets("table2", tmp_path)
        cfg = load_config(tmp_path / "table2.cfg")
        assert (cfg.bandwidth_B, cfg.noise_density_N0, cfg.ref_gain_alpha0) == (1e6, 1e-20, 1e-6)
        assert (cfg.height_obs_Ho, cfg.height_relay_Hr, cfg.height_gbs_Hb) == (100.0, 100.0, 20.0)
        assert (cfg.rician_K, cfg.outage_target_rho) == (4.0, 0.01)
        assert (cfg.p_max_obs, cfg.p_max_relay, cfg.p_max_user) == (0.1, 0.1, 0.2)
        assert (cfg.utility_theta, cfg.utility_beta, cfg.playback_rate_rbar) == (0.8, 100.0, 1.0)

    def test_video_scenarios_emit_variants(self, tmp_path):
        assert cmd_presets("video_scenarios", tmp_path) == 0
        files = sorted(p.name for p in tmp_path.glob("*.cfg"))
        assert len(files) == 3
        configs = [load_config(tmp_path / f) for f in files]
        assert len({(c.utility_theta, c.utility_beta, c.playback_rate_rbar)
                    for c in configs}) == 3

    def test_unknown_preset_exit_code(self, tmp_path, capsys):
        assert main(["presets", "table2", "--out", str(tmp_path)]) == 0
        with pytest.raises(SystemExit):      # argparse rejects unknown choice
            main(["presets", "mystery", "--out", str(tmp_path)])


class TestConverge:
    def test_trace_monotone_and_deterministic(self, tmp_path):
        cfg = table2_config(num_users_U=3)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert cmd_converge(cfg, 5, a) == 0
        assert cmd_converge(cfg, 5, b) == 0
        assert a.read_bytes() == b.read_bytes()
        rows = read_csv(a)
        exact = [float(r["exact_objective"]) for r in rows]
        lower = [float(r["lower_bound_objective"]) for r in rows]
        assert all(y >= x - 1e-9 for x, y in zip(exact, exact[1:]))
        assert all(l <= e + 1e-9 for l, e in zip(lower, exact))
        assert [int(r["iteration"]) for r in rows] == list(range(len(rows)))

    def test_iteration_cap_gives_single_row(self, tmp_path):
        cfg = table2_config(num_users_U=3, max_bcd_iters=1)
        out = tmp_path / "one.csv"
        cmd_converge(cfg, 1, out)
        rows = read_csv(out)
        assert len(rows) == 2          # initial point plus exactly one iteration
        assert int(rows[-1]["iteration"]) == 1


class TestSweep:
    def test_rows_schema_and_summary(self, tmp_path):
        cfg = table2_config(num_users_U=2)
        spec = SweepSpec(variable="num_users", grid=(2.0, 3.0), seeds=2,
                         schemes=("joint", "relay_baseline"))
        out = tmp_path / "rows.csv"
        assert cmd_sweep(spec, cfg, 0, out) == 0
        rows = read_csv(out)
        assert len(rows) == 2 * 2 * 2
        assert list(rows[0].keys()) == ["scheme", "sweep_var", "sweep_value", "seed",
                                        "avg_utility", "iters", "wall_ms", "status"]
        assert {r["status"] for r in rows} == {"ok"}
        summary = read_csv(tmp_path / "rows_summary.csv")
        assert len(summary) == 4
        for row in summary:
            assert row["n_seeds"] == "2"

    def test_summary_deterministic_and_worker_independent(self, tmp_path):
        cfg = table2_config(num_users_U=2)
        spec = SweepSpec(variable="rho", grid=(0.01, 0.1), seeds=2, schemes=("relay_baseline",))
        out1, out2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
        cmd_sweep(spec, cfg, 0, out1, workers=1)
        cmd_sweep(spec, cfg, 0, out2, workers=2)
        s1 = (tmp_path / "s1_summary.csv").read_bytes()
        s2 = (tmp_path / "s2_summary.csv").read_bytes()
        assert s1 == s2
        u1 = [r["avg_utility"] for r in read_csv(out1)]
        u2 = [r["avg_utility"] for r in read_csv(out2)]
        assert u1 == u2

    def test_spec_validation(self):
        with pytest.raises(ConfigError):
            SweepSpec(variable="frequency", grid=(1.0,), seeds=1, schemes=("joint",))
        with pytest.raises(ConfigError):
            SweepSpec(variable="rho", grid=(0.5, 0.1), seeds=1, schemes=("joint",))
        with pytest.raises(ConfigError):
            SweepSpec(variable="rho", grid=(0.1, 0.5), seeds=0, schemes=("joint",))
        with pytest.raises(ConfigError):
            SweepSpec(variable="rho", grid=(0.1, 0.5), seeds=1, schemes=("sorcery",))

    def test_power_budget_scales_all_three(self):
        cfg = apply_sweep_value(table2_config(), "power_budget", 0.4)
        assert cfg.p_max_user == pytest.approx(0.4)
        assert cfg.p_max_obs == pytest.approx(0.2)
        assert cfg.p_max_relay == pytest.approx(0.2)

    def test_partial_failure_recorded(self, tmp_path, monkeypatch):
        import uavstream.cli as cli_mod

        def sometimes_infeasible(scenario, scheme):
            if scenario.config.rng_seed == 1:
                raise InfeasibleProblem("forced for test")
            return real(scenario, scheme)

        real = cli_mod.run_benchmark
        monkeypatch.setattr(cli_mod, "run_benchmark", sometimes_infeasible)
        cfg = table2_config(num_users_U=2)
        spec = SweepSpec(variable="rho", grid=(0.01,), seeds=2, schemes=("relay_baseline",))
        out = tmp_path / "partial.csv"
        assert cmd_sweep(spec, cfg, 0, out) == 0
        rows = read_csv(out)
        statuses = {r["seed"]: r["status"] for r in rows}
        assert statuses["0"] == "ok"
        assert statuses["1"] == "infeasible"


class TestMainEntry:
    def test_bad_config_path_exit_1(self, capsys):
        code = main(["converge", "--config", "/nonexistent/x.cfg", "--out", "/tmp/x.csv"])
        assert code == 1
        assert "config error" in capsys.readouterr().err

    def test_invalid_config_contents_exit_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("bandwidth_B = -5\n")
        code = main(["converge", "--config", str(bad), "--out", str(tmp_path / "o.csv")])
        assert code == 1
        assert "config error" in capsys.readouterr().err

    def test_bad_grid_exit_1(self, tmp_path, capsys):
        code = main(["sweep", "--grid", "3,2,1", "--seeds", "1",
                     "--schemes", "relay_baseline", "--out", str(tmp_path / "g.csv")])
        assert code == 1

    def test_infeasible_maps_to_exit_2(self, tmp_path, monkeypatch):
        import uavstream.orchestrator as orch

        def boom(scenario, initial_state=None):
            raise InfeasibleProblem("forced")

        monkeypatch.setattr(orch, "run_algorithm1", boom)
        code = main(["converge", "--out", str(tmp_path / "c.csv")])
        assert code == 2

    def test_default_grids_are_increasing(self):
        for var, grid in DEFAULT_GRIDS.items():
            assert all(b > a for a, b in zip(grid, grid[1:]))

    def test_parser_has_documented_flags(self):
        parser = build_parser()
        text = parser.format_help()
        for sub in ["converge", "sweep", "presets"]:
            assert sub in text
