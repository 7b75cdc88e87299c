"""Sweep harness, figure presets, config files, CSV output and the CLI."""

import subprocess
import sys

import numpy as np
import pytest

from splitrx import (ChannelVector, ConfigError, McSettings, SweepSpec,
                     build_sweep_spec, figure, gain_asymptotic, optimal_rho,
                     parse_config_file, run_sweep)
from splitrx.cli import main
from splitrx.sweep import DEFAULT_NOISE, _parse_grid

TINY_MC = McSettings(n_joint=60_000, n_outer=30, n_inner=1500)


def rho_sweep_spec(power, methods=("closed-form",), mc=None, seed=0):
    return SweepSpec(variable="rho-shared", grid=np.round(np.arange(1, 50) * 0.02, 10),
                     channel=ChannelVector([1.0, 1.0]), noise=DEFAULT_NOISE,
                     power=power, scheme="explicit", alpha=[0.5, 0.5],
                     beta=[0.5, 0.5], methods=methods, mc=mc or McSettings(),
                     seed=seed)


class TestRunSweep:

    @pytest.mark.parametrize("power", [10.0, 100.0, 1000.0])
    def test_rho_sweep_peaks_near_optimum(self, power):
        """The closed-form curve peaks at nearly the same ratio for every power."""
        table = run_sweep(rho_sweep_spec(power))
        assert len(table.rows) == 49
        mi = table.column("closed_form")
        best_rho = table.column("rho")[np.argmax(mi)]
        assert abs(best_rho - 0.56) <= 0.021

    def test_grid_order_preserved_and_parallel_equal(self):
        spec = rho_sweep_spec(100.0)
        serial = run_sweep(spec, threads=1)
        parallel = run_sweep(spec, threads=3)
        assert serial.csv_text() == parallel.csv_text()
        np.testing.assert_array_equal(serial.column("rho"), spec.grid)

    def test_monte_carlo_columns_and_determinism(self):
        spec = SweepSpec(variable="rho-shared", grid=[0.3, 0.56],
                         channel=ChannelVector([1.0]), noise=DEFAULT_NOISE,
                         power=100.0, scheme="explicit", alpha=[1.0], beta=[1.0],
                         methods=("closed-form", "monte-carlo"), mc=TINY_MC, seed=5)
        a = run_sweep(spec)
        b = run_sweep(spec, threads=2)
        assert a.columns == ["rho", "closed_form", "monte_carlo", "monte_carlo_stderr"]
        assert a.csv_text() == b.csv_text()
        assert np.all(a.column("monte_carlo_stderr") > 0)

    def test_invalid_specs_rejected(self):
        import dataclasses
        with pytest.raises(ConfigError) as err:
            run_sweep(dataclasses.replace(rho_sweep_spec(100.0), variable="bogus"))
        assert err.value.code == "invalid-sweep"

    def test_failure_identifies_grid_point(self):
        spec = SweepSpec(variable="power", grid=[10.0, 100.0],
                         channel=ChannelVector([1.0, 2.0]), noise=DEFAULT_NOISE,
                         power=1.0, scheme="explicit", alpha=[1.0], beta=[1.0],
                         methods=("closed-form",))
        with pytest.raises(ConfigError) as err:
            run_sweep(spec)
        assert "grid point" in str(err.value)


class TestFigures:

    def test_fig3_grid_peak(self):
        table = figure("fig3")
        assert len(table.rows) == 49 * 49
        assert table.columns == ["rho1", "rho2", "closed_form"]
        mi = table.column("closed_form")
        i = int(np.argmax(mi))
        assert abs(mi[i] - 14.96) <= 0.05
        assert abs(table.rows[i][0] - 0.56) <= 0.01
        assert abs(table.rows[i][1] - 0.56) <= 0.01

    def test_fig4_scheme_ordering(self):
        table = figure("fig4")
        optimal = table.column("closed_form")
        egc = table.column("egc")
        mrc = table.column("mrc")
        assert np.all(optimal >= mrc - 1e-12)
        assert np.all(mrc >= egc - 1e-12)

    def test_fig5_gap(self):
        table = figure("fig5")
        assert len(table.rows) == 300
        best = table.column("closed_form")
        cd = table.column("cd_baseline")
        assert np.all(best > cd)
        k = table.column("antennas")
        p = table.column("power")
        pick = (k == 10) & (p == 100.0)
        gap = best[pick][0] - cd[pick][0]
        assert abs(gap - 1.69) <= 0.02

    def test_fig6_convergence(self):
        table = figure("fig6")
        assert table.columns == ["antennas", "power", "gain"]
        k = table.column("antennas")
        p = table.column("power")
        g = table.column("gain")
        asym = gain_asymptotic(DEFAULT_NOISE, optimal_rho(DEFAULT_NOISE)[0]).gain_bits
        high = p >= 100.0
        assert np.all(np.abs(g[high] - asym) <= 0.05)
        for power in np.unique(p[p >= 100.0]):
            spread = g[p == power].max() - g[p == power].min()
            assert spread <= 0.05

    def test_unknown_figure(self):
        with pytest.raises(ConfigError) as err:
            figure("fig9")
        assert err.value.code == "unknown-figure"

    def test_fig2_csv_reproducible(self):
        """Byte-identical output for the same seed and any worker count."""
        a = figure("fig2", mc=TINY_MC, seed=3)
        b = figure("fig2", mc=TINY_MC, seed=3, threads=2)
        assert a.csv_text() == b.csv_text()
        assert len(a.rows) == 3 * 49
        assert a.columns == ["power", "rho", "closed_form", "monte_carlo",
                             "monte_carlo_stderr"]


class TestConfigFiles:

    def test_parse_and_build(self, tmp_path):
        path = tmp_path / "sweep.cfg"
        path.write_text(
            "# demo sweep\n"
            "variable = rho-shared\n"
            "grid = 0.2,0.4,0.56,0.8   # explicit list\n"
            "channel = 1,3\n"
            "power = 1000\n"
            "scheme = explicit\n"
            "alpha = 0.1,0.9\n"
            "beta = 0.1,0.9\n"
            "methods = closed-form\n"
            "seed = 9\n")
        spec = build_sweep_spec(parse_config_file(path))
        assert spec.variable == "rho-shared"
        np.testing.assert_allclose(spec.grid, [0.2, 0.4, 0.56, 0.8])
        assert spec.seed == 9
        table = run_sweep(spec)
        assert len(table.rows) == 4

    def test_grid_syntaxes(self):
        np.testing.assert_allclose(_parse_grid("1,2,4"), [1, 2, 4])
        np.testing.assert_allclose(_parse_grid("0:1:5"), [0, 0.25, 0.5, 0.75, 1.0])
        np.testing.assert_allclose(_parse_grid("log:1:100:3"), [1, 10, 100])

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError) as err:
            build_sweep_spec({"variable": "power", "grid": "1,2", "bogus": "1"})
        assert err.value.code == "invalid-config"


class TestCli:

    def test_mi_approx(self, capsys):
        code = main(["mi-approx", "--channel", "1,1", "--power", "1000",
                     "--rho", "0.56", "--alpha", "0.5,0.5", "--beta", "0.5,0.5"])
        out = capsys.readouterr().out
        assert code == 0
        value = float(out.splitlines()[0].split("=")[1])
        assert abs(value - 12.644608853) <= 1e-6

    def test_optimize_with_verify(self, capsys):
        code = main(["optimize", "--channel", "1,3", "--power", "1000",
                     "--verify", "--restarts", "2"])
        out = capsys.readouterr().out
        assert code == 0
        fields = dict(line.split(" = ") for line in out.splitlines())
        assert abs(float(fields["rho_star"]) - 0.5604631) <= 1e-6
        assert abs(float(fields["mi_max_bits"]) - 14.9665375) <= 1e-6
        assert float(fields["agreement_bits"]) <= 1e-3
        assert fields["converged"] == "True"

    def test_mi_mc_runs(self, capsys):
        code = main(["mi-mc", "--channel", "1", "--power", "100", "--mode", "cd-only",
                     "--alpha", "1", "--n-joint", "60000", "--n-outer", "25",
                     "--n-inner", "1500", "--seed", "4"])
        out = capsys.readouterr().out
        assert code == 0
        value = float(out.splitlines()[0].split("=")[1])
        assert abs(value - np.log2(1 + 100 / 1.01)) <= 0.3

    def test_figure_to_file(self, tmp_path, capsys):
        out_path = tmp_path / "fig3.csv"
        code = main(["figure", "fig3", "--out", str(out_path)])
        assert code == 0
        lines = out_path.read_text().splitlines()
        assert lines[0] == "rho1,rho2,closed_form"
        assert len(lines) == 1 + 49 * 49

    def test_figure_seed_reproducible_csv(self, tmp_path):
        args = ["figure", "fig2", "--n-joint", "40000", "--n-outer", "20",
                "--n-inner", "1000", "--seed", "12"]
        a_path, b_path = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(a_path)]) == 0
        assert main(args + ["--out", str(b_path), "--threads", "2"]) == 0
        assert a_path.read_bytes() == b_path.read_bytes()

    def test_sweep_from_config(self, tmp_path, capsys):
        cfg = tmp_path / "s.cfg"
        cfg.write_text("variable = power\ngrid = log:10:1000:3\nchannel = 1,2\n"
                       "methods = closed-form,cd-baseline,gain\n")
        out_path = tmp_path / "out.csv"
        code = main(["sweep", "--config", str(cfg), "--out", str(out_path)])
        assert code == 0
        lines = out_path.read_text().splitlines()
        assert lines[0] == "power,closed_form,cd_baseline,gain"
        assert len(lines) == 4

    def test_error_line_format(self, capsys):
        code = main(["figure", "fig9"])
        err = capsys.readouterr().err
        assert code != 0
        assert err.startswith("ERROR unknown-figure:")

    def test_validation_error_format(self, capsys):
        code = main(["mi-approx", "--channel", "1,0", "--power", "100"])
        err = capsys.readouterr().err
        assert code != 0
        assert err.startswith("ERROR zero-gain-antenna:")

    def test_env_threads_default(self, monkeypatch, capsys):
        monkeypatch.setenv("SPLITRX_THREADS", "2")
        code = main(["mi-approx", "--channel", "1", "--power", "100", "--rho", "0.5",
                     "--alpha", "1", "--beta", "1"])
        assert code == 0

    def test_console_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "splitrx", "optimize",
                               "--channel", "1,3", "--power", "1000"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "rho_star" in proc.stdout


class TestSelftest:

    def test_selftest_passes(self, capsys):
        code = main(["selftest"])
        out = capsys.readouterr().out
        assert code == 0
        assert out.count("PASS") >= 8
        assert "FAIL" not in out
