import numpy as np
import pytest

import wedflow as wf
from wedflow import reports
from wedflow.cli import run
from wedflow.config import (
    build_instance,
    build_opt_config,
    build_wed_config,
    load_manifest,
    parse_config,
    sweep_epsilons,
)
from wedflow.errors import ConfigurationError


HEAT_TEXT = """\
# small heat-type instance
instance.name = heat-small
instance.N = 12
instance.T = 1.0
instance.g.name = one
instance.kernel.name = delta
instance.beta.name = linear(1.0)
instance.u0.name = sine(1)
wed.epsilon = 0.25
wed.M = 16
opt.g_tol = 1e-8
opt.stop_norm = stationarity
opt.max_iters = 20000
"""


@pytest.fixture
def heat_file(tmp_path):
    p = tmp_path / "heat.cfg"
    p.write_text(HEAT_TEXT)
    return p


class TestConfig:
    def test_parse_comments_and_blanks(self):
        cfg = parse_config("# header\n\n a = 1 # trailing\nb= x=y\n")
        assert cfg == {"a": "1", "b": "x=y"}

    def test_parse_rejects_bare_words(self):
        with pytest.raises(ConfigurationError, match="line 1"):
            parse_config("not-a-pair\n")

    def test_unknown_key_suggests_nearest(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("wed.epsilom = 0.5\n")
        with pytest.raises(ConfigurationError, match="wed.epsilon"):
            load_manifest(p)

    def test_instance_prefix_optional(self, tmp_path):
        p = tmp_path / "short.cfg"
        p.write_text("N = 8\ng.name = one\n")
        manifest = load_manifest(p)
        assert manifest["instance.N"] == "8"

    def test_overrides_win(self, heat_file):
        manifest = load_manifest(heat_file, {"wed.epsilon": "0.125"})
        assert build_wed_config(manifest).epsilon == 0.125

    def test_build_round_trip(self, heat_file):
        manifest = load_manifest(heat_file)
        inst = build_instance(manifest)
        assert inst.grid.N == 12
        assert inst.name == "heat-small"
        cfg = build_wed_config(manifest)
        assert (cfg.epsilon, cfg.M) == (0.25, 16)
        opt = build_opt_config(manifest)
        assert opt.stop_norm == "stationarity"
        assert sweep_epsilons(manifest) == [0.5, 0.25, 0.125, 0.0625]

    def test_u0_table_and_kernel_samples(self, tmp_path):
        N = 4
        u0 = "0.1,0.2,0.2,0.1"
        k = ",".join(["0"] * 3 + ["5"] + ["0"] * 3)
        p = tmp_path / "tab.cfg"
        p.write_text(f"N = {N}\nu0.table = {u0}\nkernel.samples = {k}\n")
        inst = build_instance(load_manifest(p))
        np.testing.assert_allclose(inst.u0, [0.1, 0.2, 0.2, 0.1])
        with pytest.raises(ConfigurationError, match="kernel.samples"):
            build_instance(load_manifest(p, {"instance.N": "5"}))


class TestReports:
    def test_trajectory_csv_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        grid = wf.SpatialGrid(N=5, h=1.0 / 6)
        traj = wf.Trajectory(rng.normal(size=(4, 5)), 0.75)
        path = tmp_path / "traj.csv"
        path.write_text(reports.trajectory_csv(traj, grid))
        back = reports.read_trajectory_csv(path, T=0.75)
        assert np.array_equal(back.states, traj.states)

    def test_sweep_csv_header_and_zeroed_timing(self):
        row = wf.SweepRow(epsilon=0.5, lam=0.0, err_L2H=0.1, err_final=0.01,
                          el_residual=1e-3, terminal_xi=1e-6,
                          energy_slack=-0.2, iterations=42, wall_time=3.14)
        table = wf.SweepTable(rows=[row])
        text = reports.sweep_csv(table)
        lines = text.strip().splitlines()
        assert lines[0] == ("epsilon,lambda,err_L2H,err_final,el_residual,"
                            "terminal_xi,energy_slack,iterations,wall_time_s")
        assert lines[1].endswith(",42,0")
        assert "3.14" not in lines[1]

    def test_float_format_round_trips(self):
        for x in (0.1, 1.0 / 3.0, 1e-17, 123456.789):
            assert float(reports.fmt(x)) == x


class TestCli:
    def test_minimize_writes_outputs(self, heat_file, tmp_path):
        out = tmp_path / "out"
        code = run(["minimize", "--instance", str(heat_file),
                    "--output-dir", str(out), "--no-figures"])
        assert code == 0
        for name in ("minimizer.csv", "solve_report.txt", "el_residual.csv",
                     "metadata.txt"):
            assert (out / name).exists()
        report = (out / "solve_report.txt").read_text()
        assert "converged = True" in report

    def test_minimize_renders_figures(self, heat_file, tmp_path):
        out = tmp_path / "fig"
        code = run(["minimize", "--instance", str(heat_file),
                    "--output-dir", str(out)])
        assert code == 0
        assert (out / "minimizer.png").stat().st_size > 0
        assert (out / "el_residual.png").stat().st_size > 0

    def test_bad_config_exit_code(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("wed.epsilom = 0.5\n")
        assert run(["minimize", "--instance", str(p),
                    "--output-dir", str(tmp_path / "o")]) == 2

    def test_missing_set_value_exit_code(self, heat_file, tmp_path):
        assert run(["minimize", "--instance", str(heat_file),
                    "--output-dir", str(tmp_path / "o"),
                    "--set", "wed.epsilon"]) == 2

    def test_compare_recomputes_error(self, heat_file, tmp_path):
        out = tmp_path / "cmp"
        code = run(["compare", "--instance", str(heat_file),
                    "--output-dir", str(out), "--no-figures"])
        assert code == 0
        reported = float((out / "compare.txt").read_text()
                         .split("=")[1].strip())
        wed = reports.read_trajectory_csv(out / "minimizer.csv", T=1.0)
        ref = reports.read_trajectory_csv(out / "reference.csv", T=1.0)
        manifest = load_manifest(heat_file)
        inst = build_instance(manifest)
        recomputed = wf.traj_l2h_distance(wed, ref, inst.grid.h)
        assert recomputed == pytest.approx(reported, rel=1e-12)

    def test_sweep_bodies_deterministic(self, heat_file, tmp_path):
        texts = []
        for tag in ("a", "b"):
            out = tmp_path / tag
            code = run(["causal-sweep", "--instance", str(heat_file),
                        "--output-dir", str(out), "--no-figures",
                        "--set", "sweep.epsilons=0.5,0.25"])
            assert code == 0
            texts.append((out / "sweep.csv").read_bytes())
        assert texts[0] == texts[1]

    def test_verify_assumptions_output(self, heat_file, tmp_path):
        out = tmp_path / "va"
        code = run(["verify-assumptions", "--instance", str(heat_file),
                    "--output-dir", str(out), "--samples", "200",
                    "--no-figures"])
        assert code == 0
        text = (out / "assumptions.txt").read_text()
        assert "all_passed = True" in text

    def test_chain_check_ratio_near_two(self, heat_file, tmp_path):
        out = tmp_path / "cc"
        code = run(["chain-check", "--instance", str(heat_file),
                    "--output-dir", str(out), "--no-figures",
                    "--M", "64"])
        assert code == 0
        body = dict(line.split(" = ")
                    for line in (out / "chain_check.txt").read_text()
                    .strip().splitlines())
        assert float(body["refinement_ratio"]) == pytest.approx(2.0, abs=0.3)

    def test_lambda_sweep_and_reference(self, heat_file, tmp_path):
        out1 = tmp_path / "ls"
        assert run(["lambda-sweep", "--instance", str(heat_file),
                    "--output-dir", str(out1), "--no-figures",
                    "--set", "sweep.lambdas=0.1,0.01"]) == 0
        assert (out1 / "sweep.csv").exists()
        out2 = tmp_path / "ref"
        assert run(["reference", "--instance", str(heat_file),
                    "--output-dir", str(out2), "--no-figures"]) == 0
        assert (out2 / "reference.csv").exists()

    def test_sweep_figure_rendered(self, heat_file, tmp_path):
        out = tmp_path / "swfig"
        assert run(["causal-sweep", "--instance", str(heat_file),
                    "--output-dir", str(out),
                    "--set", "sweep.epsilons=0.5,0.25"]) == 0
        assert (out / "sweep.png").stat().st_size > 0
