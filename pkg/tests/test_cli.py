"""Tests for the command-line front end."""

import io
import subprocess
import sys

import pytest

from cvqkd_multispan.cli import (
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_VALIDATION,
    main,
    parse_config_file,
    parse_overrides,
)

FAST = ["--v_grid=16", "--g_grid=8", "--refine_iters=20", "--workers=1"]


def run_cli(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


class TestConfigParsing:
    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# comment\nL = 10,20\nM = 5   # trailing comment\nbeta=0.9\n")
        values = parse_config_file(str(path))
        assert values == {"l": "10,20", "m": "5", "beta": "0.9"}

    def test_malformed_line_reports_position(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("L = 10\njust words\n")
        with pytest.raises(Exception, match="bad.cfg:2"):
            parse_config_file(str(path))

    def test_unknown_key_reports_key(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("Lx = 10\n")
        with pytest.raises(Exception, match="unknown key 'lx'"):
            parse_config_file(str(path))

    def test_override_forms(self):
        assert parse_overrides(["--l=5", "--m", "3"]) == {"l": "5", "m": "3"}

    def test_override_rejects_unknown(self):
        with pytest.raises(Exception, match="unknown override"):
            parse_overrides(["--bogus=1"])

    def test_overrides_beat_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("L = 10\ncase = n\n")
        code, text = run_cli("kgr-unconditional", str(path), "--l=20", *FAST)
        assert code == EXIT_OK
        assert "\n20,n,0," in text


class TestUnconditionalCommand:
    def test_columns_and_benchmark_row(self):
        code, text = run_cli("kgr-unconditional", "--case=IIb,n", "--l=10",
                             "--m=5", *FAST)
        assert code == EXIT_OK
        lines = [l for l in text.splitlines() if not l.startswith("#")]
        assert lines[0] == "L_km,case,M,kgr_bits,v_opt,g_opt,g_max,i_ab,chi_be"
        cases = {line.split(",")[1]: line for line in lines[1:]}
        assert cases["n"].split(",")[2] == "0"     # benchmark rows carry M = 0
        assert cases["IIb"].split(",")[2] == "5"
        assert float(cases["IIb"].split(",")[3]) > float(cases["n"].split(",")[3])

    def test_deterministic_output(self):
        args = ("kgr-unconditional", "--case=IIb", "--l=15,30", "--m=2", *FAST)
        assert run_cli(*args) == run_cli(*args)

    def test_header_echoes_resolved_config(self):
        code, text = run_cli("kgr-unconditional", "--case=n", "--l=10", *FAST)
        assert code == EXIT_OK
        assert "# command = kgr-unconditional" in text
        assert "# beta = 0.95" in text
        assert "# kappa = 0.2" in text

    def test_rejects_case_one(self):
        code, _ = run_cli("kgr-unconditional", "--case=I", "--l=10", *FAST)
        assert code == EXIT_VALIDATION

    def test_rejects_empty_sweep(self):
        code, _ = run_cli("kgr-unconditional", "--case=n",
                          "--l_min=5", "--l_max=5", "--l_steps=2", *FAST)
        assert code == EXIT_VALIDATION

    def test_rejects_single_step_sweep(self):
        code, _ = run_cli("kgr-unconditional", "--case=n",
                          "--l_min=5", "--l_max=10", "--l_steps=1", *FAST)
        assert code == EXIT_VALIDATION

    def test_rejects_two_sweep_variables(self):
        code, _ = run_cli("kgr-unconditional", "--case=n", "--l=10",
                          "--epsilon_min=0", "--epsilon_max=0.1",
                          "--epsilon_steps=3", *FAST)
        assert code == EXIT_VALIDATION

    def test_epsilon_sweep_appends_column(self):
        code, text = run_cli("kgr-unconditional", "--case=n", "--l=10",
                             "--sweep=epsilon", "--epsilon=0.01,0.05", *FAST)
        assert code == EXIT_OK
        header = [l for l in text.splitlines() if not l.startswith("#")][0]
        assert header.endswith(",epsilon")

    def test_output_column_selection(self):
        code, text = run_cli("kgr-unconditional", "--case=n", "--l=10",
                             "--outputs=L_km,kgr_bits", *FAST)
        assert code == EXIT_OK
        lines = [l for l in text.splitlines() if not l.startswith("#")]
        assert lines[0] == "L_km,kgr_bits"
        assert len(lines[1].split(",")) == 2

    def test_rejects_unknown_output_column(self):
        code, _ = run_cli("kgr-unconditional", "--case=n", "--l=10",
                          "--outputs=bogus", *FAST)
        assert code == EXIT_VALIDATION


class TestComposableCommand:
    def test_columns_and_threshold_signature(self):
        code, text = run_cli("kgr-composable", "--case=I", "--l=40", "--m=3",
                             "--k=all", *FAST)
        assert code == EXIT_OK
        lines = [l for l in text.splitlines() if not l.startswith("#")]
        assert lines[0] == "L_km,case,M,k,kgr_bits,key_ratio,v_opt,g_opt"
        ratios = {int(l.split(",")[3]): float(l.split(",")[5]) for l in lines[1:]}
        assert ratios[1] > 1.0       # attack on the first span rewards the PIA
        assert ratios[2] == pytest.approx(1.0, abs=1e-3)
        assert ratios[3] == pytest.approx(1.0, abs=1e-3)

    def test_benchmark_only_run_has_unit_ratio(self):
        code, text = run_cli("kgr-composable", "--case=n", "--l=30", "--m=3",
                             "--k=2", *FAST)
        assert code == EXIT_OK
        row = [l for l in text.splitlines() if not l.startswith("#")][1]
        assert float(row.split(",")[5]) == 1.0

    def test_rejects_k_beyond_span_count(self):
        code, _ = run_cli("kgr-composable", "--case=I", "--l=30", "--m=3",
                          "--k=7", *FAST)
        assert code == EXIT_VALIDATION

    def test_requires_k(self):
        code, _ = run_cli("kgr-composable", "--case=I", "--l=30", "--m=3", *FAST)
        assert code == EXIT_VALIDATION


class TestOtherCommands:
    def test_max_noise_orders_by_span_count(self):
        code, text = run_cli("max-noise", "--case=IIb,n", "--l=30", "--m=5",
                             "--v_grid=24", "--g_grid=8", "--refine_iters=25",
                             "--workers=1")
        assert code == EXIT_OK
        lines = [l for l in text.splitlines() if not l.startswith("#")]
        assert lines[0] == "L_km,case,M,eps_max"
        values = {line.split(",")[1]: float(line.split(",")[3]) for line in lines[1:]}
        assert values["IIb"] >= values["n"] > 0.0

    def test_ultimate_bounds_exceed_zero(self):
        code, text = run_cli("ultimate", "--l=40", "--m=3", "--k=1,3", *FAST)
        assert code == EXIT_OK
        lines = [l for l in text.splitlines() if not l.startswith("#")]
        assert lines[0] == "L_km,M,k,kgr_upper_bits,chi_ab,key_ratio,v_opt,g_opt"
        for line in lines[1:]:
            assert float(line.split(",")[3]) > 0.0

    def test_continuous_limit_marks_limit_rows(self):
        code, text = run_cli("continuous-limit", "--l=50", "--m=64",
                             "--g_inf=1.5", "--workers=1")
        assert code == EXIT_OK
        lines = [l for l in text.splitlines() if not l.startswith("#")]
        assert lines[0] == "L_km,M,g_total,t_q,t_p,n_q,n_p"
        limit = [l for l in lines[1:] if l.split(",")[1] == "0"][0]
        finite = [l for l in lines[1:] if l.split(",")[1] == "64"][0]
        for i in (3, 4, 5, 6):
            assert float(finite.split(",")[i]) == \
                pytest.approx(float(limit.split(",")[i]), rel=0.01)

    def test_selfcheck_passes_small_trials(self):
        code, text = run_cli("selfcheck", "--trials=20")
        assert code == EXIT_OK
        assert "all" in text and "suites passed" in text

    def test_numerical_failure_emits_sentinel_row(self, capsys):
        # 20000 km underflows the total transmissivity to zero; that row
        # carries nan sentinels while the healthy row survives, exit code 2.
        code, text = run_cli("kgr-unconditional", "--case=n", "--l=10,20000", *FAST)
        assert code == EXIT_NUMERICAL
        lines = [l for l in text.splitlines() if not l.startswith("#")]
        good = [l for l in lines[1:] if l.startswith("10,")][0]
        bad = [l for l in lines[1:] if l.startswith("20000,")][0]
        assert "nan" not in good
        assert bad.split(",")[3] == "nan"


class TestConsoleScript:
    def test_installed_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "cvqkd_multispan.cli", "kgr-unconditional",
             "--case=n", "--l=10", *FAST],
            capture_output=True, text=True)
        assert proc.returncode == EXIT_OK
        assert proc.stdout.splitlines()[-1].startswith("10,n,0,")

    def test_validation_error_exit_code(self):
        proc = subprocess.run(
            [sys.executable, "-m", "cvqkd_multispan.cli", "kgr-composable",
             "--case=I", "--l=10", "--m=2", "--k=5", *FAST],
            capture_output=True, text=True)
        assert proc.returncode == EXIT_VALIDATION
        assert "error:" in proc.stderr
