"""Command-line front end: output contracts, exit codes, determinism."""

import io
import subprocess
import sys

import numpy as np
import pytest

from longevity.cli import run

from conftest import PURCHASE, BENEFITS


def invoke(capsys, *argv):
    code = run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ------------------------------------------------------- scalar output #


def test_price_lsv_at_time_zero_is_the_benefit(capsys):
    code, out, _ = invoke(capsys, "price-lsv", "--premium", "100",
                          "--benefit", "1000", "--rate", "0.05", "--t", "0")
    assert code == 0
    assert out == "lsv=1000\n"


def test_irr_of_the_first_published_deal(capsys, tmp_path):
    path = tmp_path / "deal.csv"
    path.write_text(f"period,amount\n0,{PURCHASE}\n1,{BENEFITS[0]}\n")
    code, out, _ = invoke(capsys, "irr", "--cashflows", str(path))
    assert code == 0
    assert out == "irr=2.951170\n"


def test_vole_direct_mode(capsys):
    code, out, _ = invoke(capsys, "vole", "--e-complete", "15", "--max-death", "30")
    assert code == 0
    assert out == "vole=0.5\n"


def test_duration_reports_both_sensitivities(capsys):
    code, out, _ = invoke(capsys, "duration", "--premium", "100",
                          "--benefit", "1000", "--rate", "0.05", "--t", "8")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("le_duration=")
    assert lines[1].startswith("macaulay_duration=")


def test_simulate_summary_lines(capsys):
    code, out, _ = invoke(capsys, "simulate", "--age", "70", "--n", "200", "--seed", "42")
    assert code == 0
    keys = [line.split("=", 1)[0] for line in out.splitlines()]
    assert keys == ["n", "mode", "max_year", "mean"]
    assert out.startswith("n=200\n")


def test_price_option_value_format(capsys):
    code, out, _ = invoke(capsys, "price-option", "--kind", "call",
                          "--style", "european", "--strike", "100",
                          "--rate", "0.05", "--vol", "0.2", "--expiry", "1",
                          "--grid", "100,100")
    assert code == 0
    key, _, text = out.strip().partition("=")
    assert key == "value"
    assert len(text.split(".")[1]) == 6
    assert 9.0 < float(text) < 12.0


# ---------------------------------------------------------- csv output #


def test_markov_curve_is_crlf_csv(capsys):
    code, out, _ = invoke(capsys, "markov", "--rate", "0.5",
                          "--horizon", "2", "--points", "3")
    assert code == 0
    assert out == ("t,survival\r\n"
                   "0,1\r\n"
                   "1,0.6065306597\r\n"
                   "2,0.3678794412\r\n")


def test_simulate_csv_histogram(capsys):
    code, out, _ = invoke(capsys, "simulate", "--age", "70", "--n", "500",
                          "--seed", "9", "--csv")
    assert code == 0
    lines = out.split("\r\n")
    assert lines[0] == "year,count"
    years = [int(line.split(",")[0]) for line in lines[1:] if line]
    counts = [int(line.split(",")[1]) for line in lines[1:] if line]
    assert years == sorted(years)
    assert sum(counts) == 500


def test_fdm_demo_tabulates_error_and_warns_on_oscillation(capsys):
    code, out, err = invoke(capsys, "fdm-demo", "--scheme", "centered",
                            "--sigma", "1e-6", "--J", "11")
    assert code == 0
    lines = out.split("\r\n")
    assert lines[0] == "x,numeric,exact,error"
    assert len([line for line in lines[1:] if line]) == 12
    assert "oscillatory" in err


def test_fdm_demo_fitted_has_no_warning(capsys):
    code, out, err = invoke(capsys, "fdm-demo", "--scheme", "fitted",
                            "--sigma", "1e-6", "--J", "11")
    assert code == 0
    assert err == ""
    # the fitted scheme stays bounded where the centered one oscillates
    errors = [abs(float(line.split(",")[3]))
              for line in out.split("\r\n")[1:] if line]
    assert max(errors) < 0.5


def test_alpha_profile_csv(capsys):
    code, out, _ = invoke(capsys, "alpha-profile", "--ages", "90..95",
                          "--step", "5", "--n", "1000", "--seed", "3")
    assert code == 0
    lines = out.split("\r\n")
    assert lines[0] == "age,alpha_hat"
    ages = [int(line.split(",")[0]) for line in lines[1:] if line]
    assert ages == [90, 95]


def test_fit_stable_reads_stdin(capsys, monkeypatch):
    rng = np.random.Generator(np.random.PCG64(7))
    text = "\n".join(f"{v:.17g}" for v in rng.standard_normal(2000)) + "\n"
    monkeypatch.setattr("sys.stdin", io.StringIO(text))
    code, out, _ = invoke(capsys, "fit-stable")
    assert code == 0
    key, _, value = out.strip().partition("=")
    assert key == "alpha_hat"
    assert 1.9 <= float(value) <= 2.0


# ---------------------------------------------------- files and errors #


def test_out_flag_writes_the_file_instead_of_stdout(capsys, tmp_path):
    target = tmp_path / "result.txt"
    code, out, _ = invoke(capsys, "price-lsv", "--premium", "100",
                          "--benefit", "1000", "--rate", "0.05", "--t", "0",
                          "--out", str(target))
    assert code == 0
    assert out == ""
    assert target.read_text() == "lsv=1000\n"


def test_unknown_subcommand_exits_1(capsys):
    code, _, _ = invoke(capsys, "no-such-command")
    assert code == 1
    code, _, _ = invoke(capsys)
    assert code == 1


def test_help_exits_0(capsys):
    assert invoke(capsys, "--help")[0] == 0
    assert invoke(capsys, "simulate", "--help")[0] == 0


def test_bad_table_contents_exit_2(capsys, tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("age,wrong\n70,0.1\n")
    code, _, err = invoke(capsys, "simulate", "--table", str(path),
                          "--age", "70", "--n", "10", "--seed", "1")
    assert code == 2
    assert "error:" in err


def test_missing_table_file_exits_2(capsys, tmp_path):
    code, _, err = invoke(capsys, "simulate", "--table", str(tmp_path / "nope.csv"),
                          "--age", "70", "--n", "10", "--seed", "1")
    assert code == 2


def test_domain_violation_exits_2(capsys):
    code, _, err = invoke(capsys, "markov", "--rate", "0.5",
                          "--horizon", "-1", "--points", "3")
    assert code == 2
    assert "horizon" in err


def test_vole_mode_conflict_exits_2(capsys):
    code, _, err = invoke(capsys, "vole", "--e-complete", "15",
                          "--max-death", "30", "--age", "70")
    assert code == 2
    assert "not both" in err


def test_fit_stable_bad_sample_exits_2(capsys, tmp_path):
    path = tmp_path / "samples.txt"
    path.write_text("1.0\n2.0\nabc\n")
    code, _, err = invoke(capsys, "fit-stable", str(path))
    assert code == 2
    assert ":3: not a number" in err


def test_numerical_failure_exits_3(capsys, tmp_path):
    # signs alternate so the series is admissible, but the NPV polynomial
    # has negative discriminant: no real rate zeroes it
    path = tmp_path / "flows.csv"
    path.write_text("period,amount\n0,-100\n1,100\n2,-100\n")
    code, _, err = invoke(capsys, "irr", "--cashflows", str(path))
    assert code == 3
    assert "error:" in err


# -------------------------------------------------------- determinism #


def run_module(*argv):
    return subprocess.run([sys.executable, "-m", "longevity", *argv],
                          capture_output=True, timeout=120)


def test_seeded_run_is_byte_identical_across_processes():
    argv = ("simulate", "--age", "70", "--n", "2000", "--seed", "7", "--csv")
    first = run_module(*argv)
    second = run_module(*argv)
    assert first.returncode == 0
    assert first.stdout == second.stdout
    assert first.stdout.startswith(b"year,count\r\n")
