import json
import subprocess
import sys

import pytest

from levykit.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    lines = [ln for ln in text.strip().splitlines()
             if not ln.startswith("#")]
    header = lines[0].split(",")
    rows = [dict(zip(header, ln.split(","))) for ln in lines[1:]]
    return header, rows


# ---------------------------------------------------------------------------
# documented examples
# ---------------------------------------------------------------------------

def test_tails_example(capsys):
    code, out, _ = run_cli(capsys, "tails", "--spec", "bessel:1.0",
                           "--t", "1")
    assert code == 0
    assert out.startswith("# levykit v")
    header, rows = parse_csv(out)
    assert header == ["t", "x", "nu_dot", "nu_dot_err", "nu_bar",
                      "nu_bar_err", "hit_tail", "hit_tail_err"]
    assert rows[0]["nu_dot"].startswith("0.398942")
    assert rows[0]["hit_tail"] == ""


def test_eigen_example(capsys):
    code, out, _ = run_cli(capsys, "eigen", "--spec", "bessel:1.0",
                           "--x", "1", "--gamma", "0")
    assert code == 0
    _, rows = parse_csv(out)
    assert float(rows[0]["A"]) == 1.0
    assert float(rows[0]["C"]) == 1.0


def test_localtime_tail_example(capsys):
    code, out, _ = run_cli(capsys, "mc", "localtime-tail", "--spec",
                           "bessel:1.0", "--x", "0", "--ell", "1",
                           "--t", "10000", "--n", "100000")
    assert code == 0
    _, rows = parse_csv(out)
    assert abs(float(rows[0]["ratio"]) - 1.0) < 0.1
    assert float(rows[0]["std_error"]) > 0


# ---------------------------------------------------------------------------
# outputs and formats
# ---------------------------------------------------------------------------

def test_density_csv_columns(capsys):
    code, out, _ = run_cli(capsys, "density", "--spec", "bessel:1.5",
                           "--t", "1", "--x", "0.5", "--y", "0.7",
                           "--killed")
    assert code == 0
    header, rows = parse_csv(out)
    assert header == ["t", "x", "y", "kind", "value", "abs_err"]
    assert rows[0]["kind"] == "phat"
    assert float(rows[0]["abs_err"]) < 1e-9


def test_density_cartesian_grid(capsys):
    code, out, _ = run_cli(capsys, "density", "--spec", "brownian",
                           "--t", "0.5,1", "--x", "0.3,0.7", "--y", "1")
    _, rows = parse_csv(out)
    assert code == 0 and len(rows) == 4


def test_json_mirrors_columns(capsys):
    code, out, _ = run_cli(capsys, "subexp-check", "--tail", "pareto:0.5",
                           "--x", "10000", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["command"] == "subexp-check"
    assert set(doc["rows"][0]) == set(doc["columns"])
    assert abs(doc["rows"][0]["ratio"] - 1.9998999974998815) < 1e-12


def test_mc_output_reproducible(tmp_path, capsys):
    args = ["mc", "exponent", "--spec", "bessel:1.5", "--lam", "0.5,2",
            "--n", "20000"]
    f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(f1)]) == 0
    assert main(args + ["--out", str(f2)]) == 0
    capsys.readouterr()
    assert f1.read_bytes() == f2.read_bytes()
    f3 = tmp_path / "c.csv"
    assert main(args + ["--out", str(f3), "--threads", "3"]) == 0
    capsys.readouterr()
    assert f1.read_bytes() == f3.read_bytes()


def test_seed_changes_output(capsys):
    _, out1, _ = run_cli(capsys, "mc", "tau", "--ell", "1", "--n", "5000",
                         "--seed", "1")
    _, out2, _ = run_cli(capsys, "mc", "tau", "--ell", "1", "--n", "5000",
                         "--seed", "2")
    assert out1 != out2


def test_penalize_lawcheck_meta(capsys):
    code, out, _ = run_cli(capsys, "penalize", "lawcheck", "--spec",
                           "brownian", "--n", "20000", "--u", "2048",
                           "--seed", "3", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["u"] == 2048.0
    assert doc["max_gap"] < 0.1
    assert doc["columns"] == ["ell", "weighted_cdf", "cdf_se",
                              "target_cdf", "gap"]


def test_penalize_martingale_weights(capsys):
    code, out, _ = run_cli(capsys, "penalize", "martingale", "--spec",
                           "brownian", "--weight", "indicator:1",
                           "--weight", "triangular:2", "--u", "0.5",
                           "--n", "20000", "--dt", "1e-3")
    assert code == 0
    _, rows = parse_csv(out)
    assert [r["weight"] for r in rows] == ["indicator(1)", "triangular(2)"]
    for r in rows:
        assert abs(float(r["z"])) < 4.0


# ---------------------------------------------------------------------------
# exit codes
# ---------------------------------------------------------------------------

def test_malformed_json_spec_diagnostic(capsys):
    code, _, err = run_cli(capsys, "density", "--spec",
                           '{"kind": "bessel" "delta": 1.5}',
                           "--t", "1", "--x", "0.5")
    assert code == 2
    assert "line 1" in err and "column" in err


def test_invalid_domain_exits_2(capsys):
    code, _, err = run_cli(capsys, "density", "--spec", "bessel:1.5",
                           "--t", "-1", "--x", "0.5")
    assert code == 2
    assert "invalid input" in err


def test_tolerance_failure_exits_3(capsys):
    code, _, err = run_cli(
        capsys, "eigen", "--spec",
        '{"kind":"custom","scale":"x^0.5/0.5","speed_density":"2*x^0.5"}',
        "--x", "1", "--gamma", "1e9", "--tol", "1e-12")
    assert code == 3
    assert "tolerance failure" in err


def test_unknown_command_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["transmogrify"])
    assert exc.value.code == 2


def test_console_script_installed():
    out = subprocess.run([sys.executable, "-m", "levykit.cli",
                          "--version"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "levykit" in out.stdout


def test_version_flag():
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
