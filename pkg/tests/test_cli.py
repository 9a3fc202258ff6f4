from __future__ import annotations

import json
import subprocess
import sys

import pytest

from tdurn.cli import main, write_config_file


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_constant(capsys):
    code, out, _ = run(capsys, "classify", "--family", "constant", "--c", "1", "--tau0", "2")
    assert code == 0
    d = json.loads(out)
    assert d["p_monopoly"] == "Zero" and d["p_domination"] == "Zero"


def test_classify_evidence(capsys):
    code, out, _ = run(capsys, "classify", "--family", "geometric", "--r", "2", "--evidence")
    assert code == 0 and json.loads(out)["evidence"]["LiminfRatioPositive"]["liminf"] == 0.5


def test_simulate_is_byte_stable(capsys):
    argv = ("simulate", "--family", "geometric", "--r", "2", "--tau0", "2", "--t0", "1", "--horizon", "100",
            "--seed", "7")
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second and json.loads(first)["horizon"] == 100


def test_simulate_dump_path(capsys, tmp_path):
    code, _, _ = run(capsys, "simulate", "--family", "constant", "--c", "1", "--horizon", "30", "--seed", "3",
                     "--dump-paths", "--dump-dir", str(tmp_path))
    assert code == 0
    lines = (tmp_path / "path_seed3.csv").read_text().splitlines()
    assert lines[0] == "n,theta,i_n" and len(lines) == 32


def test_ensemble_csv(capsys):
    code, out, _ = run(capsys, "ensemble", "--family", "constant", "--c", "1", "--horizon", "200", "--trials",
                       "300", "--format", "csv", "--checkpoints", "100")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == ("family,params,tau0,t0,horizon,trials,eps,monopoly_freq,mono_lo,mono_hi,"
                        "domination_freq,dom_lo,dom_hi,ks_stat")
    assert len(lines) == 3


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# demo\nfamily = powerlaw\na = 1\ntau0 = 2\nt0 = 1\nhorizon = 150\ntrials = 200\nseed = 4\n")
    code, out, _ = run(capsys, "ensemble", "--config", str(cfg))
    assert code == 0
    echo = json.loads(out)["provenance"]["config"]
    assert echo["family"] == "powerlaw" and echo["horizon"] == 150 and echo["a"] == 1.0
    code, out, _ = run(capsys, "ensemble", "--config", str(cfg), "--horizon", "120")
    assert json.loads(out)["provenance"]["config"]["horizon"] == 120


def test_provenance_round_trip(capsys, tmp_path):
    code, out, _ = run(capsys, "ensemble", "--family", "decaypower", "--a", "0.5", "--t0", "0.5", "--horizon",
                       "300", "--trials", "400", "--seed", "9", "--eps", "0.01", "--mono-cut", "0.75")
    assert code == 0
    report = json.loads(out)
    cfg = tmp_path / "echo.cfg"
    write_config_file(cfg, report["provenance"]["config"])
    code, again, _ = run(capsys, "ensemble", "--config", str(cfg))
    assert code == 0 and again == out


def test_out_file(capsys, tmp_path):
    target = tmp_path / "v.json"
    code, out, _ = run(capsys, "classify", "--family", "expsqrt", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["p_domination"] == "One"


def test_workers_do_not_change_output(capsys):
    argv = ("ensemble", "--family", "constant", "--c", "1", "--horizon", "100", "--trials", "5000")
    _, one, _ = run(capsys, *argv, "--workers", "1")
    _, many, _ = run(capsys, *argv, "--workers", "0")
    assert one == many


@pytest.mark.parametrize("argv", [
    ("simulate", "--family", "constant", "--c", "1", "--t0", "5"),
    ("simulate", "--family", "geometric", "--r", "0.5"),
    ("ensemble", "--family", "constant", "--c", "1", "--eps", "0.7"),
    ("ensemble", "--family", "constant", "--c", "1", "--trials", "0"),
    ("classify", "--family", "nosuch"),
    ("classify", "--family", "constant", "--c", "1", "--format", "csv"),
    ("simulate", "--family", "custom"),
    ("bogus",),
    (),
])
def test_config_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error[config]:")


def test_bad_config_file(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    code, _, err = run(capsys, "classify", "--config", str(cfg))
    assert code == 2 and "unknown key" in err
    code, _, err = run(capsys, "classify", "--config", str(tmp_path / "missing.cfg"))
    assert code == 2


def test_custom_table(capsys, tmp_path):
    table = tmp_path / "t.txt"
    table.write_text("# extrapolate: geometric 2\n" + "".join(f"{n} {2.0 ** n}\n" for n in range(1, 31)))
    code, out, _ = run(capsys, "classify", "--family", "custom", "--table", str(table))
    assert code == 0 and json.loads(out)["p_monopoly"] == "One"


def test_verify_quick(capsys):
    code, out, _ = run(capsys, "verify", "--quick")
    assert code == 0 and json.loads(out)["passed"]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "tdurn", "classify", "--family", "geometric", "--r", "2"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and json.loads(res.stdout)["p_monopoly"] == "One"
