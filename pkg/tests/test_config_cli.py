import numpy as np
import pytest

from powertalk.cli import main
from powertalk.config import build_experiment_config, read_key_values
from powertalk.errors import ConfigError


def _write(tmp_path, text, name="exp.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_read_key_values(tmp_path):
    path = _write(tmp_path, """
# comment line
feedback.n_bits = 4   # trailing comment
experiment.trials = 7
sweep.values = 0, 5, 10
""")
    kv = read_key_values(path)
    assert kv == {"feedback.n_bits": "4", "experiment.trials": "7",
                  "sweep.values": "0, 5, 10"}


def test_unknown_key_is_error(tmp_path):
    path = _write(tmp_path, "feedbock.n_bits = 4\n")
    with pytest.raises(ConfigError, match="feedbock.n_bits"):
        read_key_values(path)


def test_bad_value_is_error(tmp_path):
    path = _write(tmp_path, "feedback.epsilon = high\n")
    with pytest.raises(ConfigError, match="feedback.epsilon"):
        build_experiment_config("phase1-esnr", path)


def test_missing_file_is_error():
    with pytest.raises(ConfigError, match="/nope/missing.cfg"):
        build_experiment_config("phase1-esnr", "/nope/missing.cfg")


def test_defaults_and_precedence(tmp_path):
    path = _write(tmp_path, "experiment.trials = 50\nexperiment.seed = 4\n")
    cfg, _ = build_experiment_config("phase1-esnr", path)
    assert cfg.n_trials == 50 and cfg.seed == 4
    assert cfg.sweep_variable == "sir_db"
    assert cfg.sweep_values == (0.0, 2.0, 4.0, 6.0, 8.0, 10.0)
    # flag overrides config; config overrides default
    cfg, _ = build_experiment_config("phase1-esnr", path, {"n_trials": 9, "seed": None})
    assert cfg.n_trials == 9 and cfg.seed == 4


def test_family_sweep_variable_mismatch(tmp_path):
    path = _write(tmp_path, "sweep.variable = isd\n")
    with pytest.raises(ConfigError, match="sweeps"):
        build_experiment_config("phase1-esnr", path)


def test_grid_default_for_global(tmp_path):
    path = _write(tmp_path, "scenario.s = 2\n")
    cfg, _ = build_experiment_config("global-sumrate", path)
    assert cfg.scenario_kind == "grid" and cfg.S == 2


def test_cli_selftest_exit_zero(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "[ok]" in out and "[FAIL]" not in out


def test_cli_missing_config_names_path(tmp_path, capsys):
    rc = main(["phase1-esnr", "--config", "/nope/x.cfg", "--out", str(tmp_path / "o.csv")])
    assert rc == 2
    assert "/nope/x.cfg" in capsys.readouterr().err


def test_cli_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_cli_runs_tiny_experiment(tmp_path, capsys):
    cfg = _write(tmp_path, "experiment.trials = 2\nsweep.values = 0, 10\n")
    out = tmp_path / "esnr.csv"
    rc = main(["phase1-esnr", "--config", cfg, "--out", str(out), "--threads", "1"])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "sweep_var,sweep_value,method,metric,value,n_trials,seed"
    assert len(lines) == 1 + 2 * 2  # two methods x two sweep points
    assert all(line.split(",")[6] == "12345" for line in lines[1:])


def test_cli_trials_flag_overrides_config(tmp_path):
    cfg = _write(tmp_path, "experiment.trials = 2\nsweep.values = 0\n")
    out = tmp_path / "o.csv"
    assert main(["phase1-esnr", "--config", cfg, "--out", str(out), "--trials", "3"]) == 0
    assert all(line.split(",")[5] == "3" for line in out.read_text().splitlines()[1:])


def test_cli_budget_guard_exit_3(tmp_path, capsys):
    # K=9 grid with 8 levels: the per-slot decode search is 8^8 > 1e6
    cfg = _write(tmp_path, """
scenario.s = 1
phase2.levels = 8
phase2.n_bits = 3
experiment.trials = 1
sweep.values = 20
""")
    rc = main(["global-sumrate", "--config", cfg, "--out", str(tmp_path / "g.csv")])
    assert rc == 3
    assert "exceeds" in capsys.readouterr().err


def test_cli_design_quantizer(tmp_path):
    cfg = _write(tmp_path, "phase2.quantizer = meq\nphase2.n_bits = 2\nquantizer.prior_mean = 1.0\n")
    out = tmp_path / "codebook.csv"
    assert main(["design-quantizer", "--config", cfg, "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "index,lower_bound,upper_bound,representative"
    assert len(lines) == 5
    # MEQ quartile bound of the unit exponential
    assert float(lines[1].split(",")[2]) == pytest.approx(-np.log(0.75), abs=1e-9)
