import numpy as np
import pytest

from fdrelay.cli import main
from fdrelay.experiments import (
    ConfigError,
    CurveRow,
    CurveSet,
    crossing,
    emit_report,
    grid,
    load_config,
    parse_config,
    run_experiment,
)

SMALL = """
# quick INR sweep
sweep = inr_sweep
sweep_points = 10, 30
snr_db = 35
schemes = full_csi, fixed_0.5
trials = 10000
seed = 3
"""


def test_grid_inclusive():
    assert grid(0, 50, 2.5)[-1] == 50 and len(grid(0, 50, 2.5)) == 21
    assert grid(0.1, 0.9, 0.1) == (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


def test_parse_config_and_overrides():
    cfg = parse_config(SMALL, {"trials": "20000"})
    assert cfg.sweep == "inr_sweep" and cfg.sweep_points == (10.0, 30.0)
    assert cfg.trials == 20000 and cfg.rng.seed == 3
    p = cfg.params_at(30.0)
    assert p.inr == pytest.approx(1e3) and p.snr == pytest.approx(10**3.5)


def test_defaults_follow_simulation_setup():
    p = parse_config("preset = inr").params_at(20.0)
    assert (p.rate, p.eh_efficiency, p.path_loss_exp, p.d1, p.d2) == (3.0, 0.4, 3.0, 1.0, 1.0)
    assert p.mean_h2 == p.mean_g2 == 1.0


def test_position_sweep_keeps_total_distance():
    cfg = load_config("position")
    p = cfg.params_at(0.3)
    assert p.d1 + p.d2 == pytest.approx(2.0)


@pytest.mark.parametrize(
    "text, msg",
    [
        ("sweep = nope\nsweep_points = 1", "sweep must be one of"),
        ("sweep = inr_sweep", "needs sweep and sweep_points"),
        ("sweep = position_sweep\nsweep_points = 0.5, 2.0", "d1 \\+ d2 = 2"),
        ("sweep = inr_sweep\nsweep_points = 1\ntrials = 10", "trials must be"),
        ("sweep = inr_sweep\nsweep_points = 1\nbogus = 3", "unknown parameters"),
        ("sweep = inr_sweep\nsweep_points = 1\nschemes = magic", "unknown scheme"),
        ("sweep = inr_sweep\nsweep_points = 1\neta = 1.5", "eh_efficiency"),
        ("just words", "expected key = value"),
    ],
)
def test_config_errors_name_the_invariant(text, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config(text)


def test_run_is_deterministic_and_sorted(tmp_path):
    cfg = parse_config(SMALL)
    a = run_experiment(cfg)
    b = run_experiment(cfg)
    assert a.to_csv() == b.to_csv()
    keys = [(r.scheme, r.sweep_value) for r in a.rows]
    assert keys == sorted(keys)
    assert len(a.rows) == 4


def test_csv_roundtrip(tmp_path):
    curves = run_experiment(parse_config(SMALL))
    path = tmp_path / "c.csv"
    text = curves.to_csv(path)
    assert text.splitlines()[0].startswith("# package: artifact")
    assert "sweep_value,scheme,p_out,half_width_95,trials" in text
    back = CurveSet.from_csv(path)
    assert back.meta["seed"] == "3"
    assert [(r.scheme, r.sweep_value, r.trials) for r in back.rows] == [(r.scheme, r.sweep_value, r.trials) for r in curves.rows]


def _curves(xs, named):
    rows = [CurveRow(x, name, p, 0.0, 10**6) for name, ps in named.items() for x, p in zip(xs, ps)]
    return CurveSet(rows)


def test_crossing_log_interpolation():
    assert crossing([0, 10], [1e-3, 1e-1], 1e-2) == pytest.approx(5.0)
    assert crossing([0, 10], [1e-3, 1e-2], 1e-1) is None


def test_identical_curves_zero_gain():
    xs = np.arange(0, 50, 5.0)
    p = 10 ** (-3 + xs / 20)
    rows = emit_report(_curves(xs, {"full_csi": p, "fixed_0.5": p}), levels=(1e-1,))
    assert rows[0].gain_db == pytest.approx(0.0)


def test_gain_sign_for_worsening_and_improving_axes():
    xs = np.arange(0, 50, 5.0)
    worse = 10 ** (-3 + xs / 20)
    inr = emit_report(_curves(xs, {"full_csi": 10 ** (-3 + (xs - 5) / 20), "fixed_0.5": worse}), levels=(1e-1,))
    assert inr[0].gain_db == pytest.approx(5.0)
    better = 10 ** (-(xs / 20))
    snr = emit_report(_curves(xs, {"full_csi": 10 ** (-(xs + 5) / 20), "fixed_0.5": better}), levels=(1e-1,))
    assert snr[0].gain_db == pytest.approx(5.0)


def test_uncrossed_level_reported():
    xs = np.arange(0, 50, 5.0)
    p = np.full(xs.size, 0.5)
    assert emit_report(_curves(xs, {"full_csi": p, "fixed_0.5": p}))[0].gain_db is None


# ---------------------------------------------------------------- CLI


def test_cli_run_and_report(tmp_path, capsys):
    cfgfile = tmp_path / "small.cfg"
    cfgfile.write_text(SMALL)
    out = tmp_path / "o.csv"
    assert main(["run", str(cfgfile), "--set", "seed=4", "-o", str(out)]) == 0
    assert "seed: 4" in out.read_text()
    assert main(["report", str(out)]) == 0
    assert "gain_dB" in capsys.readouterr().out


def test_cli_config_error_exit_code(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.cfg")]) == 1
    assert "config error" in capsys.readouterr().err
    bad = tmp_path / "bad.cfg"
    bad.write_text("sweep = inr_sweep\nsweep_points = 1\ntrials = 5")
    assert main(["run", str(bad)]) == 1


def test_cli_report_missing_file(tmp_path):
    assert main(["report", str(tmp_path / "none.csv")]) == 1


def test_cli_numerical_failure_exit_code(monkeypatch, tmp_path):
    import fdrelay.cli as cli

    def boom(cfg):
        raise FloatingPointError("non-finite outage estimate")

    monkeypatch.setattr(cli, "run_experiment", boom)
    cfgfile = tmp_path / "small.cfg"
    cfgfile.write_text(SMALL)
    assert main(["run", str(cfgfile)]) == 2


def test_cli_validate_quick(capsys):
    assert main(["validate"]) == 0
    out = capsys.readouterr().out
    assert out.count("[PASS]") == 5
