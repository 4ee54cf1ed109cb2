import math

import matplotlib.pyplot as plt
import numpy as np
import pytest

from otfs_cdrt import cli
from otfs_cdrt.config import ConfigError, load_config, load_preset, loads_config, preset_text
from otfs_cdrt.plotting import EmptyCsv, figure_from_rows
from otfs_cdrt.sweep import OUTAGE_COLUMNS, SUMRATE_COLUMNS, read_csv

SMALL_GRID = """
[sweep]
snr_db = [0.0, 10.0, 20.0, 30.0]
schemes = ["proposed", "oma", "ncdrt"]

[montecarlo]
trials = 3000
seed = 5
workers = 2
"""


def small_config(tmp_path, case="special", extra=""):
    text = preset_text(case).split("[sweep]")[0] + SMALL_GRID + extra
    path = tmp_path / f"{case}.toml"
    path.write_text(text)
    return path


def test_presets():
    cfg = load_preset("general")
    s = cfg.scenario
    assert (s.frame.M, s.frame.N, s.frame.delta_f, s.frame.carrier_hz) == (32, 16, 3750.0, 4e9)
    assert (s.alloc.alpha_c, s.alloc.alpha_e) == (0.1, 0.9)
    assert cfg.pr_over_ps == 0.5
    assert s.profiles["sc_t1"].paths == ((0, 0), (1, 2), (2, 3))
    assert s.omega("sr_t1") == 0.5
    assert cfg.snr_grid_db[0] == 0.0 and cfg.snr_grid_db[-1] == 40.0 and len(cfg.snr_grid_db) == 21
    assert load_preset("special").scenario.profiles["re_t2"].paths == ((1, 1),)
    with pytest.raises(ConfigError):
        load_preset("urban")


def test_snr_conversion_at_boundary():
    s = load_preset("general").scenario_at(20.0)
    assert s.rho_s == pytest.approx(100.0) and s.rho_r == pytest.approx(50.0)


def test_unknown_key_rejected():
    text = preset_text("general").replace("alpha_e = 0.9", "alpha_e = 0.9\nbeta = 1")
    with pytest.raises(ConfigError, match="beta"):
        loads_config(text)


def test_syntax_error_has_position():
    text = preset_text("general").replace("M = 32", "M = = 32")
    with pytest.raises(ConfigError, match="line"):
        loads_config(text)


@pytest.mark.parametrize("old,new,match", [
    ("snr_db = { start = 0.0, stop = 40.0, step = 2.0 }", "snr_db = []", "empty"),
    ("sr_t1 = 0.5", "sr_t1 = 2.0", "weaker"),
    ('schemes = ["proposed", "oma", "ncdrt"]', 'schemes = ["fdma"]', "schemes"),
    ("M = 32", "M = 3.5", "M"),
    ("l_taps = [0, 2, 3]", "l_taps = [0, 2]", "equal length"),
    ("alpha_c = 0.1", "alpha_c = 0.6", "sum to one"),
])
def test_bad_values(old, new, match):
    text = preset_text("general").replace(old, new)
    assert text != preset_text("general")
    with pytest.raises(ConfigError, match=match):
        loads_config(text)


def test_per_link_override():
    text = preset_text("general") + '\n[channel.links.re_t2]\nk_taps = [1]\nl_taps = [1]\n'
    cfg = loads_config(text)
    assert cfg.scenario.profiles["re_t2"].paths == ((1, 1),)
    assert cfg.scenario.profiles["sc_t1"].num_paths == 3


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/path.toml")


def test_cli_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[frame]\nM = \n")
    assert cli.main(["sweep-outage", "--config", str(bad), "--out", str(tmp_path / "o.csv")]) == 1
    assert "config error" in capsys.readouterr().err


def test_sweep_outage_csv_round_trip(tmp_path):
    out = tmp_path / "outage.csv"
    assert cli.main(["sweep-outage", "--config", str(small_config(tmp_path)), "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0].split(",") == list(OUTAGE_COLUMNS)
    rows = read_csv(out)
    # 4 SNR points x (3 + 3 + 2) signals; nCDRT has no xbar_c row
    assert len(rows) == 4 * 8
    assert not any(r["scheme"] == "ncdrt" and r["signal"] == "xbarc" for r in rows)
    for r in rows:
        assert r["trials"] == 3000
        assert 0.0 <= r["p_analytic"] <= 1.0 and 0.0 <= r["p_mc"] <= 1.0
        assert r["ci95"] == pytest.approx(1.96 * math.sqrt(r["p_mc"] * (1 - r["p_mc"]) / 3000))
        if r["p_analytic"] >= 10 / 3000:
            assert abs(r["p_mc"] - r["p_analytic"]) <= max(0.01, 3 * r["ci95"])


def test_proposed_xe_beats_oma_in_csv(tmp_path):
    out = tmp_path / "outage.csv"
    cli.main(["sweep-outage", "--config", str(small_config(tmp_path)), "--out", str(out), "--analytic-only"])
    rows = read_csv(out)
    get = {(r["snr_db"], r["scheme"], r["signal"]): r for r in rows}
    for snr in (0.0, 10.0, 20.0, 30.0):
        assert get[snr, "proposed", "xe"]["p_analytic"] < get[snr, "oma", "xe"]["p_analytic"]
        assert math.isnan(get[snr, "proposed", "xe"]["p_mc"])


def test_sweep_sumrate(tmp_path):
    out = tmp_path / "sr.csv"
    assert cli.main(["sweep-sumrate", "--config", str(small_config(tmp_path)), "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0].split(",") == list(SUMRATE_COLUMNS)
    rows = read_csv(out)
    by = {(r["snr_db"], r["scheme"]): r["sr_analytic"] for r in rows}
    for snr in (0.0, 10.0, 20.0, 30.0):
        assert by[snr, "proposed"] >= by[snr, "ncdrt"] >= 0
        assert by[snr, "proposed"] >= by[snr, "oma"]
    assert by[30.0, "oma"] <= 3.8 / 4


def test_trials_seed_workers_flags(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cfg = str(small_config(tmp_path, "general"))
    cli.main(["sweep-outage", "--config", cfg, "--out", str(a), "--trials", "2048", "--seed", "1", "--workers", "1"])
    cli.main(["sweep-outage", "--config", cfg, "--out", str(b), "--trials", "2048", "--seed", "1", "--workers", "4"])
    assert a.read_text() == b.read_text()
    assert read_csv(a)[0]["trials"] == 2048


def test_worker_env_override(monkeypatch):
    monkeypatch.setenv("OTFS_CDRT_WORKERS", "6")
    args = cli.build_parser().parse_args(["validate-cf", "--case", "special"])
    assert cli._load(args).mc.parallelism == 6
    args = cli.build_parser().parse_args(["validate-cf", "--case", "special", "--workers", "2"])
    assert cli._load(args).mc.parallelism == 2


def test_validate_cf_passes_and_negative_control(capsys):
    assert cli.main(["validate-cf", "--case", "general", "--samples", "200000"]) == 0
    out = capsys.readouterr().out
    for link in ("sc_t1", "sr_t1", "sc_t2", "re_t2"):
        assert link in out and "sup|model|" in out
    assert cli.main(["validate-cf", "--case", "general", "--samples", "200000", "--mu-scale", "100"]) == 2


def test_plot_outputs(tmp_path):
    csv_path = tmp_path / "outage.csv"
    cli.main(["sweep-outage", "--config", str(small_config(tmp_path)), "--out", str(csv_path)])
    assert cli.main(["plot", "--in", str(csv_path), "--out", str(tmp_path / "fig")]) == 0
    svg = tmp_path / "fig" / "outage.svg"
    assert svg.exists() and svg.read_text().lstrip().startswith("<?xml")


def test_outage_figure_axes(tmp_path):
    csv_path = tmp_path / "outage.csv"
    cli.main(["sweep-outage", "--config", str(small_config(tmp_path)), "--out", str(csv_path)])
    fig = figure_from_rows(read_csv(csv_path))
    ax = fig.axes[0]
    assert ax.get_yscale() == "log"
    labels = [ln.get_label() for ln in ax.get_lines() if not ln.get_label().startswith("_")]
    assert len(labels) == len(set(labels)) == 8
    plt.close(fig)


def test_sumrate_figure_linear(tmp_path):
    csv_path = tmp_path / "sr.csv"
    cli.main(["sweep-sumrate", "--config", str(small_config(tmp_path)), "--out", str(csv_path), "--analytic-only"])
    fig = figure_from_rows(read_csv(csv_path))
    assert fig.axes[0].get_yscale() == "linear"
    plt.close(fig)


def test_plot_refuses_empty_csv(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text(",".join(OUTAGE_COLUMNS) + "\n")
    assert cli.main(["plot", "--in", str(empty), "--out", str(tmp_path)]) == 1
    with pytest.raises(EmptyCsv):
        figure_from_rows([])
