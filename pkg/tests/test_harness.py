import json
import math

import numpy as np
import pytest

from deepce.harness import (
    ConfigError,
    ExperimentConfig,
    PlotSpec,
    ResultTable,
    Row,
    emit_csv,
    emit_svg,
    parse_config,
    read_csv,
    run_trace,
    run_trial,
    sweep,
)
from deepce.harness.cli import main, savings_percent
from deepce.harness.config import replace
from deepce.harness.plot import render_svg
from deepce.harness.results import summarize
from deepce.harness.seeds import seed_sequence, stream
from deepce.dce import DceConfig, FitTrace
from deepce.ofdm import GridConfig

TINY_DCE = {"hidden_layers": "2", "hidden_channels": "8", "epochs": "5"}


# --------------------------------------------------------------- seeds


def test_streams_are_reproducible_and_distinct():
    a = stream(0, "channel", 0, 0).standard_normal(8)
    np.testing.assert_array_equal(a, stream(0, "channel", 0, 0).standard_normal(8))
    others = [stream(0, "noise", 0, 0), stream(0, "channel", 1, 0), stream(0, "channel", 0, 1), stream(1, "channel", 0, 0)]
    for g in others:
        assert not np.array_equal(a, g.standard_normal(8))


def test_stream_draws_do_not_overlap():
    draws = [stream(0, tag, s, t).random(2000) for tag in ("channel", "noise") for s in range(3) for t in range(3)]
    flat = np.concatenate(draws)
    assert len(np.unique(flat)) == flat.size


def test_seed_sequence_rejects_bad_input():
    with pytest.raises(KeyError):
        seed_sequence(0, "pilot", 0, 0)
    with pytest.raises(ValueError):
        seed_sequence(-1, "noise", 0, 0)


# --------------------------------------------------------------- config


def test_config_defaults():
    cfg = parse_config()
    assert cfg == ExperimentConfig()
    assert cfg.grid == GridConfig(n_f=64, n=64)
    assert cfg.snr_points == (0.0, 5.0, 10.0, 15.0, 20.0)
    assert cfg.n_trials == 50
    assert replace(cfg, estimators=("ls", "mmse")).n_trials == 200
    assert cfg.dce == DceConfig()


def test_config_file_and_overrides(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text(
        "[experiment]\nscenario = mimo-uplink\nsnr = 0, 10\ntrials = 7\nestimators = ls, dce\n\n"
        "[grid]\nn_f = 32\nn = 32\nn_r = 4\n\n[channel]\nmodel = epa-corr(0.5)\n\n[dce]\nepochs = 20\n"
    )
    cfg = parse_config(path, {"experiment": {"seed": "9"}, "dce": {"hidden_layers": "3"}})
    assert cfg.scenario == "mimo-uplink"
    assert cfg.snr_points == (0.0, 10.0)
    assert cfg.n_trials == 7
    assert cfg.estimators == ("ls", "dce")
    assert cfg.grid.n_r == 4 and cfg.grid.n_f == 32
    assert cfg.channel == "epa" and cfg.rx_correlation == 0.5
    assert cfg.channel_label == "epa-corr(0.5)"
    assert cfg.dce.epochs == 20 and cfg.dce.hidden_layers == 3
    assert cfg.master_seed == 9


@pytest.mark.parametrize(
    "values, key",
    [
        ({"experiment": {"trials": "0"}}, "experiment.trials"),
        ({"experiment": {"trials": "many"}}, "experiment.trials"),
        ({"experiment": {"estimators": "ls, ml"}}, "experiment.estimators"),
        ({"experiment": {"colour": "red"}}, "experiment.colour"),
        ({"channel": {"model": "rayleigh"}}, "channel.model"),
        ({"channel": {"rx_correlation": "1.0"}}, "channel.rx_correlation"),
        ({"experiment": {"scenario": "mimo-uplink"}}, "grid.n_r"),
        ({"grid": {"n_f": "0"}}, "grid"),
        ({"dce": {"optimizer": "lbfgs"}}, "dce"),
    ],
)
def test_config_errors_name_the_key(values, key):
    with pytest.raises(ConfigError) as info:
        parse_config(overrides=values)
    assert str(info.value).startswith(key)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "absent.ini")


# --------------------------------------------------------------- results


def _row(est="ls", snr=0.0, trial=0, lin=0.5, err=1.0, ref=2.0, secs=None):
    return Row("siso", "epa", est, snr, trial, lin, 10 * math.log10(lin), secs, err, ref)


def test_summary_is_pooled():
    rows = [_row(trial=0, lin=0.5, err=1.0, ref=2.0, secs=1.0), _row(trial=1, lin=0.25, err=1.0, ref=4.0, secs=3.0)]
    (s,) = summarize(rows)
    assert s.trial == "summary"
    assert s.nmse_linear == pytest.approx(2.0 / 6.0)
    assert s.err_energy == 1.0 and s.ref_energy == 3.0
    assert s.fit_seconds == 2.0


def test_csv_roundtrip(tmp_path):
    rows = [_row(trial=0, lin=0.1 + 1e-17), _row(est="mmse", trial=1, lin=1 / 3, secs=0.25)]
    table = ResultTable(rows + summarize(rows)).sorted()
    path = tmp_path / "r.csv"
    emit_csv(table, path, timings=True)
    assert read_csv(path).rows == table.rows
    emit_csv(table, path)
    assert all(r.fit_seconds is None for r in read_csv(path).rows)
    assert path.read_text().splitlines()[0] == (
        "scenario,channel,estimator,snr_db,trial,nmse_linear,nmse_db,fit_seconds,err_energy,ref_energy")


def test_csv_empty_and_small(tmp_path):
    path = tmp_path / "e.csv"
    emit_csv(ResultTable(), path)
    assert len(path.read_text().splitlines()) == 1
    assert read_csv(path).rows == []
    emit_csv(ResultTable([_row(trial=i) for i in range(3)]), path)
    assert len(path.read_text().splitlines()) == 4


def test_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n")
    with pytest.raises(ValueError, match="header"):
        read_csv(path)


def test_mean_nmse_lookup():
    table = ResultTable(summarize([_row(lin=0.5, err=1.0, ref=2.0)]))
    assert table.mean_nmse("ls", 0.0) == 0.5
    with pytest.raises(KeyError):
        table.mean_nmse("dce", 0.0)


# --------------------------------------------------------------- plots


def test_svg_has_one_polyline_and_legend_entry_per_series(tmp_path):
    series = {"ls": ([0, 5, 10], [0.0, -5.0, -10.0]), "mmse": ([0, 5, 10], [-10.0, -15.0, -20.0])}
    svg = render_svg(series, PlotSpec(title="a & b"))
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert svg.count("<polyline") == 2
    assert svg.count('class="legend"') == 2
    assert "a &amp; b" in svg
    assert svg.count("<circle") == 6


def test_svg_errors():
    with pytest.raises(ValueError):
        render_svg({}, PlotSpec())
    with pytest.raises(ValueError, match="positive"):
        render_svg({"a": ([0, 1], [1.0, 0.0])}, PlotSpec(log_y=True))


def test_emit_svg_from_table_and_traces(tmp_path):
    rows = [_row(est=e, snr=s, lin=l) for e, l in (("ls", 0.5), ("mmse", 0.1)) for s in (0.0, 10.0)]
    emit_svg(ResultTable(rows + summarize(rows)), tmp_path / "t.svg")
    assert (tmp_path / "t.svg").read_text().count("<polyline") == 2
    traces = {"epa": FitTrace(np.array([1.0, 0.5]), 0.4), "iid": FitTrace(np.array([1.0, 0.9]), 0.8)}
    emit_svg(traces, tmp_path / "f.svg", PlotSpec(log_y=True))
    assert (tmp_path / "f.svg").read_text().count("<polyline") == 2


# --------------------------------------------------------------- experiments


def _small(**overrides):
    values = {"experiment": {"snr": "0, 10", "trials": "3", "estimators": "ls, mmse"}, "grid": {"n_f": "16", "n": "8"}}
    for section, entries in overrides.items():
        values.setdefault(section, {}).update(entries)
    return parse_config(overrides=values)


def test_one_trial_gives_one_data_row_and_one_summary_per_estimator():
    cfg = _small(experiment={"trials": "1", "snr": "5"})
    table = sweep(cfg)
    assert len(table.data) == 2 and len(table.summary) == 2
    for est in ("ls", "mmse"):
        (d,) = [r for r in table.data if r.estimator == est]
        assert table.mean_nmse(est, 5.0) == pytest.approx(d.nmse_linear, rel=1e-12)


def test_noiseless_ls_trial_is_exact():
    cfg = _small(experiment={"snr": "inf", "estimators": "ls"})
    (row,) = run_trial(cfg, math.inf, 0)
    assert row.nmse_linear < 1e-20


def test_sweep_is_deterministic_and_order_independent(tmp_path):
    cfg = _small(dce=TINY_DCE, experiment={"estimators": "ls, mmse, dce"})
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_csv(sweep(cfg), a)
    emit_csv(sweep(replace(cfg, workers=2)), b)
    assert a.read_bytes() == b.read_bytes()
    # a cell's result depends only on its own seeds
    single = run_trial(cfg, 10.0, 2)
    table = read_csv(a)
    assert [r.nmse_linear for r in table.data if r.snr_db == 10.0 and r.trial == 2] == [r.nmse_linear for r in single]


def test_sweep_table_shape_and_ordering():
    cfg = _small()
    table = sweep(cfg)
    assert len(table.data) == 2 * 3 * 2
    assert len(table.summary) == 2 * 2
    assert not table.failures
    for snr in cfg.snr_points:
        assert table.mean_nmse("mmse", snr) < table.mean_nmse("ls", snr)


def test_mimo_uplink_trial():
    cfg = _small(experiment={"scenario": "mimo-uplink"}, grid={"n_r": "4"}, channel={"model": "epa-corr(0.5)"})
    rows = run_trial(cfg, 10.0, 0)
    assert {r.channel for r in rows} == {"epa-corr(0.5)"}
    assert {r.scenario for r in rows} == {"mimo-uplink"}


def test_iid_mmse_uses_identity_correlation():
    rows = run_trial(_small(channel={"model": "iid"}), 0.0, 0)
    ls, mmse = rows
    # with R = I the filter is a plain 1/(1 + sigma^2) shrink, which halves LS at 0 dB
    assert mmse.nmse_linear < ls.nmse_linear


def test_run_trace_returns_one_trace_per_channel():
    cfg = _small(dce=TINY_DCE)
    traces = run_trace(cfg, snr_db=0.0)
    assert set(traces) == {"epa", "iid"}
    assert all(len(t.mse_per_epoch) == 5 for t in traces.values())


# --------------------------------------------------------------- cli


def test_cli_pilot_savings(capsys):
    assert main(["pilot-savings", "--grid", "64x64"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["percent"] == 68
    assert out["fraction"] == pytest.approx(0.671875)
    assert main(["pilot-savings", "--grid", "1024x1024"]) == 0
    assert json.loads(capsys.readouterr().out)["percent"] == 98


def test_savings_percent_rounding():
    assert savings_percent(0.671875) == 68
    assert savings_percent(0.68) == 68
    assert savings_percent(0.0) == 0


def test_cli_sweep_writes_outputs(tmp_path, capsys):
    csv_path, svg_path = tmp_path / "s.csv", tmp_path / "s.svg"
    code = main(["sweep", "--snr", "0,10", "--trials", "2", "--estimators", "ls,mmse", "--grid", "16x8",
                 "--out-csv", str(csv_path), "--out-svg", str(svg_path)])
    assert code == 0
    assert "mmse" in capsys.readouterr().out
    assert len(read_csv(csv_path).rows) == 2 * 2 * 2 + 4
    assert svg_path.read_text().count("<polyline") == 2


def test_cli_trace(tmp_path):
    out = tmp_path / "trace.csv"
    code = main(["trace", "--grid", "16x8", "--epochs", "3", "--out-csv", str(out)])
    # default 6 hidden layers cannot fit a 16x8 grid
    assert code == 1
    code = main(["trace", "--grid", "32x32", "--epochs", "3", "--out-csv", str(out)])
    assert code == 0
    assert out.read_text().splitlines()[0] == "epoch,epa,iid"


def test_cli_config_error_exit_code(capsys):
    assert main(["sweep", "--trials", "0"]) == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "ConfigError"
    assert err["message"].startswith("experiment.trials")
