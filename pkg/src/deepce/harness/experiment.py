"""Monte-Carlo trials, SNR sweeps and fit-trace runs."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from functools import lru_cache

import numpy as np

from .. import channel as ch
from .. import dce
from ..estimators import MMSEFilter, ChannelEstimate, estimate_ls, nmse, to_db
from ..ofdm import QPSK, grid_to_tensor, make_transmit_grid, noise_variance, transmit
from .config import ExperimentConfig
from .results import ResultTable, Row, summarize
from .seeds import stream

log = logging.getLogger(__name__)


class TrialError(RuntimeError):
    pass


@lru_cache(maxsize=64)
def _mmse_filter(profile: str, delta_f: float, n_f: int, iid: bool, rho: float) -> MMSEFilter:
    r_hh = np.eye(n_f, dtype=complex) if iid else ch.analytic_rhh(ch.get_profile(profile), delta_f, n_f)
    return MMSEFilter(r_hh, rho)


def _snr_index(cfg: ExperimentConfig, snr_db: float) -> int:
    try:
        return list(cfg.snr_points).index(snr_db)
    except ValueError:
        raise ValueError(f"SNR {snr_db} dB is not one of the configured points {cfg.snr_points}") from None


def sample_channel(cfg: ExperimentConfig, rng: np.random.Generator) -> ch.ChannelRealization:
    g = cfg.grid
    if cfg.channel == "iid":
        h = ch.sample_iid_channel(g.n_f, g.n_r, g.n_t, rng)
    else:
        h = ch.sample_epa_channel(ch.get_profile(cfg.profile), g.n_f, g.delta_f, g.n_r, g.n_t, rng)
    if cfg.rx_correlation > 0:
        h = ch.apply_rx_correlation(h, cfg.rx_correlation)
    return h


def run_trial(cfg: ExperimentConfig, snr_db: float, trial_index: int) -> list[Row]:
    """One channel draw at one SNR, scored for every configured estimator.

    Only tx stream 0 is estimated: orthogonal pilots make the users separable.
    """
    si = _snr_index(cfg, snr_db)
    try:
        h = sample_channel(cfg, stream(cfg.master_seed, "channel", si, trial_index))
        x = make_transmit_grid(cfg.grid, QPSK, stream(cfg.master_seed, "transmit", si, trial_index), cfg.fill)
        y = transmit(h, x, snr_db, stream(cfg.master_seed, "noise", si, trial_index))
        h_true = h.h[:, :, :1]
        pilots = x.pilots[:, 0]
        h_ls = estimate_ls(y, pilots)
        rows = []
        for name in cfg.estimators:
            seconds = None
            if name == "ls":
                est = h_ls
            elif name == "mmse":
                flt = _mmse_filter(cfg.profile, cfg.grid.delta_f, cfg.grid.n_f, cfg.channel == "iid",
                                   noise_variance(snr_db))
                est = ChannelEstimate(flt(h_ls.h_hat), "mmse")
            else:
                start = time.perf_counter()
                est, _ = dce.deep_channel_estimate(y, pilots, cfg.dce, stream(cfg.master_seed, "dce", si, trial_index))
                seconds = time.perf_counter() - start
            score = nmse(h_true, est)
            rows.append(Row(cfg.scenario, cfg.channel_label, name, float(snr_db), trial_index, score.mean,
                            to_db(score.mean), seconds, score.err_energy, score.ref_energy))
        return rows
    except Exception as err:
        raise TrialError(f"trial {trial_index} at {snr_db} dB: {err}") from err


def _cell(args):
    cfg, snr, trial = args
    try:
        return snr, trial, run_trial(cfg, snr, trial), None
    except TrialError as err:
        return snr, trial, [], str(err)


def sweep(cfg: ExperimentConfig, progress: bool = False) -> ResultTable:
    """Every (SNR, trial) cell, plus one pooled summary row per estimator and SNR."""
    cells = [(cfg, snr, t) for snr in cfg.snr_points for t in range(cfg.n_trials)]
    table = ResultTable()
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_cell, cells))
    else:
        results = []
        for i, c in enumerate(cells):
            results.append(_cell(c))
            if progress:
                log.info("cell %d/%d (%s dB, trial %d) done", i + 1, len(cells), c[1], c[2])
    for snr, trial, rows, failure in results:
        table.rows.extend(rows)
        if failure:
            table.failures.append((snr, trial, failure))
            log.warning("%s", failure)
    table.rows.extend(summarize(table.rows))
    return table.sorted()


def run_trace(cfg: ExperimentConfig, snr_db: float = 0.0, trial_index: int = 0,
              channels: tuple[str, ...] = ("epa", "iid")) -> dict[str, dce.FitTrace]:
    """Fit the network once per channel model and return the per-epoch loss traces.

    Seeds come from the cell (0, ``trial_index``), shared across channel models.
    """
    traces = {}
    for model in channels:
        mcfg = _with_channel(cfg, model)
        h = sample_channel(mcfg, stream(cfg.master_seed, "channel", 0, trial_index))
        x = make_transmit_grid(cfg.grid, QPSK, stream(cfg.master_seed, "transmit", 0, trial_index), cfg.fill)
        y = transmit(h, x, snr_db, stream(cfg.master_seed, "noise", 0, trial_index))
        y_t = grid_to_tensor(y)
        net, z0 = dce.build_network(cfg.dce, y_t.shape, stream(cfg.master_seed, "dce", 0, trial_index))
        _, traces[model] = dce.fit(net, z0, y_t, cfg.dce)
    return traces


def _with_channel(cfg: ExperimentConfig, model: str) -> ExperimentConfig:
    return replace(cfg, channel=model, rx_correlation=0.0 if model == "iid" else cfg.rx_correlation)


def format_summary(table: ResultTable) -> str:
    lines = [f"{'channel':<16}{'snr_db':>8}  " + "".join(f"{e:>10}" for e in ("ls", "mmse", "dce"))]
    keys = sorted({(r.channel, r.snr_db) for r in table.summary})
    for chan, snr in keys:
        vals = {r.estimator: r.nmse_db for r in table.summary if r.channel == chan and r.snr_db == snr}
        snr_txt = "inf" if math.isinf(snr) else f"{snr:g}"
        lines.append(f"{chan:<16}{snr_txt:>8}  " + "".join(
            f"{vals[e]:>10.2f}" if e in vals else f"{'-':>10}" for e in ("ls", "mmse", "dce")))
    return "\n".join(lines)
