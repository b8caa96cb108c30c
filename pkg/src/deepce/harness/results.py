"""Result rows, per-cell summaries and CSV round-tripping."""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import astuple, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from ..estimators import to_db

SUMMARY = "summary"


@dataclass(frozen=True)
class Row:
    scenario: str
    channel: str
    estimator: str
    snr_db: float
    trial: int | str  # trial index, or "summary"
    nmse_linear: float
    nmse_db: float
    fit_seconds: float | None = None
    err_energy: float = 0.0
    ref_energy: float = 0.0

    @property
    def is_summary(self) -> bool:
        return self.trial == SUMMARY


COLUMNS = [f.name for f in fields(Row)]


@dataclass
class ResultTable:
    rows: list[Row] = field(default_factory=list)
    failures: list[tuple[float, int, str]] = field(default_factory=list)

    @property
    def data(self) -> list[Row]:
        return [r for r in self.rows if not r.is_summary]

    @property
    def summary(self) -> list[Row]:
        return [r for r in self.rows if r.is_summary]

    def mean_nmse(self, estimator: str, snr_db: float) -> float:
        for r in self.summary:
            if r.estimator == estimator and r.snr_db == snr_db:
                return r.nmse_linear
        raise KeyError(f"no summary for {estimator} at {snr_db} dB")

    def sorted(self) -> "ResultTable":
        order = {"ls": 0, "mmse": 1, "dce": 2}

        def key(r: Row):
            trial = (1, 0) if r.is_summary else (0, r.trial)
            return (r.scenario, r.channel, r.snr_db, order.get(r.estimator, 9), r.estimator, trial)

        return ResultTable(sorted(self.rows, key=key), sorted(self.failures))


def summarize(rows: list[Row]) -> list[Row]:
    """One summary row per (scenario, channel, estimator, snr).

    The energy and timing columns are arithmetic means of the data rows; the
    NMSE is pooled, i.e. mean error energy over mean channel energy.
    """
    groups: dict[tuple, list[Row]] = defaultdict(list)
    for r in rows:
        if not r.is_summary:
            groups[(r.scenario, r.channel, r.estimator, r.snr_db)].append(r)
    out = []
    for (scenario, chan, est, snr), members in groups.items():
        err = float(np.mean([r.err_energy for r in members]))
        ref = float(np.mean([r.ref_energy for r in members]))
        times = [r.fit_seconds for r in members if r.fit_seconds is not None]
        pooled = err / ref
        out.append(Row(scenario, chan, est, snr, SUMMARY, pooled, to_db(pooled),
                       float(np.mean(times)) if times else None, err, ref))
    return out


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(table: ResultTable, path: str | Path, timings: bool = False) -> None:
    """Write header plus rows in ``COLUMNS`` order.

    Wall-clock ``fit_seconds`` is left blank unless ``timings`` is set, so
    the file is a deterministic function of the configuration.
    """
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(COLUMNS)
            for row in table.rows:
                if not timings:
                    row = replace(row, fit_seconds=None)
                writer.writerow([_fmt(v) for v in astuple(row)])
    except OSError as err:
        raise OSError(f"cannot write results to {path}: {err.strerror}") from None


def _parse_trial(text: str) -> int | str:
    return text if text == SUMMARY else int(text)


def read_csv(path: str | Path) -> ResultTable:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        rows = []
        for rec in reader:
            scenario, chan, est, snr, trial, lin, db, secs, err, ref = rec
            rows.append(Row(scenario, chan, est, float(snr), _parse_trial(trial), float(lin), float(db),
                            float(secs) if secs else None, float(err), float(ref)))
    return ResultTable(rows)
