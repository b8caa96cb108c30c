"""Minimal self-contained SVG line plots: NMSE vs SNR curves and fit-loss traces."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from ..dce import FitTrace
from .results import ResultTable

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf")
WIDTH, HEIGHT = 640, 440
LEFT, RIGHT, TOP, BOTTOM = 70, 160, 30, 55


@dataclass
class PlotSpec:
    title: str = ""
    xlabel: str = "SNR (dB)"
    ylabel: str = "NMSE (dB)"
    log_y: bool = False


def _ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    return [round(start + i * step, 10) for i in range(int((hi - start) / step + 1e-9) + 1)]


def render_svg(series: dict[str, tuple[np.ndarray, np.ndarray]], spec: PlotSpec) -> str:
    if not series or any(len(x) == 0 for x, _ in series.values()):
        raise ValueError("nothing to plot: every series needs at least one point")
    ys_all = []
    for _, y in series.values():
        y = np.asarray(y, dtype=float)
        if spec.log_y:
            if np.any(y <= 0):
                raise ValueError("log-scale plot needs positive values")
            y = np.log10(y)
        ys_all.append(y)
    xs = np.concatenate([np.asarray(x, dtype=float) for x, _ in series.values()])
    ys = np.concatenate(ys_all)
    finite = np.isfinite(ys)
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys[finite].min()), float(ys[finite].max())
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1, x_hi + 1
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1, y_hi + 1
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(x: float) -> float:
        return LEFT + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y: float) -> float:
        return TOP + (y_hi - y) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x_lo, x_hi):
        out.append(f'<line x1="{px(t):.2f}" y1="{TOP + ph}" x2="{px(t):.2f}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{TOP + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y_lo, y_hi):
        label = f"1e{t:g}" if spec.log_y else f"{t:g}"
        out.append(f'<line x1="{LEFT - 5}" y1="{py(t):.2f}" x2="{LEFT}" y2="{py(t):.2f}" stroke="black"/>')
        out.append(f'<line x1="{LEFT}" y1="{py(t):.2f}" x2="{LEFT + pw}" y2="{py(t):.2f}" stroke="#dddddd"/>')
        out.append(f'<text x="{LEFT - 8}" y="{py(t) + 4:.2f}" text-anchor="end">{label}</text>')
    out.append(f'<text x="{LEFT + pw / 2}" y="{HEIGHT - 12}" text-anchor="middle">{escape(spec.xlabel)}</text>')
    out.append(
        f'<text x="16" y="{TOP + ph / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {TOP + ph / 2})">{escape(spec.ylabel)}</text>'
    )
    if spec.title:
        out.append(f'<text x="{LEFT + pw / 2}" y="{TOP - 10}" text-anchor="middle">{escape(spec.title)}</text>')
    for i, ((name, (x, _)), y) in enumerate(zip(series.items(), ys_all)):
        color = COLORS[i % len(COLORS)]
        pts = [(px(a), py(b)) for a, b in zip(np.asarray(x, dtype=float), y) if np.isfinite(b)]
        if len(pts) > 1:
            coords = " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)
            out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        if len(pts) <= 20:
            for a, b in pts:
                out.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="3" fill="{color}"/>')
        ly = TOP + 15 + 18 * i
        out.append(f'<g class="legend"><line x1="{LEFT + pw + 12}" y1="{ly}" x2="{LEFT + pw + 32}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>'
                   f'<text x="{LEFT + pw + 38}" y="{ly + 4}">{escape(name)}</text></g>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def table_series(table: ResultTable) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """NMSE (dB of the pooled mean) vs SNR, one series per (channel, estimator)."""
    summary = table.summary
    channels = sorted({r.channel for r in summary})
    series = {}
    for chan in channels:
        for est in ("ls", "mmse", "dce"):
            pts = sorted((r.snr_db, r.nmse_db) for r in summary if r.channel == chan and r.estimator == est)
            if pts:
                name = est.upper() if len(channels) == 1 else f"{est.upper()} {chan}"
                series[name] = (np.array([p[0] for p in pts]), np.array([p[1] for p in pts]))
    return series


def emit_svg(data: ResultTable | dict[str, FitTrace], path: str | Path, spec: PlotSpec | None = None) -> None:
    """Write an NMSE-vs-SNR plot for a result table, or MSE-vs-epoch for named fit traces."""
    if isinstance(data, ResultTable):
        spec = spec or PlotSpec()
        series = table_series(data)
    else:
        spec = spec or PlotSpec(xlabel="epoch", ylabel="MSE", log_y=True)
        series = {name: (np.arange(len(t.mse_per_epoch)), t.mse_per_epoch) for name, t in data.items()}
    svg = render_svg(series, spec)
    try:
        Path(path).write_text(svg)
    except OSError as err:
        raise OSError(f"cannot write plot to {path}: {err.strerror}") from None
