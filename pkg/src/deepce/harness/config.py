"""Experiment configuration: INI-style files with one section per module, plus overrides.

Example::

    [experiment]
    scenario = siso
    snr = 0, 5, 10, 15, 20
    trials = 50
    estimators = ls, mmse, dce
    seed = 0

    [grid]
    n_f = 64
    n = 64

    [channel]
    model = epa
    rx_correlation = 0.5

    [dce]
    epochs = 200
"""

from __future__ import annotations

import configparser
import dataclasses
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..dce import DceConfig
from ..ofdm import FILLS, GridConfig

SCENARIOS = ("siso", "mimo-uplink")
CHANNELS = ("epa", "iid")
ESTIMATORS = ("ls", "mmse", "dce")


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending key path."""


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = "siso"
    grid: GridConfig = field(default_factory=GridConfig)
    channel: str = "epa"
    profile: str = "epa"
    rx_correlation: float = 0.0
    fill: str = "pilot"
    snr_points: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0)
    trials: int | None = None
    estimators: tuple[str, ...] = ESTIMATORS
    dce: DceConfig = field(default_factory=DceConfig)
    master_seed: int = 0
    workers: int = 1
    out_csv: str | None = None
    out_svg: str | None = None

    def __post_init__(self) -> None:
        def bad(key: str, msg: str) -> ConfigError:
            return ConfigError(f"{key}: {msg}")

        if self.scenario not in SCENARIOS:
            raise bad("experiment.scenario", f"must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.scenario == "mimo-uplink" and self.grid.n_r < 2:
            raise bad("grid.n_r", "mimo-uplink needs more than one receive antenna")
        if self.channel not in CHANNELS:
            raise bad("channel.model", f"must be one of {CHANNELS}, got {self.channel!r}")
        if not 0.0 <= self.rx_correlation < 1.0:
            raise bad("channel.rx_correlation", f"must lie in [0, 1), got {self.rx_correlation}")
        if self.fill not in FILLS:
            raise bad("experiment.fill", f"must be one of {FILLS}, got {self.fill!r}")
        if not self.snr_points:
            raise bad("experiment.snr", "needs at least one SNR point")
        if self.trials is not None and self.trials < 1:
            raise bad("experiment.trials", f"must be >= 1, got {self.trials}")
        unknown = set(self.estimators) - set(ESTIMATORS)
        if not self.estimators or unknown:
            raise bad("experiment.estimators", f"must be a non-empty subset of {ESTIMATORS}, got {self.estimators}")
        if self.master_seed < 0:
            raise bad("experiment.seed", "must be non-negative")
        if self.workers < 1:
            raise bad("experiment.workers", "must be >= 1")

    @property
    def n_trials(self) -> int:
        """Configured trial count; defaults to 50 when the DCE runs, else 200."""
        if self.trials is not None:
            return self.trials
        return 50 if "dce" in self.estimators else 200

    @property
    def channel_label(self) -> str:
        if self.rx_correlation > 0:
            return f"{self.channel}-corr({self.rx_correlation:g})"
        return self.channel


def _floats(text: str) -> tuple[float, ...]:
    parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
    return tuple(float(p) for p in parts)


def _names(text: str) -> tuple[str, ...]:
    return tuple(p.strip().lower() for p in text.split(",") if p.strip())


def _parse_channel(text: str) -> tuple[str, float | None]:
    m = re.fullmatch(r"\s*epa-corr\(\s*([^)]+)\)\s*", text)
    if m:
        return "epa", float(m.group(1))
    return text.strip().lower(), None


# section -> key -> (target field, parser)
_EXPERIMENT_KEYS = {
    "scenario": ("scenario", str.strip),
    "snr": ("snr_points", _floats),
    "trials": ("trials", int),
    "estimators": ("estimators", _names),
    "seed": ("master_seed", int),
    "workers": ("workers", int),
    "fill": ("fill", str.strip),
}
_CHANNEL_KEYS = {
    "model": ("channel", str.strip),
    "profile": ("profile", str.strip),
    "rx_correlation": ("rx_correlation", float),
}
_OUTPUT_KEYS = {"csv": ("out_csv", str.strip), "svg": ("out_svg", str.strip)}
_GRID_KEYS = {"n_f": int, "n": int, "n_r": int, "n_t": int, "delta_f": float}
_DCE_KEYS = {
    "hidden_layers": int,
    "hidden_channels": int,
    "epochs": int,
    "learning_rate": float,
    "z0_scale": float,
    "optimizer": str.strip,
    "seed": int,
    "dtype": str.strip,
}


def _convert(key_path: str, parser, raw: str):
    try:
        return parser(raw)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{key_path}: cannot parse {raw!r} ({err})") from None


def build_config(values: dict[str, dict[str, str]]) -> ExperimentConfig:
    """Turn ``{section: {key: raw string}}`` into a validated config."""
    top: dict = {}
    grid: dict = {}
    dce: dict = {}
    for section, entries in values.items():
        for key, raw in entries.items():
            path = f"{section}.{key}"
            if section == "experiment" and key in _EXPERIMENT_KEYS:
                name, parser = _EXPERIMENT_KEYS[key]
                top[name] = _convert(path, parser, raw)
            elif section == "channel" and key == "model":
                model, coeff = _convert(path, _parse_channel, raw)
                top["channel"] = model
                if coeff is not None:
                    top["rx_correlation"] = coeff
            elif section == "channel" and key in _CHANNEL_KEYS:
                name, parser = _CHANNEL_KEYS[key]
                top[name] = _convert(path, parser, raw)
            elif section == "output" and key in _OUTPUT_KEYS:
                name, parser = _OUTPUT_KEYS[key]
                top[name] = _convert(path, parser, raw)
            elif section == "grid" and key in _GRID_KEYS:
                grid[key] = _convert(path, _GRID_KEYS[key], raw)
            elif section == "dce" and key in _DCE_KEYS:
                dce[key] = _convert(path, _DCE_KEYS[key], raw)
            else:
                raise ConfigError(f"{path}: unknown key")
    try:
        if grid:
            top["grid"] = GridConfig(**grid)
    except ValueError as err:
        raise ConfigError(f"grid: {err}") from None
    try:
        if dce:
            top["dce"] = DceConfig(**dce)
    except ValueError as err:
        raise ConfigError(f"dce: {err}") from None
    return ExperimentConfig(**top)


def read_config_file(path: str | Path) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as err:
        raise ConfigError(f"{path}: {err.strerror}") from None
    except configparser.Error as err:
        raise ConfigError(f"{path}: {err}") from None
    return {s: dict(parser[s]) for s in parser.sections()}


def parse_config(path: str | Path | None = None, overrides: dict[str, dict[str, str]] | None = None) -> ExperimentConfig:
    """Load an optional config file and apply ``{section: {key: value}}`` overrides on top."""
    values = read_config_file(path) if path else {}
    for section, entries in (overrides or {}).items():
        values.setdefault(section, {}).update(entries)
    return build_config(values)


def replace(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    return dataclasses.replace(cfg, **changes)

