"""Block-pilot OFDM grids, the per-subcarrier channel model and tensor packing.

Complex grids are arrays indexed ``(subcarrier, symbol, antenna)``.  Real
tensors fed to the network are ``(frequency, time, channel)`` with the real
and imaginary parts of each antenna interleaved along the last axis.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import ChannelRealization

QPSK = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2.0)

FILLS = ("data", "pilot")


@dataclass(frozen=True)
class GridConfig:
    n_f: int = 64
    n: int = 64
    n_r: int = 1
    n_t: int = 1
    delta_f: float = 15e3

    def __post_init__(self) -> None:
        for name in ("n_f", "n", "n_r", "n_t"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value}")
        if not self.delta_f > 0:
            raise ValueError(f"delta_f must be positive, got {self.delta_f}")


@dataclass
class TransmitGrid:
    """Transmitted symbols ``x[k, n, q]``; symbol ``pilot_index`` holds the pilots."""

    x: np.ndarray
    pilot_index: int = 0

    @property
    def pilots(self) -> np.ndarray:
        """Pilot symbols, shape ``(n_f, n_t)``."""
        return self.x[:, self.pilot_index, :]


def make_transmit_grid(
    cfg: GridConfig,
    constellation: np.ndarray = QPSK,
    rng: np.random.Generator | None = None,
    fill: str = "data",
) -> TransmitGrid:
    """Build one coherence block of transmitted symbols.

    The first OFDM symbol carries the pilot sequence: the first point of
    ``constellation`` on every subcarrier.  With ``fill="data"`` the
    remaining symbols are i.i.d. draws from ``constellation``; with
    ``fill="pilot"`` they repeat the pilot symbol, so every resource element
    is a known reference.
    """
    constellation = np.asarray(constellation, dtype=complex).ravel()
    if constellation.size == 0:
        raise ValueError("constellation is empty")
    if fill not in FILLS:
        raise ValueError(f"fill must be one of {FILLS}, got {fill!r}")
    pilot = constellation[0]
    if not np.isclose(abs(pilot), 1.0, rtol=0, atol=1e-12):
        raise ValueError(f"pilot symbol {pilot} is not unit modulus")
    x = np.full((cfg.n_f, cfg.n, cfg.n_t), pilot, dtype=complex)
    if fill == "data" and cfg.n > 1:
        if rng is None:
            raise ValueError("rng is required to draw data symbols")
        x[:, 1:, :] = constellation[rng.integers(0, constellation.size, (cfg.n_f, cfg.n - 1, cfg.n_t))]
    return TransmitGrid(x)


def noise_variance(snr_db: float) -> float:
    return 0.0 if snr_db == np.inf else 10.0 ** (-snr_db / 10.0)


def transmit(
    h: ChannelRealization,
    x: TransmitGrid,
    snr_db: float,
    rng: np.random.Generator | None = None,
    stream: int = 0,
) -> np.ndarray:
    """Received grid of one tx stream: ``Y[k, n, m] = H[k, m, q] X[k, n, q] + W[k, n, m]``.

    Users are assumed to send orthogonal pilots, so each stream is observed
    on its own; ``stream`` selects q.  ``snr_db=inf`` disables the noise.
    """
    n_f, n_r, n_t = h.shape
    if x.x.shape[0] != n_f or x.x.shape[2] != n_t:
        raise ValueError(f"channel shape {h.shape} incompatible with grid shape {x.x.shape}")
    if not 0 <= stream < n_t:
        raise ValueError(f"stream {stream} out of range for {n_t} tx antennas")
    y = h.h[:, None, :, stream] * x.x[:, :, stream, None]
    sigma2 = noise_variance(snr_db)
    if sigma2 > 0:
        if rng is None:
            raise ValueError("rng is required for finite SNR")
        scale = np.sqrt(sigma2 / 2.0)
        y = y + scale * (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape))
    return y


def grid_to_tensor(y: np.ndarray) -> np.ndarray:
    """``(n_f, n, n_r)`` complex -> ``(n_f, n, 2 n_r)`` real as re0, im0, re1, im1, ..."""
    y = np.asarray(y)
    if y.ndim != 3:
        raise ValueError(f"grid must be 3-D (n_f, n, n_r), got shape {y.shape}")
    out = np.empty(y.shape[:2] + (2 * y.shape[2],), dtype=float)
    out[..., 0::2] = y.real
    out[..., 1::2] = y.imag
    return out


def tensor_to_grid(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if t.ndim != 3 or t.shape[2] % 2:
        raise ValueError(f"tensor must be (n_f, n, even channels), got shape {t.shape}")
    return t[..., 0::2] + 1j * t[..., 1::2]


def dump_grid_csv(y: np.ndarray, path: str | Path) -> None:
    """Debug dump, one row per resource element: k, n, antenna, re, im."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "n", "antenna", "re", "im"])
        for (k, n, m), v in np.ndenumerate(y):
            writer.writerow([k, n, m, repr(float(v.real)), repr(float(v.imag))])
