"""Multipath channel realizations in the frequency domain.

Channels are tapped-delay-line models evaluated directly at the subcarrier
frequencies, ``H[k] = sum_p g_p exp(-2j pi k df tau_p)``, with independent
Rayleigh tap gains.  Arrays are laid out ``(subcarrier, rx, tx)``.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

NORM_TOL = 1e-12


@dataclass(frozen=True)
class PowerDelayProfile:
    """Tap delays (seconds) and average tap powers (linear)."""

    delays: np.ndarray
    powers: np.ndarray
    name: str = "custom"

    def __post_init__(self) -> None:
        delays = np.atleast_1d(np.asarray(self.delays, dtype=float))
        powers = np.atleast_1d(np.asarray(self.powers, dtype=float))
        if delays.ndim != 1 or delays.shape != powers.shape or delays.size == 0:
            raise ValueError("delays and powers must be equal-length non-empty 1-D sequences")
        if np.any(delays < 0) or np.any(np.diff(delays) <= 0):
            raise ValueError("tap delays must be non-negative and strictly increasing")
        if np.any(powers <= 0) or not np.all(np.isfinite(powers)):
            raise ValueError("tap powers must be positive and finite")
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "powers", powers)

    @classmethod
    def from_db(cls, name: str, delays_ns, powers_db, normalize: bool = True) -> "PowerDelayProfile":
        pdp = cls(np.asarray(delays_ns, dtype=float) * 1e-9,
                  10.0 ** (np.asarray(powers_db, dtype=float) / 10.0), name)
        return pdp.normalize() if normalize else pdp

    @property
    def normalized(self) -> bool:
        return abs(self.powers.sum() - 1.0) <= NORM_TOL

    @property
    def n_taps(self) -> int:
        return self.delays.size

    def normalize(self) -> "PowerDelayProfile":
        return PowerDelayProfile(self.delays, self.powers / self.powers.sum(), self.name)


EPA = PowerDelayProfile.from_db(
    "epa",
    [0, 30, 70, 90, 110, 190, 410],
    [0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8],
)
SINGLE_TAP = PowerDelayProfile.from_db("single-tap", [0], [0.0])

PRESETS = {"epa": EPA, "single-tap": SINGLE_TAP}


def load_profile(path: str | Path) -> PowerDelayProfile:
    """Read a profile from an INI-style text file.

    Expected layout::

        [profile]
        name = epa
        delay_ns = 0, 30, 70
        power_db = 0, -1, -2
    """
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    if "profile" not in parser:
        raise ValueError(f"{path}: missing [profile] section")
    sec = parser["profile"]
    unknown = set(sec) - {"name", "delay_ns", "power_db"}
    if unknown:
        raise ValueError(f"{path}: unknown keys {sorted(unknown)}")
    try:
        delays = [float(v) for v in sec["delay_ns"].split(",")]
        powers = [float(v) for v in sec["power_db"].split(",")]
    except KeyError as err:
        raise ValueError(f"{path}: missing key {err}") from None
    return PowerDelayProfile.from_db(sec.get("name", Path(path).stem), delays, powers)


def get_profile(name_or_path: str) -> PowerDelayProfile:
    if name_or_path in PRESETS:
        return PRESETS[name_or_path]
    return load_profile(name_or_path)


@dataclass
class ChannelRealization:
    """Frequency response ``h[k, m, q]`` for subcarrier k, rx m, tx q."""

    h: np.ndarray
    profile: str = ""
    seed: object = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.h = np.asarray(self.h, dtype=complex)
        if self.h.ndim != 3:
            raise ValueError(f"channel must be (n_f, n_r, n_t), got shape {self.h.shape}")
        if not np.all(np.isfinite(self.h)):
            raise ValueError("channel contains non-finite entries")

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.h.shape


def _check_counts(**counts: int) -> None:
    for name, value in counts.items():
        if int(value) != value or value < 1:
            raise ValueError(f"{name} must be a positive integer, got {value}")


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly-symmetric complex Gaussian with unit variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def steering(pdp: PowerDelayProfile, n_f: int, delta_f: float) -> np.ndarray:
    """``(n_f, n_taps)`` matrix of per-tap phase ramps across subcarriers."""
    k = np.arange(n_f)
    return np.exp(-2j * np.pi * np.outer(k * delta_f, pdp.delays))


def sample_epa_channel(
    pdp: PowerDelayProfile,
    n_f: int,
    delta_f: float,
    n_r: int,
    n_t: int,
    rng: np.random.Generator,
) -> ChannelRealization:
    """Draw one block-fading realization of a tapped-delay-line channel.

    Each tap of each antenna pair fades independently with variance equal
    to its profile power, so ``E|H[k]|^2 = 1`` on every subcarrier.
    """
    if not pdp.normalized:
        raise ValueError(f"profile {pdp.name!r} is not normalized (sum of powers {pdp.powers.sum()!r})")
    if not delta_f > 0:
        raise ValueError(f"delta_f must be positive, got {delta_f}")
    _check_counts(n_f=n_f, n_r=n_r, n_t=n_t)
    gains = _complex_normal(rng, (pdp.n_taps, n_r, n_t)) * np.sqrt(pdp.powers)[:, None, None]
    h = np.einsum("kp,prt->krt", steering(pdp, n_f, delta_f), gains)
    return ChannelRealization(h, profile=pdp.name)


def sample_iid_channel(n_f: int, n_r: int, n_t: int, rng: np.random.Generator) -> ChannelRealization:
    """Control channel with independent unit-variance taps on every subcarrier."""
    _check_counts(n_f=n_f, n_r=n_r, n_t=n_t)
    return ChannelRealization(_complex_normal(rng, (n_f, n_r, n_t)), profile="iid")


def exponential_correlation(n: int, coeff: float) -> np.ndarray:
    idx = np.arange(n)
    return coeff ** np.abs(idx[:, None] - idx[None, :]).astype(float)


def psd_sqrt(mat: np.ndarray) -> np.ndarray:
    """Principal square root of a symmetric PSD matrix, negative eigenvalues clamped."""
    w, v = np.linalg.eigh(mat)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def apply_rx_correlation(h: ChannelRealization, coeff: float) -> ChannelRealization:
    """Impose exponential receive correlation ``C[i, j] = coeff**|i - j|``."""
    if not 0.0 <= coeff < 1.0:
        raise ValueError(f"correlation coefficient must lie in [0, 1), got {coeff}")
    if coeff == 0.0:
        return ChannelRealization(h.h.copy(), h.profile, h.seed, dict(h.meta))
    root = psd_sqrt(exponential_correlation(h.shape[1], coeff))
    out = np.einsum("ij,kjq->kiq", root, h.h)
    return ChannelRealization(out, h.profile, h.seed, {**h.meta, "rx_coeff": coeff})


def analytic_rhh(pdp: PowerDelayProfile, delta_f: float, n_f: int) -> np.ndarray:
    """Frequency-domain autocorrelation ``R[k, k'] = E[H[k] conj(H[k'])]``."""
    if not pdp.normalized:
        raise ValueError(f"profile {pdp.name!r} is not normalized")
    _check_counts(n_f=n_f)
    lag = np.arange(n_f)[:, None] - np.arange(n_f)[None, :]
    r = np.exp(-2j * np.pi * lag[..., None] * delta_f * pdp.delays) @ pdp.powers
    # diagonal is sum(powers); pin it to the exact value
    np.fill_diagonal(r, 1.0)
    return r


def is_hermitian_psd(mat: np.ndarray, herm_tol: float = 1e-12, eig_tol: float = 1e-9) -> bool:
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        return False
    if np.max(np.abs(mat - mat.conj().T)) > herm_tol:
        return False
    return bool(np.linalg.eigvalsh(0.5 * (mat + mat.conj().T)).min() >= -eig_tol)
