"""LS and MMSE pilot-based channel estimators, NMSE and pilot-overhead arithmetic."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

LTE_PILOT_RATIO = 4 / 84


@dataclass
class ChannelEstimate:
    """Estimated frequency response ``h_hat[k, m, q]`` and the producing method."""

    h_hat: np.ndarray
    method: str

    def __post_init__(self) -> None:
        self.h_hat = np.asarray(self.h_hat, dtype=complex)
        if self.h_hat.ndim != 3:
            raise ValueError(f"estimate must be (n_f, n_r, n_t), got shape {self.h_hat.shape}")
        if not np.all(np.isfinite(self.h_hat)):
            raise ValueError(f"{self.method} estimate contains non-finite entries")


def pilot_division(y: np.ndarray, x_pilot: np.ndarray, pilot_index: int = 0) -> np.ndarray:
    """``y[k, pilot_index, m] / x_pilot[k]`` as an ``(n_f, n_r, 1)`` array."""
    y = np.asarray(y)
    x_pilot = np.asarray(x_pilot).reshape(-1)
    if y.ndim != 3 or y.shape[0] != x_pilot.size:
        raise ValueError(f"grid shape {y.shape} incompatible with {x_pilot.size} pilots")
    if np.any(x_pilot == 0):
        raise ValueError(f"zero pilot at subcarrier(s) {np.flatnonzero(x_pilot == 0).tolist()}")
    return (y[:, pilot_index, :] / x_pilot[:, None])[:, :, None]


def estimate_ls(y: np.ndarray, x_pilot: np.ndarray, pilot_index: int = 0) -> ChannelEstimate:
    """Least-squares estimate from the pilot symbol of a received grid."""
    return ChannelEstimate(pilot_division(y, x_pilot, pilot_index), "ls")


class MMSEFilter:
    """Cached Cholesky factor of ``rho I + R_HH`` for repeated MMSE smoothing."""

    def __init__(self, r_hh: np.ndarray, rho: float):
        r_hh = np.asarray(r_hh, dtype=complex)
        if r_hh.ndim != 2 or r_hh.shape[0] != r_hh.shape[1]:
            raise ValueError(f"R_HH must be square, got shape {r_hh.shape}")
        if rho < 0:
            raise ValueError(f"rho must be non-negative, got {rho}")
        self.r_hh = r_hh
        self.rho = rho
        try:
            self._factor = cho_factor(rho * np.eye(r_hh.shape[0]) + r_hh, lower=True)
        except LinAlgError:
            raise ValueError("rho I + R_HH is singular; MMSE filter undefined") from None

    def __call__(self, h_ls: np.ndarray) -> np.ndarray:
        n_f = self.r_hh.shape[0]
        flat = h_ls.reshape(n_f, -1)
        return (self.r_hh @ cho_solve(self._factor, flat)).reshape(h_ls.shape)


def estimate_mmse(h_ls: ChannelEstimate, r_hh: np.ndarray, rho: float) -> ChannelEstimate:
    """Smooth an LS estimate with the channel's frequency autocorrelation.

    ``rho`` is the inverse SNR.  Every (rx, tx) column is filtered with the
    same ``R_HH (rho I + R_HH)^-1``.
    """
    if h_ls.h_hat.shape[0] != np.shape(r_hh)[0]:
        raise ValueError(f"R_HH size {np.shape(r_hh)} does not match {h_ls.h_hat.shape[0]} subcarriers")
    return ChannelEstimate(MMSEFilter(r_hh, rho)(h_ls.h_hat), "mmse")


def mmse_error_analytic(r_hh: np.ndarray, rho: float) -> float:
    """Expected normalized error ``tr(R - R (rho I + R)^-1 R) / N_f`` of the MMSE filter."""
    r_hh = np.asarray(r_hh, dtype=complex)
    n_f = r_hh.shape[0]
    err = r_hh - r_hh @ np.linalg.solve(rho * np.eye(n_f) + r_hh, r_hh)
    return float(np.trace(err).real / n_f)


@dataclass
class NMSE:
    per_pair: np.ndarray
    err_energy: float
    ref_energy: float

    @property
    def mean(self) -> float:
        return float(self.per_pair.mean())

    @property
    def db(self) -> float:
        return to_db(self.mean)


def nmse(h_true, h_hat) -> NMSE:
    """Per antenna-pair ``||H - H_hat||^2 / ||H||^2`` plus summed energies.

    The energies allow pooling over Monte-Carlo trials as a ratio of sums.
    """
    h_true = getattr(h_true, "h", h_true)
    h_hat = getattr(h_hat, "h_hat", h_hat)
    if np.shape(h_true) != np.shape(h_hat):
        raise ValueError(f"shape mismatch: true {np.shape(h_true)} vs estimate {np.shape(h_hat)}")
    err = np.sum(np.abs(h_true - h_hat) ** 2, axis=0)
    ref = np.sum(np.abs(h_true) ** 2, axis=0)
    if np.any(ref == 0):
        raise ValueError("true channel has a zero-norm antenna pair; NMSE undefined")
    return NMSE(err / ref, float(err.sum()), float(ref.sum()))


def to_db(x: float) -> float:
    with np.errstate(divide="ignore"):
        return float(10.0 * np.log10(x))


def pilot_savings(n_f: int, n: int, lte_pilot_ratio: float = LTE_PILOT_RATIO) -> float:
    """Fraction of LTE pilots saved when one pilot symbol serves an ``n_f x n`` block."""
    if n_f * n <= 0:
        raise ValueError("grid must contain at least one resource element")
    return max(0.0, 1.0 - (n_f / (n_f * n)) / lte_pilot_ratio)
