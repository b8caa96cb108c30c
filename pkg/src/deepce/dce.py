"""Deep channel estimation: fit an untrained generator to one received grid.

A randomly initialized network maps a fixed uniform-noise seed tensor to a
tensor shaped like the received grid.  Its parameters are fitted to that
one grid for a fixed number of epochs; the network's output is then used
in place of the received grid for pilot division.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import nn
from .estimators import ChannelEstimate, pilot_division
from .ofdm import grid_to_tensor, tensor_to_grid

OPTIMIZERS = ("adam", "sgd")


class FitError(RuntimeError):
    """The fit diverged or failed to reduce the loss."""


@dataclass(frozen=True)
class DceConfig:
    hidden_layers: int = 6
    hidden_channels: int = 128
    epochs: int = 200
    learning_rate: float = 0.01
    z0_scale: float = 0.1
    optimizer: str = "adam"
    seed: int = 0
    dtype: str = "float64"

    def __post_init__(self) -> None:
        if self.hidden_layers < 1:
            raise ValueError(f"hidden_layers must be >= 1, got {self.hidden_layers}")
        if self.hidden_channels < 1:
            raise ValueError(f"hidden_channels must be >= 1, got {self.hidden_channels}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not self.z0_scale > 0:
            raise ValueError(f"z0_scale must be positive, got {self.z0_scale}")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}")
        if self.dtype not in ("float64", "float32"):
            raise ValueError(f"dtype must be float64 or float32, got {self.dtype!r}")

    @property
    def upscale(self) -> int:
        return 2 ** (self.hidden_layers - 1)


@dataclass
class FitTrace:
    """Loss at every epoch (before that epoch's update) and after the last one."""

    mse_per_epoch: np.ndarray
    final_mse: float

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "mse"])
            for epoch, value in enumerate(self.mse_per_epoch):
                writer.writerow([epoch, repr(float(value))])


def seed_dims(cfg: DceConfig, dims: tuple[int, int, int]) -> tuple[int, int, int]:
    n_f, n, _ = dims
    scale = cfg.upscale
    for name, size in (("frequency", n_f), ("time", n)):
        if size % scale:
            raise ValueError(
                f"{name} size {size} is not divisible by {scale} (= 2**(hidden_layers - 1) "
                f"for {cfg.hidden_layers} hidden layers)"
            )
    return n_f // scale, n // scale, cfg.hidden_channels


def build_network(
    cfg: DceConfig, dims: tuple[int, int, int], rng: np.random.Generator | None = None
) -> tuple[nn.NetworkParams, np.ndarray]:
    """Random network and seed tensor ``z0`` for a target of shape ``dims``.

    ``z0`` is uniform on ``[0, z0_scale]`` and stays fixed for the whole fit.
    """
    z_dims = seed_dims(cfg, dims)
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    dtype = np.dtype(cfg.dtype)
    net = nn.init_network(cfg.hidden_channels, cfg.hidden_channels, dims[2], cfg.hidden_layers, rng, dtype)
    z0 = rng.uniform(0.0, cfg.z0_scale, z_dims).astype(dtype)
    return net, z0


def fit(
    net: nn.NetworkParams, z0: np.ndarray, y_t: np.ndarray, cfg: DceConfig
) -> tuple[nn.NetworkParams, FitTrace]:
    """Minimize the MSE between ``forward(net, z0)`` and ``y_t`` by full-gradient steps.

    Works on a copy; the input network is left untouched.
    """
    net = net.copy()
    target = np.asarray(y_t, dtype=z0.dtype)
    out_dims = nn.output_dims(net, z0.shape)
    if out_dims != target.shape:
        raise ValueError(f"network output {out_dims} does not match target {target.shape}")
    state = nn.AdamState(lr=cfg.learning_rate)
    losses = np.empty(cfg.epochs)
    for epoch in range(cfg.epochs):
        out, cache = nn.forward(net, z0, cache=True)
        loss, grad = nn.mse_loss(out, target)
        if not np.isfinite(loss):
            raise FitError(f"loss became non-finite at epoch {epoch}")
        losses[epoch] = loss
        grads = nn.backward(net, cache, grad)
        if cfg.optimizer == "adam":
            nn.adam_step(state, net, grads)
        else:
            nn.sgd_step(cfg.learning_rate, net, grads)
    final = nn.mse_loss(nn.forward(net, z0), target)[0]
    if not np.isfinite(final):
        raise FitError(f"loss became non-finite at epoch {cfg.epochs}")
    if final > losses[0]:
        raise FitError(f"fit ended above its starting loss ({final:.6g} > {losses[0]:.6g}) after {cfg.epochs} epochs")
    return net, FitTrace(losses, final)


def denoise(net: nn.NetworkParams, z0: np.ndarray) -> np.ndarray:
    return nn.forward(net, z0)


def estimate_dce(y_star: np.ndarray, x_pilot: np.ndarray, pilot_index: int = 0) -> ChannelEstimate:
    """Pilot division applied to a denoised complex grid."""
    return ChannelEstimate(pilot_division(y_star, x_pilot, pilot_index), "dce")


def deep_channel_estimate(
    y: np.ndarray, x_pilot: np.ndarray, cfg: DceConfig, rng: np.random.Generator | None = None
) -> tuple[ChannelEstimate, FitTrace]:
    """Full pipeline on a received complex grid ``(n_f, n, n_r)``."""
    y_t = grid_to_tensor(y)
    net, z0 = build_network(cfg, y_t.shape, rng)
    fitted, trace = fit(net, z0, y_t, cfg)
    y_star = tensor_to_grid(denoise(fitted, z0).astype(float))
    return estimate_dce(y_star, x_pilot), trace
