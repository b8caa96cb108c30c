"""Untrained-network (deep image prior) channel estimation for OFDM grids, with LS/MMSE baselines."""

from .channel import EPA, SINGLE_TAP, PowerDelayProfile, ChannelRealization, analytic_rhh
from .dce import DceConfig, FitTrace, deep_channel_estimate
from .estimators import ChannelEstimate, estimate_ls, estimate_mmse, nmse, pilot_savings
from .ofdm import GridConfig, QPSK, make_transmit_grid, transmit

__all__ = [
    "EPA",
    "SINGLE_TAP",
    "PowerDelayProfile",
    "ChannelRealization",
    "analytic_rhh",
    "DceConfig",
    "FitTrace",
    "deep_channel_estimate",
    "ChannelEstimate",
    "estimate_ls",
    "estimate_mmse",
    "nmse",
    "pilot_savings",
    "GridConfig",
    "QPSK",
    "make_transmit_grid",
    "transmit",
]
