"""Counter-based random streams keyed on (master seed, purpose, SNR index, trial index).

Every Monte-Carlo cell owns its own Philox stream, so the draws a cell sees
do not depend on which other cells ran, or in what order.
"""

from __future__ import annotations

import numpy as np

TAGS = {"channel": 1, "transmit": 2, "noise": 3, "dce": 4}


def seed_sequence(master_seed: int, tag: str, snr_index: int, trial_index: int) -> np.random.SeedSequence:
    if tag not in TAGS:
        raise KeyError(f"unknown stream tag {tag!r}; expected one of {sorted(TAGS)}")
    if master_seed < 0 or snr_index < 0 or trial_index < 0:
        raise ValueError("seed, SNR index and trial index must be non-negative")
    return np.random.SeedSequence(master_seed, spawn_key=(TAGS[tag], snr_index, trial_index))


def stream(master_seed: int, tag: str, snr_index: int, trial_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed_sequence(master_seed, tag, snr_index, trial_index)))
