"""Detection-limit sweep over probe SNR."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

import numpy as np

Probe = Callable[[float, int], bool]


@dataclass(frozen=True)
class SweepResult:
    snr: Tuple[float, ...]
    rate: Tuple[float, ...]
    limit: float  # nan when no SNR reaches the required rate
    required_rate: float
    trials: int


def detection_limit_sweep(
    probe: Probe,
    snr_list: Sequence[float],
    seeds: Sequence[int] = tuple(range(20)),
    required_rate: float = 0.9,
) -> SweepResult:
    """Run ``probe(snr, seed)`` for every pair and locate the detection limit.

    The limit is the smallest listed SNR whose detection rate reaches
    ``required_rate``.
    """
    seeds = tuple(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    snrs = tuple(float(s) for s in snr_list)
    rates = tuple(float(np.mean([bool(probe(s, seed)) for seed in seeds])) for s in snrs)
    passing = [s for s, r in zip(snrs, rates) if r >= required_rate]
    return SweepResult(snrs, rates, min(passing) if passing else math.nan, required_rate, len(seeds))
