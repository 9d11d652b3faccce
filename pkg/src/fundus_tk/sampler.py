"""Decaying class-balanced sampling schedule for a rare lesion class.

Mini-batches start out class-balanced so the model does not treat the rare
class as noise, then the minority share decays geometrically toward the true
prevalence: the excess above prevalence is multiplied by ``decay`` (default
0.75) every ``period`` epochs (default 5).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil
from typing import Sequence, TypeVar

import numpy as np

from .errors import ParameterError

T = TypeVar("T")

DEFAULT_DECAY = 0.75
DEFAULT_PERIOD = 5


@dataclass(frozen=True)
class ScheduleConfig:
    """Sampling schedule parameters; ``f_orig`` is the minority prevalence."""

    f_orig: float
    seed: int
    batch: int
    decay: float = DEFAULT_DECAY
    period: int = DEFAULT_PERIOD

    def __post_init__(self) -> None:
        if not (0.0 < self.f_orig < 0.5):
            raise ParameterError("f_orig must lie in (0, 0.5)")
        if not (0.0 < self.decay < 1.0):
            raise ParameterError("decay must lie in (0, 1)")
        if self.period < 1:
            raise ParameterError("period must be at least 1")
        if self.batch < 1:
            raise ParameterError("batch must be at least 1")


def minority_fraction(epoch: int, cfg: ScheduleConfig) -> float:
    """Minority share f(e) = f_orig + (0.5 - f_orig) * decay^floor(e / period).

    Computed as the convex combination (1 - w) * f_orig + w * 0.5 with
    w = decay^floor(e / period), which is algebraically identical and makes
    f(0) = 0.5 exact in floating point.
    """
    if epoch < 0:
        raise ParameterError("epoch must be non-negative")
    w = cfg.decay ** (epoch // cfg.period)
    return (1.0 - w) * cfg.f_orig + w * 0.5


def _rng(cfg: ScheduleConfig, epoch: int) -> np.random.Generator:
    # PCG64 keyed on (seed, epoch): platform-independent and documented, so the
    # same inputs always reproduce the same index sequence.
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.seed & (2**64 - 1), epoch])))


def epoch_indices(
    minority_ids: Sequence[T],
    majority_ids: Sequence[T],
    epoch: int,
    cfg: ScheduleConfig,
) -> list[T]:
    """Draw one epoch of sample ids under the schedule.

    The sequence has length ceil((len(minority) + len(majority)) / batch) * batch.
    Each slot is minority with probability f(epoch); within a class, draws are
    uniform with replacement. Identical (cfg, epoch, inputs) give an identical
    sequence.
    """
    if len(minority_ids) == 0 or len(majority_ids) == 0:
        raise ParameterError("both id lists must be non-empty")
    total = len(minority_ids) + len(majority_ids)
    length = ceil(total / cfg.batch) * cfg.batch
    f = minority_fraction(epoch, cfg)
    rng = _rng(cfg, epoch)
    take_minority = rng.random(length) < f
    minor_draws = rng.integers(0, len(minority_ids), size=length)
    major_draws = rng.integers(0, len(majority_ids), size=length)
    return [
        minority_ids[minor_draws[i]] if take_minority[i] else majority_ids[major_draws[i]]
        for i in range(length)
    ]
