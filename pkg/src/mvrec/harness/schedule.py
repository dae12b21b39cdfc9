"""Cosine one-cycle learning-rate schedule.

Ramps from the start rate to the peak over the first half of training
(peak fraction configurable), then decays to the end rate, both along
cosine arcs. The endpoints and the peak are attained exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import ConfigError


@dataclass(frozen=True)
class ScheduleConfig:
    lr_start: float = 1e-5
    lr_max: float = 1e-4
    lr_end: float = 1e-6
    peak_fraction: float = 0.5
    total_steps: int = 1000

    def __post_init__(self):
        if not (self.lr_start > 0 and self.lr_max > 0 and self.lr_end > 0):
            raise ConfigError("learning rates must be positive")
        if self.lr_start > self.lr_max or self.lr_end > self.lr_max:
            raise ConfigError("lr_max must dominate lr_start and lr_end")
        if not (0.0 < self.peak_fraction < 1.0):
            raise ConfigError("peak_fraction must lie in (0, 1)")
        if self.total_steps < 1:
            raise ConfigError("total_steps must be >= 1")


PROPERTY_NET_SCHEDULE = ScheduleConfig(lr_start=1e-7, lr_max=1e-6, lr_end=1e-9, total_steps=10_000)


def lr_at(step: float, sched: ScheduleConfig) -> float:
    if step < 0 or step > sched.total_steps:
        raise ConfigError(f"step {step} outside [0, {sched.total_steps}]")
    peak = sched.peak_fraction * sched.total_steps
    if step <= peak:
        f = (1.0 - math.cos(math.pi * step / peak)) / 2.0
        return (1.0 - f) * sched.lr_start + f * sched.lr_max
    f = (1.0 + math.cos(math.pi * (step - peak) / (sched.total_steps - peak))) / 2.0
    return f * sched.lr_max + (1.0 - f) * sched.lr_end
