"""Durations of the physical operations (µs)."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class TimingModel:
    """``t_move(d) = t0 * sqrt(d / d0)`` for tweezer travel over ``d`` µm."""

    t0: float = 200.0
    d0: float = 110.0
    transfer_time: float = 15.0
    pulse_time: float = 0.4
    single_qubit_time: float = 0.5

    def __post_init__(self) -> None:
        for name, value in asdict(self).items():
            if not value > 0:
                raise ValueError(f"{name} must be positive")

    def t_move(self, distance: float) -> float:
        if distance < 0:
            raise ValueError("distance must be non-negative")
        return self.t0 * math.sqrt(distance / self.d0)

    def to_dict(self) -> dict:
        return asdict(self)
