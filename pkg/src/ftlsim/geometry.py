"""Closed-form design numbers for the interferometric transmitter.

DC2, BS2 and BS3 form a right triangle with legs ``leg_s`` (signal) and
``leg_i`` (idler). All quantities use natural units by default: time in
seconds, c = 1, so lengths are light-seconds. SI inputs are converted by
the config layer.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ReversedGeometry, SingularGeometry, ValidationError


@dataclass(frozen=True)
class ApparatusGeometry:
    leg_s: float
    leg_i: float
    pump_arm_r: float
    detector_k: float = 0.0
    intensity_I: float = 1.0
    raise_time_T: float = 0.0
    electronics_T0: float = 0.0
    light_speed_c: float = 1.0

    def __post_init__(self):
        for name in ("leg_s", "pump_arm_r", "intensity_I", "light_speed_c"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be positive and finite, got {value!r}")
        for name in ("leg_i", "detector_k", "raise_time_T", "electronics_T0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValidationError(f"{name} must be non-negative and finite, got {value!r}")

    @property
    def hypotenuse(self) -> float:
        return math.hypot(self.leg_s, self.leg_i)

    @property
    def detector_delay(self) -> float:
        """Reaction time of D, approximately k r^2 / I."""
        return self.detector_k * self.pump_arm_r ** 2 / self.intensity_I

    @property
    def overhead(self) -> float:
        """Total latency added on top of the idler/signal path difference."""
        return self.detector_delay + self.raise_time_T + self.electronics_T0


def _check_legs(g: ApparatusGeometry) -> None:
    if g.leg_i == g.leg_s:
        raise SingularGeometry(
            "leg_i == leg_s: both beam splitters work independently, nothing is transmitted"
        )
    if g.leg_i > g.leg_s:
        raise ReversedGeometry(
            "leg_i > leg_s: information would be transmitted from D to BS2 instead"
        )


def v_max(g: ApparatusGeometry) -> float:
    """c sqrt(s^2 + i^2) / (s - i); exceeds c whenever 0 < i < s."""
    _check_legs(g)
    return g.light_speed_c * g.hypotenuse / (g.leg_s - g.leg_i)


def v_min(g: ApparatusGeometry) -> float:
    """Speed after adding detector, actuation and electronics latencies."""
    _check_legs(g)
    den = (g.leg_s - g.leg_i) / g.light_speed_c + g.overhead
    return g.hypotenuse / den


def feasible(g: ApparatusGeometry) -> bool:
    """Necessary condition r sqrt(2) > c T0 for superluminal transmission.

    Strict inequality. It is necessary (not sufficient) for v_min > c only
    for layouts with pump_arm_r >= leg_s; the formula for v_min alone
    gives the sharper leg_s sqrt(2) > c T0.
    """
    return g.pump_arm_r * math.sqrt(2.0) > g.light_speed_c * g.electronics_T0
