"""Radial time-to-collision and alerting.

TTC of an object at user-frame (x, z) with velocity (vx, vz) is the time
for its range to reach zero assuming the current radial closing rate:

    ttc = -(x^2 + z^2) / (x*vx + z*vz)

Positive while approaching, negative while receding.  Pure tangential
motion has no radial closing rate; ttc() then returns None.  The risk
level maps ttc against a reaction-time budget t_r:

    kappa = max(0, 1 - ttc / t_r)        for ttc >= 0
    kappa = 0                            receding or not approaching

The overall level is the max over tracked objects and an alert fires
when it reaches the configured threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

RADIAL_EPS = 1e-9

DEFAULT_REACTION_TIME_S = 3.3
DEFAULT_ALERT_THRESHOLD = 0.01


class DegeneratePosition(ValueError):
    """TTC is undefined for an object exactly at the origin."""


def ttc(x: float, z: float, vx: float, vz: float) -> float | None:
    """Radial time to collision in seconds; None when not approaching."""
    r2 = x * x + z * z
    if r2 == 0.0:
        raise DegeneratePosition("object at the user origin")
    radial = x * vx + z * vz
    if abs(radial) < RADIAL_EPS:
        return None
    return -r2 / radial


def risk_level(ttc_value: float | None, t_r: float = DEFAULT_REACTION_TIME_S) -> float:
    """Map a TTC to [0, 1]; receding and non-approaching objects score 0."""
    if t_r <= 0:
        raise ValueError("t_r must be positive")
    if ttc_value is None or ttc_value < 0:
        return 0.0
    return max(0.0, 1.0 - ttc_value / t_r)


@dataclass(frozen=True)
class ObjectRisk:
    track_id: int
    ttc: float | None
    kappa: float


@dataclass(frozen=True)
class RiskAssessment:
    timestamp: float
    per_object: tuple[ObjectRisk, ...] = field(default_factory=tuple)
    gamma_overall: float = 0.0
    alert: bool = False


def assess(
    tracks,
    t_r: float = DEFAULT_REACTION_TIME_S,
    alert_threshold: float = DEFAULT_ALERT_THRESHOLD,
    now: float = 0.0,
) -> RiskAssessment:
    """Score every track snapshot and fold into the overall alert decision.

    A track sitting exactly on the user is treated as maximal risk rather
    than an error; the degenerate position only occurs on estimated
    states passing through the origin.
    """
    per = []
    for tr in tracks:
        try:
            t = ttc(tr.x, tr.z, tr.vx, tr.vz)
            kappa = risk_level(t, t_r)
        except DegeneratePosition:
            t, kappa = None, 1.0
        per.append(ObjectRisk(track_id=tr.id, ttc=t, kappa=kappa))
    gamma = max((o.kappa for o in per), default=0.0)
    return RiskAssessment(
        timestamp=now,
        per_object=tuple(per),
        gamma_overall=gamma,
        alert=gamma >= alert_threshold,
    )
