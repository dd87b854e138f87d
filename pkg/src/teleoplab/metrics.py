"""Trial performance metrics and validity gating.

D2C integrates |lateral error| over traveled station (an area in m^2), TCT is
wall time for one loop, SE is the mean absolute steering-wheel angle of the
operator's own commands. Normalization expresses a compensated run's metric
recovery toward the zero-delay baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateBaseline, IncompleteLoop
from .vehicle import STEER_WHEEL_MAX_DEG

OFF_ROAD_MARGIN = 0.9        # m, half a track width beyond the road edge
OFF_ROAD_LIMIT_S = 5.0       # s of continuous off-road that invalidates
ROLLOVER_ACCEL = 8.0         # m/s^2 lateral, rollover stand-in
MIN_MEAN_SPEED = 5.0         # m/s (18 km/h)


@dataclass
class TickRow:
    t: float
    x: float
    y: float
    psi: float
    v: float
    delta: float
    op_steer: float
    op_throttle: float
    op_brake: float
    ap_steer: float
    ap_throttle: float
    ap_brake: float
    s: float            # cumulative (unwrapped) station, m
    e: float            # signed lateral offset, m
    fallback: bool = False


@dataclass
class TrialLog:
    mode: str
    delay_ms: int
    subject_id: int
    repeat: int
    seed: int
    route_length: float
    road_half_width: float
    wheelbase: float = 2.8
    ticks: list = field(default_factory=list)
    gaze: list = field(default_factory=list)   # (t, gx, gy, valid)
    completed: bool = False

    def covers_loop(self) -> bool:
        return self.completed and bool(self.ticks) and (
            self.ticks[-1].s >= self.route_length - 1e-9)


@dataclass
class TrialRecord:
    mode: str
    delay_ms: int
    subject_id: int
    repeat: int
    seed: int
    d2c: float | None
    tct: float | None
    se: float | None
    valid: bool
    invalid_reason: str = ""


def d2c(log: TrialLog) -> float:
    """Area between the driven path and the centerline over one loop, m^2."""
    if not log.covers_loop():
        raise IncompleteLoop("log does not cover the full loop")
    s = np.array([row.s for row in log.ticks])
    e = np.abs([row.e for row in log.ticks])
    m = s <= log.route_length + 1e-9
    return float(np.trapezoid(e[m], s[m]))


def tct(log: TrialLog) -> float:
    """Time to complete one loop, s."""
    if not log.covers_loop():
        raise IncompleteLoop("log does not cover the full loop")
    return log.ticks[-1].t - log.ticks[0].t


def se(log: TrialLog) -> float:
    """Mean absolute operator steering-wheel angle, degrees.

    Uses the operator-issued commands, not the applied ones: under guidance
    control it still measures the human's effort.
    """
    if not log.ticks:
        raise IncompleteLoop("empty log")
    steer = np.abs([row.op_steer for row in log.ticks])
    return float(steer.mean() * STEER_WHEEL_MAX_DEG)


def validity(log: TrialLog) -> tuple:
    """(valid, reason). Mirrors the off-road / rollover / crawl rules."""
    if not log.ticks:
        return False, "empty log"
    if not log.covers_loop():
        return False, "incomplete loop"
    rows = log.ticks
    limit = log.road_half_width + OFF_ROAD_MARGIN
    off_since = None
    for row in rows:
        if abs(row.e) > limit:
            if off_since is None:
                off_since = row.t
            elif row.t - off_since >= OFF_ROAD_LIMIT_S:
                return False, "off road >= 5 s"
        else:
            off_since = None
        if abs(row.v ** 2 * math.tan(row.delta) / log.wheelbase) > ROLLOVER_ACCEL:
            return False, "rollover (lateral accel > 8 m/s^2)"
    duration = rows[-1].t - rows[0].t
    if duration <= 0:
        return False, "degenerate duration"
    mean_speed = min(log.route_length, rows[-1].s) / duration
    if mean_speed < MIN_MEAN_SPEED:
        return False, "avg speed < 18 km/h"
    return True, ""


def normalize(r_c: float, r_d: float, r_0: float) -> float:
    """|r_c - r_d| / |r_d - r_0|: recovery of a compensated mean toward the
    zero-delay baseline mean."""
    denom = abs(r_d - r_0)
    if denom < 1e-9:
        raise DegenerateBaseline("delayed and zero-delay baselines coincide")
    return abs(r_c - r_d) / denom


def overall(p_d2c: float, p_tct: float, p_se: float, sig_flags) -> float:
    """Equal-weight overall performance; non-significant metrics drop out."""
    sig_d, sig_t, sig_s = sig_flags
    total = 0.0
    if sig_d:
        total += p_d2c / 3.0
    if sig_t:
        total += p_tct / 3.0
    if sig_s:
        total += p_se / 3.0
    return total


def make_record(log: TrialLog) -> TrialRecord:
    valid, reason = validity(log)
    if valid:
        return TrialRecord(log.mode, log.delay_ms, log.subject_id, log.repeat,
                           log.seed, d2c(log), tct(log), se(log), True)
    vals = {}
    for name, fn in (("d2c", d2c), ("tct", tct), ("se", se)):
        try:
            vals[name] = fn(log)
        except IncompleteLoop:
            vals[name] = None
    return TrialRecord(log.mode, log.delay_ms, log.subject_id, log.repeat,
                       log.seed, vals["d2c"], vals["tct"], vals["se"],
                       False, reason)
