"""Kinematic bicycle plant with first-order steering actuator.

Stand-in for the remote vehicle-road system: deterministic fixed-step
integration, rear-axle reference point, speed clamped to [0, v_max].
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

logger = logging.getLogger(__name__)

STEER_WHEEL_MAX_DEG = 450.0  # steering wheel range mapped by steer in [-1, 1]
STEER_RATIO = 15.0           # wheel angle : road-wheel angle


@dataclass(frozen=True)
class PlantParams:
    wheelbase: float = 2.8          # m
    delta_max: float = math.radians(30.0)
    steer_lag: float = 0.15         # s, first-order actuator time constant
    a_max: float = 3.0              # m/s^2 full-throttle accel
    b_max: float = 6.0              # m/s^2 full-brake decel
    v_max: float = 20.0             # m/s
    drag: float = 0.05              # 1/s linear drag coefficient


@dataclass(frozen=True)
class VehicleState:
    t: float = 0.0
    x: float = 0.0
    y: float = 0.0
    psi: float = 0.0
    v: float = 0.0
    delta: float = 0.0   # road-wheel angle, rad
    a: float = 0.0       # last longitudinal accel, m/s^2


@dataclass(frozen=True)
class ControlCommand:
    t: float = 0.0
    steer: float = 0.0      # normalized [-1, 1], positive turns left
    throttle: float = 0.0   # [0, 1]
    brake: float = 0.0      # [0, 1]


def clamp(value, lo, hi):
    return lo if value < lo else hi if value > hi else value


def _clamped_command(cmd: ControlCommand) -> ControlCommand:
    steer = clamp(cmd.steer, -1.0, 1.0)
    throttle = clamp(cmd.throttle, 0.0, 1.0)
    brake = clamp(cmd.brake, 0.0, 1.0)
    if steer != cmd.steer or throttle != cmd.throttle or brake != cmd.brake:
        logger.debug("command clamped: %s", cmd)
        return ControlCommand(cmd.t, steer, throttle, brake)
    return cmd


def step(state: VehicleState, cmd: ControlCommand, dt: float,
         params: PlantParams = PlantParams()) -> VehicleState:
    """Advance the plant one physics tick (semi-implicit Euler).

    dt must lie in (0, 0.02]. Inputs outside their ranges are clamped.
    """
    if not 0.0 < dt <= 0.02:
        raise ValueError(f"dt must be in (0, 0.02], got {dt}")
    cmd = _clamped_command(cmd)
    a = params.a_max * cmd.throttle - params.b_max * cmd.brake - params.drag * state.v
    v = clamp(state.v + a * dt, 0.0, params.v_max)
    delta_cmd = cmd.steer * params.delta_max
    delta = state.delta + (delta_cmd - state.delta) * dt / params.steer_lag
    delta = clamp(delta, -params.delta_max, params.delta_max)
    psi = state.psi + v * math.tan(delta) / params.wheelbase * dt
    x = state.x + v * math.cos(state.psi) * dt
    y = state.y + v * math.sin(state.psi) * dt
    return VehicleState(t=state.t + dt, x=x, y=y, psi=psi, v=v, delta=delta, a=a)


def lateral_accel(state: VehicleState, params: PlantParams = PlantParams()) -> float:
    """Centripetal acceleration implied by the current speed and wheel angle."""
    return state.v ** 2 * math.tan(state.delta) / params.wheelbase
