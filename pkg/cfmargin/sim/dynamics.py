"""Kinematic bicycle: ẋ=v cosθ, ẏ=v sinθ, θ̇=v tanδ/L, v̇=a, δ̇=ω, integrated with RK4."""
import logging
import math
from typing import NamedTuple

from cfmargin.exceptions import DynamicsError
from cfmargin.models.state import AgentState, Command
from cfmargin.schemas.params import KinematicModel

logger = logging.getLogger(__name__)


class ClampedCommand(NamedTuple):
    command: Command
    clamped: bool


def clamp_command(s: AgentState, u: Command, dt: float, m: KinematicModel) -> ClampedCommand:
    """
    Clips a command to the actuation bounds and to what keeps the next state feasible:
    speed stays in [0, v_max] and steering in [-δ_max, δ_max] at the end of the step.
    """
    a = min(max(u.acceleration, m.a_min), m.a_max)
    a = min(max(a, -s.speed / dt), (m.v_max - s.speed) / dt)
    w = min(max(u.steering_rate, m.omega_min), m.omega_max)
    w = min(max(w, (-m.delta_max - s.steering) / dt), (m.delta_max - s.steering) / dt)
    clamped = a != u.acceleration or w != u.steering_rate
    if not clamped:
        return ClampedCommand(u, False)
    return ClampedCommand(Command(a, w), True)


def _derivative(theta, v, delta, a, w, wheelbase):
    return (
        v * math.cos(theta),
        v * math.sin(theta),
        v * math.tan(delta) / wheelbase,
        a,
        w,
    )


def step_dynamics(s: AgentState, u: Command, dt: float, m: KinematicModel) -> AgentState:
    values = (s.x, s.y, s.heading, s.speed, s.steering, u.acceleration, u.steering_rate, dt)
    if not all(math.isfinite(v) for v in values):
        raise DynamicsError(f'non-finite dynamics input: state={s}, command={u}, dt={dt}')
    if not dt > 0:
        raise DynamicsError(f'timestep must be positive, got {dt}')

    u, clamped = clamp_command(s, u, dt, m)
    if clamped:
        logger.debug(f'command clamped to {u}')
    a, w, L = u.acceleration, u.steering_rate, m.wheelbase

    x, y, th, v, d = s.x, s.y, s.heading, s.speed, s.steering
    k1 = _derivative(th, v, d, a, w, L)
    k2 = _derivative(th + dt / 2 * k1[2], v + dt / 2 * k1[3], d + dt / 2 * k1[4], a, w, L)
    k3 = _derivative(th + dt / 2 * k2[2], v + dt / 2 * k2[3], d + dt / 2 * k2[4], a, w, L)
    k4 = _derivative(th + dt * k3[2], v + dt * k3[3], d + dt * k3[4], a, w, L)

    def advance(i, value):
        return value + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])

    speed = advance(3, v)
    steering = advance(4, d)
    return AgentState(
        x=advance(0, x),
        y=advance(1, y),
        heading=advance(2, th),
        speed=min(max(speed, 0.0), m.v_max),
        steering=min(max(steering, -m.delta_max), m.delta_max),
        length=s.length,
        width=s.width,
    )
