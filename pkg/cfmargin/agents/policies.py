import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Set, Tuple

import numpy as np

from cfmargin.agents.base import Policy, PolicyContext
from cfmargin.agents.filters import DelayFilter, RangeFilter, steps_for, with_filters
from cfmargin.agents.idm import idm_accel
from cfmargin.exceptions import PolicyError
from cfmargin.models.state import AgentState, Command, IDLE
from cfmargin.schemas.params import CommandSegment, IdmParams, KinematicModel, PolicySpec
from cfmargin.sim.observation import Observation, SignalObservation
from cfmargin.sim.route import Route

LATERAL_MARGIN = 0.5  # m added to the half-width sum when deciding who is a leader
STOP_SPEED = 0.1  # m/s
STOP_LINE_SLACK = 1.0  # m beyond min spacing still counted as "at the line"
STOP_DWELL = 0.5  # s standing at a stop sign before proceeding
CONFLICT_MARGIN = 0.5  # m added around each footprint when timing a conflict zone
CONFLICT_REACH = 30.0  # m past the stop line within which crossing paths count
PARALLEL_SINE = 0.3  # paths closer to parallel than this never cross
MIN_LAUNCH_ACCEL = 0.05  # m/s²
MOVING_SPEED = 0.5  # m/s
LOOKAHEAD_MIN = 5.0  # m
LOOKAHEAD_TIME = 1.0  # s
LATENCY_IDM = 0.2  # s, IDMLatency2
SHORTSIGHTED_RANGE = 10.0  # m, IDMShortsighted10


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


def travel_time(distance: float, v: float, accel: float) -> float:
    """Time to cover ``distance`` from speed ``v`` under a constant positive ``accel``."""
    if distance <= 0.0:
        return 0.0
    return (math.sqrt(v * v + 2.0 * accel * distance) - v) / accel


def pure_pursuit_rate(state: AgentState, route: Route, s: float, model: KinematicModel, dt: float) -> float:
    """Steering rate that moves δ toward the pure-pursuit angle for a lookahead of max(5 m, 1 s·v)."""
    lookahead = max(LOOKAHEAD_MIN, LOOKAHEAD_TIME * state.speed)
    tx, ty, _ = route.point_at(s + lookahead)
    distance = math.hypot(tx - state.x, ty - state.y)
    if distance < 1e-6:
        return 0.0
    alpha = _wrap(math.atan2(ty - state.y, tx - state.x) - state.heading)
    target = math.atan2(2.0 * model.wheelbase * math.sin(alpha), distance)
    target = min(max(target, -model.delta_max), model.delta_max)
    return min(max((target - state.steering) / dt, model.omega_min), model.omega_max)


@dataclass
class IdmMemory:
    cleared: Set[str] = field(default_factory=set)
    stopped_for: Dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class IdmPolicy(Policy):
    """
    Longitudinal IDM against the nearest leader in the route corridor, pure-pursuit lateral control.

    Red lights and signs whose conflict gap is not yet accepted act as a standing virtual leader
    at the stop line.
    """

    params: IdmParams
    route: Route
    model: KinematicModel
    dt: float

    def reset(self, obs: Observation, rng: np.random.Generator) -> IdmMemory:
        return IdmMemory()

    def leader(self, obs: Observation, s: float) -> Optional[Tuple[float, float]]:
        """
        (net gap, closing speed) to the closest agent ahead inside the corridor, if any. Crossing
        traffic that leaves the corridor before we reach it is not a leader.
        """
        me = obs.state
        best = None
        for _, other in obs.nearby:
            s_other, d_other = self.route.project(other.x, other.y)
            ahead = s_other - s
            corridor = (me.width + other.width) / 2.0 + LATERAL_MARGIN
            if ahead <= 0.0 or abs(d_other) > corridor:
                continue
            if best is not None and ahead >= best[0]:
                continue
            relative = other.heading - self.route.heading_at(s_other)
            gap = ahead - (me.length + other.length) / 2.0
            lateral = other.speed * math.sin(relative)
            if abs(lateral) > MOVING_SPEED and gap > 0.0:
                leaving = corridor + other.length / 2.0 - d_other * math.copysign(1.0, lateral)
                if leaving / abs(lateral) < gap / max(me.speed, MOVING_SPEED):
                    continue
            best = (ahead, gap, me.speed - other.speed * math.cos(relative))
        return None if best is None else (best[1], best[2])

    def gap_accepted(self, obs: Observation, signal: SignalObservation) -> bool:
        """
        True when every agent whose path crosses ours past the stop line leaves at least
        ``critical_gap`` seconds between its passage through the conflict zone and ours.

        Our passage assumes the current free-road acceleration held constant, theirs a constant
        speed. Agents already beyond the conflict zone are ignored; a stopped agent blocks only
        while it stands inside the zone.
        """
        me = obs.state
        line = self.route.project(me.x, me.y)[0] + me.length / 2.0 + signal.distance
        px, py, heading = self.route.point_at(line)
        ux, uy = math.cos(heading), math.sin(heading)
        launch = max(idm_accel(self.params, me.speed), MIN_LAUNCH_ACCEL)
        for _, other in obs.nearby:
            wx, wy = math.cos(other.heading), math.sin(other.heading)
            sine = ux * wy - uy * wx
            if abs(sine) < PARALLEL_SINE:
                continue
            dx, dy = other.x - px, other.y - py
            along_mine = (dx * wy - dy * wx) / sine
            along_theirs = (dx * uy - dy * ux) / sine
            if not 0.0 <= along_mine <= CONFLICT_REACH:
                continue
            reach = me.width / 2.0 + CONFLICT_MARGIN
            enter = along_theirs - other.length / 2.0 - reach
            leave = along_theirs + other.length / 2.0 + reach
            if leave < 0.0:
                continue
            if other.speed < MOVING_SPEED:
                if enter <= 0.0:
                    return False
                continue
            their_in, their_out = max(enter, 0.0) / other.speed, leave / other.speed
            front = signal.distance + along_mine
            my_in = travel_time(front - other.width / 2.0 - CONFLICT_MARGIN, me.speed, launch)
            my_out = travel_time(front + other.width / 2.0 + CONFLICT_MARGIN + me.length, me.speed, launch)
            if their_in - my_out < self.params.critical_gap and my_in - their_out < self.params.critical_gap:
                return False
        return True

    def signal_gap(self, obs: Observation, signal: SignalObservation, memory: IdmMemory) -> Optional[float]:
        """
        Gap to the virtual leader a signal imposes, or None when the way is free.

        Stop signs need a standstill dwell at the line before the gap check. A yield sign is
        checked on every approach step and an accepted gap commits the agent once it can no
        longer stop comfortably before the line.
        """
        v = obs.state.speed
        if signal.kind == 'traffic_light':
            if signal.phase == 'red':
                return signal.distance
            if signal.phase == 'yellow' and signal.distance > v * v / (2.0 * self.params.comfort_decel):
                return signal.distance
            return None

        if signal.id in memory.cleared:
            return None
        if signal.kind == 'yield_sign':
            if not self.gap_accepted(obs, signal):
                return signal.distance
            if signal.distance <= v * v / (2.0 * self.params.comfort_decel) + self.params.min_spacing:
                memory.cleared.add(signal.id)
            return None
        if v < STOP_SPEED and signal.distance <= self.params.min_spacing + STOP_LINE_SLACK:
            memory.stopped_for[signal.id] = memory.stopped_for.get(signal.id, 0.0) + self.dt
            if memory.stopped_for[signal.id] >= STOP_DWELL - 1e-9 and self.gap_accepted(obs, signal):
                memory.cleared.add(signal.id)
                return None
        return signal.distance

    def step(self, obs: Observation, memory: IdmMemory) -> Tuple[Command, IdmMemory]:
        me = obs.state
        s, _ = self.route.project(me.x, me.y)
        accel = idm_accel(self.params, me.speed)
        lead = self.leader(obs, s)
        if lead is not None:
            accel = min(accel, idm_accel(self.params, me.speed, lead[0], lead[1]))
        for signal in obs.signals:
            gap = self.signal_gap(obs, signal, memory)
            if gap is not None:
                accel = min(accel, idm_accel(self.params, me.speed, gap, me.speed))
        rate = pure_pursuit_rate(me, self.route, s, self.model, self.dt)
        return Command(accel, rate), memory


def reconstruct_commands(recorded: Tuple[AgentState, ...], dt: float) -> Tuple[Command, ...]:
    return tuple(
        Command((b.speed - a.speed) / dt, (b.steering - a.steering) / dt)
        for a, b in zip(recorded, recorded[1:])
    )


@dataclass(frozen=True)
class CommandSequencePolicy(Policy):
    """Emits a fixed command per step regardless of observations, then idles. Counts its own steps."""

    commands: Tuple[Command, ...]

    def reset(self, obs: Observation, rng: np.random.Generator) -> int:
        return 0

    def step(self, obs: Observation, memory: int = 0) -> Tuple[Command, int]:
        if memory < len(self.commands):
            return self.commands[memory], memory + 1
        return IDLE, memory + 1


def expand_segments(segments: Tuple[CommandSegment, ...]) -> Tuple[Command, ...]:
    commands = []
    for segment in segments:
        commands.extend([Command(segment.acceleration, segment.steering_rate)] * segment.steps)
    return tuple(commands)


def _idm(spec: PolicySpec, ctx: PolicyContext) -> Policy:
    return IdmPolicy(spec.idm, ctx.route, ctx.model, ctx.dt)


def _idm_latency(spec: PolicySpec, ctx: PolicyContext) -> Policy:
    return with_filters(_idm(spec, ctx), [DelayFilter(max(1, steps_for(LATENCY_IDM, ctx.dt)))])


def _idm_shortsighted(spec: PolicySpec, ctx: PolicyContext) -> Policy:
    return with_filters(_idm(spec, ctx), [RangeFilter(SHORTSIGHTED_RANGE)])


def _replay(spec: PolicySpec, ctx: PolicyContext) -> Policy:
    if ctx.recorded is None:
        return CommandSequencePolicy(())
    return CommandSequencePolicy(reconstruct_commands(ctx.recorded, ctx.dt))


def _open_loop(spec: PolicySpec, ctx: PolicyContext) -> Policy:
    return CommandSequencePolicy(expand_segments(spec.segments))


policy_factories: Dict[str, Callable[[PolicySpec, PolicyContext], Policy]] = {
    'IDMAgent': _idm,
    'IDMLatency2': _idm_latency,
    'IDMShortsighted10': _idm_shortsighted,
    'Replay': _replay,
    'BestResponse': _open_loop,
}


def build_policy(spec: PolicySpec, ctx: PolicyContext) -> Policy:
    factory = policy_factories.get(spec.name)
    if factory is None:
        raise PolicyError(f'unknown policy {spec.name!r}')
    return factory(spec, ctx)


def policy_step(policy: Policy, obs: Observation, memory) -> Tuple[Command, object]:
    return policy.step(obs, memory)
