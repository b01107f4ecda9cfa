"""
Synthetic ODD suite: a four-way junction at the origin with the major road along x and the
minor road along y, populated by one of four scenario families.

Each family stages a conflict that nominal drivers resolve with a small margin, so that a less
attentive, slower, blind, rule-breaking or bolder driver can turn it into a collision with the
ego. Crossing timings are solved against the gap-acceptance rule of the IDM agents.
"""
import logging
import math
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from cfmargin.agents.idm import equilibrium_gap
from cfmargin.agents.policies import CONFLICT_MARGIN, STOP_DWELL, travel_time
from cfmargin.models.episode import DEFAULT_DT, DEFAULT_VISIBILITY_RADIUS, AgentSpec, ScenarioFile
from cfmargin.models.network import Lanelet, LaneNetwork, Signal
from cfmargin.models.state import AgentState
from cfmargin.schemas.params import CommandSegment, IdmParams, KinematicModel, PolicySpec

logger = logging.getLogger(__name__)

EGO = 'ego'
LANE_WIDTH = 3.5
MAJOR_IN, MAJOR_OUT, MINOR_IN, MINOR_OUT = 1, 2, 3, 4
MAJOR_START = -300.0
MINOR_START = -150.0
ROAD_END = 150.0
STOP_LINE_BACKOFF = 6.0  # m before the junction center
LIGHT_LINE = -10.0  # x of the major-road stop line
SPEED_RANGES = {'high': (14.0, 20.0), 'low': (4.0, 10.0)}
# a standing crosser pulls the mean initial speed down
STOP_SIGN_HIGH_RANGE = (17.0, 22.0)
DURATION = 10.0
HEADING_NORTH = np.pi / 2

LENGTH, WIDTH = 4.5, 1.8  # every synthetic footprint
REACH = WIDTH / 2.0 + CONFLICT_MARGIN  # from a path centerline to where a crossing front counts
OCCUPANCY = LENGTH + 2.0 * REACH  # m travelled while inside a crossing path's zone

TAILGATER_HEADWAY = {'high': (0.55, 0.9), 'low': (0.4, 0.7)}
TAILGATER_SPEED_GAIN = 1.6
CALM_SPEED_GAIN = 1.2
CREEP = 0.4  # m between a standing crosser's front and its stop line
HEAVY = KinematicModel(a_max=1.5)
QUEUE_ACCEL_GAIN = (0.06, 1.0)  # m/s², log-uniform


def junction(signals: Tuple[Signal, ...] = ()) -> LaneNetwork:
    return LaneNetwork(
        lanelets=(
            Lanelet(MAJOR_IN, ((MAJOR_START, 0.0), (0.0, 0.0)), LANE_WIDTH, (MAJOR_OUT,)),
            Lanelet(MAJOR_OUT, ((0.0, 0.0), (ROAD_END, 0.0)), LANE_WIDTH),
            Lanelet(MINOR_IN, ((0.0, MINOR_START), (0.0, 0.0)), LANE_WIDTH, (MINOR_OUT,)),
            Lanelet(MINOR_OUT, ((0.0, 0.0), (0.0, ROAD_END)), LANE_WIDTH),
        ),
        signals=signals,
    )


def idm_agent(agent_id: str, state: AgentState, route: Tuple[int, ...], speed: float,
              model: KinematicModel = KinematicModel(), **idm) -> AgentSpec:
    return AgentSpec(agent_id, state, route, PolicySpec(name='IDMAgent', idm=IdmParams(desired_speed=speed, **idm)),
                     model)


def scripted_ego(state: AgentState, speed: float, segments: Tuple[CommandSegment, ...]) -> AgentSpec:
    """An open-loop ego on the major road; ``speed`` is its desired speed when made reactive."""
    policy = PolicySpec(name='BestResponse', idm=IdmParams(desired_speed=speed), segments=segments)
    return AgentSpec(EGO, state, (MAJOR_IN, MAJOR_OUT), policy)


def braking_segments(speed: float, brake_at: float, decel: float, dt: float) -> Tuple[CommandSegment, ...]:
    """Cruise until ``brake_at`` s, then brake at ``decel`` m/s² to a standstill."""
    return (
        CommandSegment(acceleration=0.0, steering_rate=0.0, steps=int(round(brake_at / dt))),
        CommandSegment(acceleration=-decel, steering_rate=0.0, steps=int(math.ceil(speed / decel / dt)) + 1),
    )


def on_major(x: float, speed: float) -> AgentState:
    return AgentState(x=x, y=0.0, heading=0.0, speed=speed)


def on_minor(y: float, speed: float) -> AgentState:
    return AgentState(x=0.0, y=y, heading=HEADING_NORTH, speed=speed)


def entering_at(t: float, speed: float) -> float:
    """Center coordinate from which a footprint at ``speed`` reaches a crossing path's zone after ``t`` s."""
    return -REACH - LENGTH / 2.0 - speed * t


def followers(front_x: float, speed: float, params: Sequence[IdmParams]) -> List[AgentSpec]:
    """IDM followers on the major road, each settled at its equilibrium gap."""
    agents, x = [], front_x
    for i, p in enumerate(params, start=1):
        x -= equilibrium_gap(p, speed) + LENGTH
        agents.append(AgentSpec(f'follower{i}', on_major(x, speed), (MAJOR_IN, MAJOR_OUT),
                                PolicySpec(name='IDMAgent', idm=p)))
    return agents


def tailgater(rng: np.random.Generator, band: str, speed: float) -> IdmParams:
    headway = float(rng.uniform(*TAILGATER_HEADWAY[band]))
    return IdmParams(desired_speed=TAILGATER_SPEED_GAIN * speed, time_headway=headway)


def calm(speed: float) -> IdmParams:
    return IdmParams(desired_speed=CALM_SPEED_GAIN * speed)


def band_speed(rng: np.random.Generator, band: str) -> float:
    return float(rng.uniform(*SPEED_RANGES[band]))


def car_following(rng: np.random.Generator, band: str, dt: float) -> Tuple[LaneNetwork, List[AgentSpec]]:
    """The ego brakes hard to a standstill in front of a tailgater and a calmer second follower."""
    speed = band_speed(rng, band)
    segments = braking_segments(speed, float(rng.uniform(2.5, 4.0)), float(rng.uniform(5.0, 7.5)), dt)
    ego_x = -150.0
    agents = [scripted_ego(on_major(ego_x, speed), speed, segments)]
    agents.extend(followers(ego_x, speed, (tailgater(rng, band, speed), calm(speed))))
    return junction(), agents


def unsignalized(rng: np.random.Generator, band: str, dt: float) -> Tuple[LaneNetwork, List[AgentSpec]]:
    """
    A crossing agent under a yield sign would enter the ego's path while the ego is still in
    its own, and has to give way.
    """
    speed = band_speed(rng, band)
    other_speed = float(rng.uniform(0.9, 1.0)) * speed
    ego_in = float(rng.uniform(2.3, 3.0))
    other_in = ego_in + float(rng.uniform(0.1, 0.6)) * OCCUPANCY / speed
    sign = Signal('yield_minor', 'yield_sign', MINOR_IN, -MINOR_START - STOP_LINE_BACKOFF)
    ego = idm_agent(EGO, on_major(entering_at(ego_in, speed), speed), (MAJOR_IN, MAJOR_OUT), speed)
    crossing = idm_agent('crossing', on_minor(entering_at(other_in, other_speed), other_speed),
                         (MINOR_IN, MINOR_OUT), other_speed)
    return junction((sign,)), [ego, crossing]


def stop_sign(rng: np.random.Generator, band: str, dt: float) -> Tuple[LaneNetwork, List[AgentSpec]]:
    """
    A heavy crosser stands at a minor-road stop sign while the ego approaches on the major road.

    Without a lead the ego comes too soon for the crosser to go first. With a lead car, the
    crosser may go once the lead has passed, ahead of the ego with a gap just above its
    critical gap, so any extra hesitation puts it in the ego's path.
    """
    speed = float(rng.uniform(*STOP_SIGN_HIGH_RANGE)) if band == 'high' else band_speed(rng, band)
    crosser = IdmParams(desired_speed=float(rng.uniform(8.0, 12.0)))
    sign = Signal('stop_minor', 'stop_sign', MINOR_IN, -MINOR_START - STOP_LINE_BACKOFF)
    front = CREEP + STOP_LINE_BACKOFF
    my_in = travel_time(front - REACH, 0.0, crosser.max_accel)
    my_out = travel_time(front + REACH + LENGTH, 0.0, crosser.max_accel)
    standing = AgentSpec('crossing', on_minor(-front - LENGTH / 2.0, 0.0), (MINOR_IN, MINOR_OUT),
                         PolicySpec(name='IDMAgent', idm=crosser), HEAVY)

    if rng.random() < 0.5:
        ready = STOP_DWELL - dt
        ego_x = entering_at(float(rng.uniform(2.0, 2.7)) + ready, speed)
        agents = [idm_agent(EGO, on_major(ego_x, speed), (MAJOR_IN, MAJOR_OUT), speed), standing]
        agents.extend(followers(ego_x, speed, (calm(speed), calm(speed))))
        return junction((sign,)), agents

    decide = int(round(float(rng.uniform(1.1, 1.5)) / dt)) * dt
    lead_out = my_in - crosser.critical_gap - dt / 2.0
    lead_x = REACH + LENGTH / 2.0 - speed * (lead_out + decide)
    ego_x = entering_at(decide + my_out + crosser.critical_gap + float(rng.uniform(0.05, 0.45)), speed)
    agents = [
        idm_agent(EGO, on_major(ego_x, speed), (MAJOR_IN, MAJOR_OUT), speed),
        idm_agent('lead', on_major(lead_x, speed), (MAJOR_IN, MAJOR_OUT), speed),
        standing,
    ]
    agents.extend(followers(ego_x, speed, (calm(speed),)))
    return junction((sign,)), agents


def traffic_light(rng: np.random.Generator, band: str, dt: float) -> Tuple[LaneNetwork, List[AgentSpec]]:
    """
    High band: the ego stops hard for a light turning yellow, a tailgater behind it. Low band: a
    queue pulls away at green, the follower slightly quicker off the line than the ego.
    """
    line = LIGHT_LINE - MAJOR_START
    if band == 'high':
        speed = band_speed(rng, band)
        yellow_at, decel = float(rng.uniform(2.0, 3.5)), float(rng.uniform(5.0, 7.5))
        light = Signal('light_major', 'traffic_light', MAJOR_IN, line,
                       (('green', 30.0), ('yellow', 3.0), ('red', 30.0)), offset=30.0 - yellow_at)
        stop_x = LIGHT_LINE - float(rng.uniform(1.0, 4.0)) - LENGTH / 2.0
        ego_x = stop_x - speed * yellow_at - speed * speed / (2.0 * decel)
        agents = [scripted_ego(on_major(ego_x, speed), speed, braking_segments(speed, yellow_at, decel, dt))]
        agents.extend(followers(ego_x, speed, (tailgater(rng, band, speed), calm(speed))))
        return junction((light,)), agents

    light = Signal('light_major', 'traffic_light', MAJOR_IN, line, (('green', 30.0), ('yellow', 3.0), ('red', 30.0)))
    desired = float(rng.uniform(16.0, 20.0))
    accel = float(rng.uniform(1.0, 1.5))
    gain = float(np.exp(rng.uniform(*np.log(QUEUE_ACCEL_GAIN))))
    ego_x = LIGHT_LINE - 1.0 - LENGTH / 2.0
    follower = IdmParams(desired_speed=desired, max_accel=accel + gain, time_headway=1.0)
    agents = [
        idm_agent(EGO, on_major(ego_x, 0.0), (MAJOR_IN, MAJOR_OUT), desired, max_accel=accel),
        AgentSpec('follower1', on_major(ego_x - LENGTH - follower.min_spacing, 0.0), (MAJOR_IN, MAJOR_OUT),
                  PolicySpec(name='IDMAgent', idm=follower)),
    ]
    return junction((light,)), agents


Family = Callable[[np.random.Generator, str, float], Tuple[LaneNetwork, List[AgentSpec]]]
families: Dict[str, Family] = {
    'following': car_following,
    'unsignalized': unsignalized,
    'stop_sign': stop_sign,
    'traffic_light': traffic_light,
}


def generate_scenario(family: str, band: str, index: int, rng: np.random.Generator, dt: float = DEFAULT_DT,
                      visibility_radius: float = DEFAULT_VISIBILITY_RADIUS) -> ScenarioFile:
    network, agents = families[family](rng, band, dt)
    scenario_id = f'synthetic-{band}-{index:03d}-{family}'
    logger.debug(f'{scenario_id}: {len(agents)} agents')
    return ScenarioFile(
        scenario_id=scenario_id,
        network=network,
        agents=tuple(agents),
        ego=EGO,
        duration=DURATION,
        dt=dt,
        seed=index,
        visibility_radius=visibility_radius,
    )


def generate_suite(n_high: int = 50, n_low: int = 50, seed: int = 0, dt: float = DEFAULT_DT,
                   visibility_radius: float = DEFAULT_VISIBILITY_RADIUS) -> List[ScenarioFile]:
    """Scenarios cycling through the families, first the high-speed band then the low-speed one."""
    rng = np.random.default_rng(seed)
    names = list(families)
    suite = []
    for band, count in (('high', n_high), ('low', n_low)):
        for i in range(count):
            suite.append(generate_scenario(names[i % len(names)], band, i, rng, dt, visibility_radius))
    logger.info(f'generated {len(suite)} synthetic scenarios')
    return suite
