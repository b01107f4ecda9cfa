import math
from dataclasses import replace

import numpy as np

from cfmargin.agents.idm import equilibrium_gap
from cfmargin.margin.estimate import ProbabilityPoint
from cfmargin.margin.search import MarginResult
from cfmargin.misc.synthetic import (
    EGO, MAJOR_IN, MAJOR_OUT, MINOR_IN, MINOR_OUT, idm_agent, junction, on_major, on_minor,
)
from cfmargin.models.counterfactual import CounterfactualKind
from cfmargin.models.episode import AgentSpec, ScenarioFile
from cfmargin.models.network import Lanelet, LaneNetwork, Signal
from cfmargin.models.state import AgentState
from cfmargin.schemas.params import CommandSegment, IdmParams, PolicySpec
from cfmargin.severity.model import ZERO_PROFILE, SeverityProfile

ROAD_LENGTH = 500.0


def straight_network(length: float = ROAD_LENGTH) -> LaneNetwork:
    return LaneNetwork(lanelets=(Lanelet(1, ((0.0, 0.0), (length, 0.0)), 3.5),))


def on_road(x: float, speed: float) -> AgentState:
    return AgentState(x=x, y=0.0, heading=0.0, speed=speed)


def braking_leader(cruise_steps: int = 20, decel: float = -6.0, steps: int = 200) -> PolicySpec:
    """Cruises, then brakes to a standstill and stays there."""
    return PolicySpec(name='BestResponse', segments=(
        CommandSegment(acceleration=0.0, steering_rate=0.0, steps=cruise_steps),
        CommandSegment(acceleration=decel, steering_rate=0.0, steps=steps),
    ))


def following_scenario(duration: float = 8.0, gap: float = 25.0, speed: float = 10.0) -> ScenarioFile:
    """The ego leads at ``speed`` and brakes hard at t = 2 s; an IDM follower is ``gap`` m behind (centers)."""
    ego_x = 40.0
    return ScenarioFile(
        scenario_id='two-car-following',
        network=straight_network(),
        agents=(
            AgentSpec(EGO, on_road(ego_x, speed), (1,), braking_leader()),
            AgentSpec('follower', on_road(ego_x - gap, speed), (1,),
                      PolicySpec(name='IDMAgent', idm=IdmParams(desired_speed=speed))),
        ),
        ego=EGO,
        duration=duration,
        seed=7,
    )


def tailgating_scenario(duration: float = 6.0, speed: float = 10.0) -> ScenarioFile:
    """The braking ego of ``following_scenario`` with a follower settled at a 0.5 s IDM headway."""
    follower = IdmParams(desired_speed=1.6 * speed, time_headway=0.5)
    gap = equilibrium_gap(follower, speed) + 4.5
    scenario = following_scenario(duration, gap, speed)
    agents = (scenario.agents[0], replace(scenario.agents[1], policy=PolicySpec(name='IDMAgent', idm=follower)))
    return replace(scenario, scenario_id='two-car-tailgating', agents=agents)


def trap_scenario(duration: float = 3.0) -> ScenarioFile:
    """The ego stands 10 m ahead of an IDM follower at 10 m/s, too close to get away from it if it is blind."""
    return ScenarioFile(
        scenario_id='standing-trap',
        network=straight_network(),
        agents=(
            AgentSpec(EGO, on_road(60.0, 0.0), (1,), PolicySpec(name='BestResponse')),
            AgentSpec('follower', on_road(45.5, 10.0), (1,),
                      PolicySpec(name='IDMAgent', idm=IdmParams(desired_speed=10.0))),
        ),
        ego=EGO,
        duration=duration,
    )


def crossing_scenario(duration: float = 8.0) -> ScenarioFile:
    """
    Ego on the major road and a crossing agent on the minor road, both 60 m out at 10 m/s,
    so they reach the junction center together; the minor road has a stop sign 6 m before it.
    """
    sign = Signal('stop_minor', 'stop_sign', MINOR_IN, 144.0)
    return ScenarioFile(
        scenario_id='stop-sign-crossing',
        network=junction((sign,)),
        agents=(
            idm_agent(EGO, on_major(-60.0, 10.0), (MAJOR_IN, MAJOR_OUT), 10.0),
            idm_agent('crossing', on_minor(-60.0, 10.0), (MINOR_IN, MINOR_OUT), 10.0),
        ),
        ego=EGO,
        duration=duration,
        seed=3,
    )


def alone_scenario(duration: float = 5.0) -> ScenarioFile:
    return ScenarioFile(
        scenario_id='alone',
        network=straight_network(),
        agents=(AgentSpec(EGO, on_road(10.0, 10.0), (1,), PolicySpec(idm=IdmParams(desired_speed=10.0))),),
        ego=EGO,
        duration=duration,
    )


def net_gap(lead: AgentState, follow: AgentState) -> float:
    return math.dist(lead.position, follow.position) - (lead.length + follow.length) / 2.0


def make_result(episode_id: str, p_hats, margin=None, kind=CounterfactualKind.UNSEEN, mode: str = 'non_reactive',
                severity: SeverityProfile = ZERO_PROFILE) -> MarginResult:
    """A margin result on an evenly spaced base grid with 10 reps per point."""
    grid = np.linspace(0.0, kind.gamma_max, len(p_hats))
    curve = tuple(
        ProbabilityPoint(intensity=float(g), reps=10, collisions=int(round(10 * p)),
                         severity=severity if p > 0 else ZERO_PROFILE)
        for g, p in zip(grid, p_hats)
    )
    return MarginResult(episode_id, kind, mode, margin, margin is None, curve,
                        severity if margin is not None else ZERO_PROFILE, 0.0, 0.05)
