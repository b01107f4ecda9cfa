import math
from dataclasses import replace

import numpy as np
import pytest

from builders import alone_scenario, on_road, straight_network
from cfmargin.agents.base import PolicyContext
from cfmargin.agents.policies import IdmPolicy, build_policy, policy_step, reconstruct_commands
from cfmargin.exceptions import PolicyError
from cfmargin.models.state import AgentState, IDLE
from cfmargin.schemas.params import IdmParams, KinematicModel, PolicySpec
from cfmargin.sim.observation import Observation, SignalObservation
from cfmargin.sim.route import Route
from cfmargin.sim.simulator import build_setup, run, simulate

DT = 0.1
ROUTE = Route(straight_network(), (1,))
CONTEXT = PolicyContext('me', ROUTE, KinematicModel(), DT)


def _obs(speed=10.0, leader=None, signals=(), step=0) -> Observation:
    nearby = () if leader is None else (('lead', leader),)
    return Observation('me', on_road(100.0, speed), nearby, tuple(signals), step * DT, step)


def _command(policy, obs):
    memory = policy.reset(obs, np.random.default_rng(0))
    return policy_step(policy, obs, memory)[0]


def test_red_light_ahead_brakes():
    policy = build_policy(PolicySpec(), CONTEXT)
    light = SignalObservation('light', 'traffic_light', 'red', 30.0)
    assert _command(policy, _obs(signals=[light])).acceleration < 0.0


def test_green_light_is_ignored():
    policy = build_policy(PolicySpec(), CONTEXT)
    light = SignalObservation('light', 'traffic_light', 'green', 30.0)
    assert _command(policy, _obs(signals=[light])) == _command(policy, _obs())


def test_stop_sign_holds_until_dwell_and_clear():
    policy = build_policy(PolicySpec(), CONTEXT)
    sign = SignalObservation('stop', 'stop_sign', 'stop', 2.0)
    obs = _obs(speed=0.0, signals=[sign])
    memory = policy.reset(obs, np.random.default_rng(0))
    accelerations = []
    for _ in range(8):
        command, memory = policy.step(obs, memory)
        accelerations.append(command.acceleration)
    assert all(a <= 0.0 for a in accelerations[:4])
    assert accelerations[-1] > 0.0


def _crossing(y: float) -> AgentState:
    return AgentState(120.0, y, math.pi / 2, 10.0)


@pytest.mark.parametrize('kind', ['yield_sign', 'stop_sign'])
def test_sign_waits_for_a_gap_in_crossing_traffic(kind):
    policy = build_policy(PolicySpec(), CONTEXT)
    sign = SignalObservation('sign', kind, kind.split('_')[0], 2.0)
    obs = Observation('me', on_road(100.0, 0.0), (('crossing', _crossing(-60.0)),), (sign,), 0.0, 0)
    memory = policy.reset(obs, np.random.default_rng(0))
    for _ in range(8):
        command, memory = policy.step(obs, memory)
        assert command.acceleration <= 0.0


@pytest.mark.parametrize('y', [-20.0, 10.0])
def test_yield_sign_lets_go_when_crossing_traffic_is_clear(y):
    policy = build_policy(PolicySpec(), CONTEXT)
    sign = SignalObservation('sign', 'yield_sign', 'yield', 2.0)
    obs = Observation('me', on_road(100.0, 0.0), (('crossing', _crossing(y)),), (sign,), 0.0, 0)
    assert _command(policy, obs).acceleration == pytest.approx(IdmParams().max_accel)


def test_leader_in_corridor_brakes():
    policy = build_policy(PolicySpec(), CONTEXT)
    braking = _command(policy, _obs(leader=on_road(115.0, 0.0)))
    assert braking.acceleration < _command(policy, _obs()).acceleration


def test_crossing_traffic_clearing_the_corridor_is_not_a_leader():
    policy = build_policy(PolicySpec(), CONTEXT)
    crossing = AgentState(115.0, -1.0, math.pi / 2, 10.0)
    assert _command(policy, _obs(leader=crossing)) == _command(policy, _obs())
    standing = AgentState(115.0, -1.0, math.pi / 2, 0.0)
    assert _command(policy, _obs(leader=standing)).acceleration < _command(policy, _obs()).acceleration


def test_agent_beside_the_lane_is_not_a_leader():
    policy = build_policy(PolicySpec(), CONTEXT)
    beside = AgentState(115.0, 6.0, 0.0, 0.0)
    assert _command(policy, _obs(leader=beside)) == _command(policy, _obs())


def test_shortsighted_ignores_a_leader_at_15_m():
    shortsighted = build_policy(PolicySpec(name='IDMShortsighted10'), CONTEXT)
    nominal = build_policy(PolicySpec(), CONTEXT)
    braking_leader = on_road(115.0, 2.0)
    assert _command(shortsighted, _obs(leader=braking_leader)) == _command(nominal, _obs())
    close_leader = on_road(108.0, 2.0)
    assert _command(shortsighted, _obs(leader=close_leader)) == _command(nominal, _obs(leader=close_leader))


def test_latency_uses_the_observation_two_steps_old():
    latency = build_policy(PolicySpec(name='IDMLatency2'), CONTEXT)
    nominal = build_policy(PolicySpec(), CONTEXT)
    observations = [_obs(speed=5.0 + k, leader=on_road(120.0, 5.0), step=k) for k in range(6)]
    memory = latency.reset(observations[0], np.random.default_rng(0))
    for k, obs in enumerate(observations):
        command, memory = latency.step(obs, memory)
        assert command == _command(nominal, observations[max(k - 2, 0)])


def test_replay_without_recording_idles():
    policy = build_policy(PolicySpec(name='Replay'), CONTEXT)
    assert _command(policy, _obs()) == IDLE


def test_open_loop_segments_then_idle():
    spec = PolicySpec(name='BestResponse', segments=[dict(acceleration=-2.0, steering_rate=0.1, steps=2)])
    policy = build_policy(spec, CONTEXT)
    commands = [_command(policy, _obs(step=k)) for k in range(3)]
    assert [c.acceleration for c in commands] == [-2.0, -2.0, 0.0]


def test_segments_only_for_best_response():
    with pytest.raises(ValueError):
        PolicySpec(name='IDMAgent', segments=[dict(acceleration=0.0, steering_rate=0.0, steps=1)])


def test_unknown_policy_name():
    with pytest.raises(ValueError):
        PolicySpec(name='Kamikaze')


def test_empty_route():
    with pytest.raises(PolicyError):
        Route(straight_network(), ())


def test_reconstructed_commands():
    recorded = (on_road(0.0, 10.0), on_road(1.0, 9.0), on_road(1.9, 9.0))
    commands = reconstruct_commands(recorded, DT)
    assert [c.acceleration for c in commands] == pytest.approx([-10.0, 0.0])


def test_idm_policy_is_reentrant():
    policy = IdmPolicy(IdmParams(), ROUTE, KinematicModel(), DT)
    assert _command(policy, _obs()) == _command(policy, _obs())


def _with_policy(scenario, agent_id, spec):
    return replace(scenario, agents=tuple(
        replace(agent, policy=spec) if agent.id == agent_id else agent for agent in scenario.agents))


def test_replay_reproduces_the_recorded_trajectory(following_episode):
    e = following_episode
    scenario = _with_policy(e.to_scenario(), 'follower', PolicySpec(name='Replay'))
    replay = run(build_setup(scenario, recorded=e.trajectories)).trajectories['follower']
    source = e.trajectories['follower']
    assert len(replay) == len(source)
    for a, b in zip(source, replay):
        assert (b.x, b.y, b.heading, b.speed, b.steering) == pytest.approx(
            (a.x, a.y, a.heading, a.speed, a.steering), abs=1e-6)


def test_lateral_offset_decays():
    scenario = alone_scenario(duration=15.0)
    shifted = replace(scenario, agents=(replace(scenario.agents[0], initial=AgentState(10.0, 1.0, 0.0, 10.0)),))
    assert abs(simulate(shifted).trajectories['ego'][-1].y) < 0.05
