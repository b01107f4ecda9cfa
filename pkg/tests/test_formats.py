import json
from dataclasses import replace

import numpy as np
import pytest

from builders import idm_agent, on_road, straight_network
from cfmargin.exceptions import ScenarioParseError, ScenarioSemanticError
from cfmargin.formats import guess_format, parse_episode, parse_scenario, write_episode, write_scenario
from cfmargin.models.episode import ScenarioFile
from cfmargin.sim.simulator import simulate

MINIMAL = b'\n'.join([
    b'{"record":"scenario","format":"cfmargin_scenario_v1","scenario_id":"minimal","duration":5,"dt":0.1}',
    b'{"record":"lanelet","id":1,"centerline":[[0,0],[200,0]],"width":3.5}',
    b'{"record":"agent","id":"ego","route":[1],"initial":{"x":10,"y":0,"heading":0,"speed":8}}',
]) + b'\n'


def _lines(data: bytes):
    return [json.loads(line) for line in data.decode().splitlines()]


def _replace_line(data: bytes, index: int, record: dict) -> bytes:
    lines = data.decode().splitlines()
    lines[index] = json.dumps(record)
    return ('\n'.join(lines) + '\n').encode()


def test_minimal_scenario():
    scenario = parse_scenario(MINIMAL)
    assert scenario.scenario_id == 'minimal'
    assert [a.id for a in scenario.agents] == ['ego']
    assert scenario.agents[0].policy.name == 'IDMAgent'
    assert scenario.horizon == 50
    assert scenario.visibility_radius == 100.0


def test_scenario_round_trip():
    scenario = parse_scenario(MINIMAL)
    written = write_scenario(scenario)
    assert parse_scenario(written) == scenario
    assert write_scenario(parse_scenario(written)) == written


def test_missing_lanelet_in_route():
    agent = _lines(MINIMAL)[2]
    agent['route'] = [1, 7]
    with pytest.raises(ScenarioSemanticError, match='unresolved lanelet id') as info:
        parse_scenario(_replace_line(MINIMAL, 2, agent))
    assert info.value.element == 'agent ego'


def test_disconnected_route():
    data = MINIMAL + b'{"record":"lanelet","id":2,"centerline":[[200,0],[300,0]],"width":3.5}\n'
    agent = _lines(data)[2]
    agent['route'] = [1, 2]
    with pytest.raises(ScenarioSemanticError, match='not a successor'):
        parse_scenario(_replace_line(data, 2, agent))


@pytest.mark.parametrize('line, number', [
    (b'{"record":"lanelet",', 2),
    (b'{"record":"lanelet","id":1,"centerline":[[0,0],[1,NaN]],"width":3.5}', 2),
    (b'{"record":"teleporter"}', 2),
])
def test_syntax_errors_carry_the_line(line, number):
    lines = MINIMAL.splitlines()
    lines[1] = line
    with pytest.raises(ScenarioParseError) as info:
        parse_scenario(b'\n'.join(lines))
    assert info.value.line == number


def test_header_must_come_first():
    lines = MINIMAL.splitlines()
    with pytest.raises(ScenarioParseError):
        parse_scenario(b'\n'.join([lines[1], lines[0], lines[2]]))


def test_empty_input():
    with pytest.raises(ScenarioParseError):
        parse_scenario(b'')


def test_unknown_format():
    with pytest.raises(ScenarioParseError):
        parse_scenario(MINIMAL, 'opendrive')


@pytest.mark.parametrize('name, fmt', [('a.xml', 'commonroad-xml-subset'), ('a.scenario.jsonl', 'native')])
def test_guess_format(name, fmt):
    assert guess_format(name) == fmt


def test_episode_round_trip(following_episode):
    written = write_episode(following_episode)
    parsed = parse_episode(written)
    assert write_episode(parsed) == written
    assert parsed.agents == following_episode.agents
    assert parsed.horizon == following_episode.horizon
    for agent_id in parsed.agents:
        for a, b in zip(parsed.trajectories[agent_id], following_episode.trajectories[agent_id]):
            assert (a.x, a.speed) == pytest.approx((b.x, b.speed), rel=1e-8)


def test_signal_phases_round_trip(crossing_episode):
    parsed = parse_episode(write_episode(crossing_episode))
    assert parsed.signal_phases == crossing_episode.signal_phases
    assert parsed.specs['crossing'].route == crossing_episode.specs['crossing'].route


def test_one_state_per_step_and_agent():
    scenario = ScenarioFile(
        scenario_id='three',
        network=straight_network(),
        agents=tuple(idm_agent(f'a{i}', on_road(10.0 + 30.0 * i, 8.0), (1,), 8.0) for i in range(3)),
        duration=10.0,
    )
    written = write_episode(simulate(scenario))
    assert sum(1 for r in _lines(written) if r['record'] == 'state') == 303


def test_missing_state_is_a_semantic_error(alone_episode):
    lines = write_episode(alone_episode).decode().splitlines()
    kept = [line for line in lines if '"step":3,' not in line or '"record":"state"' not in line]
    with pytest.raises(ScenarioSemanticError, match='missing step 3'):
        parse_episode(('\n'.join(kept) + '\n').encode())


def test_scenario_is_not_an_episode():
    with pytest.raises(ScenarioParseError):
        parse_episode(MINIMAL)


def test_truncation_survives(alone_episode):
    truncated = replace(alone_episode, truncation='all agents off map')
    assert parse_episode(write_episode(truncated)).truncation == 'all agents off map'


def _mutations(data: bytes, rng: np.random.Generator, count: int):
    for _ in range(count):
        buf = bytearray(data)
        for _ in range(int(rng.integers(1, 4))):
            buf[int(rng.integers(0, len(buf)))] = int(rng.integers(0, 256))
        yield bytes(buf)


def test_arbitrary_bytes_never_crash(alone_episode):
    rng = np.random.default_rng(0)
    episode = write_episode(replace(alone_episode, horizon=5, trajectories={
        k: v[:6] for k, v in alone_episode.trajectories.items()}))
    inputs = [bytes(rng.integers(0, 256, size=int(rng.integers(0, 200)), dtype=np.uint8)) for _ in range(100)]
    inputs += list(_mutations(MINIMAL, rng, 300))
    for data in inputs:
        try:
            parse_scenario(data)
        except (ScenarioParseError, ScenarioSemanticError):
            pass
    for data in _mutations(episode, rng, 300):
        try:
            parse_episode(data)
        except (ScenarioParseError, ScenarioSemanticError):
            pass
