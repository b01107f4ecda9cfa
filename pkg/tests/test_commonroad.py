import logging

import pytest

from cfmargin.exceptions import ScenarioParseError, ScenarioSemanticError
from cfmargin.formats import parse_scenario

FORMAT = 'commonroad-xml-subset'

SCENARIO = b"""<?xml version="1.0" encoding="UTF-8"?>
<commonRoad benchmarkID="ZAM_Test-1_1_T-1" timeStepSize="0.1">
  <lanelet id="10">
    <leftBound>
      <point><x>0.0</x><y>1.75</y></point>
      <point><x>100.0</x><y>1.75</y></point>
    </leftBound>
    <rightBound>
      <point><x>0.0</x><y>-1.75</y></point>
      <point><x>100.0</x><y>-1.75</y></point>
    </rightBound>
  </lanelet>
  <obstacle id="42">
    <role>dynamic</role>
    <type>car</type>
    <shape><rectangle><length>4.2</length><width>1.7</width></rectangle></shape>
    <initialState>
      <position><point><x>12.0</x><y>0.5</y></point></position>
      <orientation><exact>0.0</exact></orientation>
      <velocity><intervalStart>8.0</intervalStart><intervalEnd>10.0</intervalEnd></velocity>
    </initialState>
  </obstacle>
  <planningProblem id="1"/>
</commonRoad>
"""


def test_one_lanelet_one_agent():
    scenario = parse_scenario(SCENARIO, FORMAT)
    assert scenario.scenario_id == 'ZAM_Test-1_1_T-1'
    assert scenario.dt == pytest.approx(0.1)
    (lanelet,) = scenario.network.lanelets
    assert lanelet.id == 10
    assert lanelet.centerline == ((0.0, 0.0), (100.0, 0.0))
    assert lanelet.width == pytest.approx(3.5)
    (agent,) = scenario.agents
    assert agent.id == '42'
    assert scenario.ego == '42'
    assert agent.route == (10,)
    assert (agent.initial.x, agent.initial.y, agent.initial.speed) == pytest.approx((12.0, 0.5, 9.0))
    assert (agent.initial.length, agent.initial.width) == pytest.approx((4.2, 1.7))
    assert agent.policy.name == 'IDMAgent'
    assert agent.policy.idm.desired_speed == pytest.approx(9.0)


def test_unknown_elements_are_skipped_with_a_warning(caplog):
    with caplog.at_level(logging.WARNING):
        parse_scenario(SCENARIO, FORMAT)
    assert 'planningProblem' in caplog.text


def test_namespaces_are_ignored():
    namespaced = SCENARIO.replace(b'<commonRoad ', b'<cr:commonRoad xmlns:cr="urn:commonroad" ').replace(
        b'</commonRoad>', b'</cr:commonRoad>')
    assert len(parse_scenario(namespaced, FORMAT).agents) == 1


def test_static_obstacle_stands_still():
    static = SCENARIO.replace(b'<role>dynamic</role>', b'<role>static</role>')
    (agent,) = parse_scenario(static, FORMAT).agents
    assert agent.policy.name == 'Replay'


@pytest.mark.parametrize('data', [
    b'<commonRoad><lanelet id="1">',
    b'not xml at all',
    b'',
])
def test_malformed_xml(data):
    with pytest.raises(ScenarioParseError):
        parse_scenario(data, FORMAT)


def test_lanelet_with_a_single_point():
    broken = SCENARIO.replace(b'<point><x>100.0</x><y>1.75</y></point>', b'')
    with pytest.raises(ScenarioSemanticError, match='at least 2 points'):
        parse_scenario(broken, FORMAT)


def test_non_numeric_coordinate():
    broken = SCENARIO.replace(b'<x>12.0</x>', b'<x>twelve</x>')
    with pytest.raises(ScenarioSemanticError) as info:
        parse_scenario(broken, FORMAT)
    assert info.value.element == 'obstacle 42'
