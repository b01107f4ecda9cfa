import logging
from typing import Callable, Dict

from cfmargin.exceptions import ScenarioParseError
from cfmargin.formats.native import parse_episode, parse_native_scenario, write_episode, write_scenario
from cfmargin.misc.commonroad import parse_commonroad
from cfmargin.models.episode import ScenarioFile

logger = logging.getLogger(__name__)

# Scenario readers by format name
scenario_parsers: Dict[str, Callable[[bytes], ScenarioFile]] = {
    'native': parse_native_scenario,
    'commonroad-xml-subset': parse_commonroad,
}


def parse_scenario(data: bytes, format: str = 'native') -> ScenarioFile:
    parser = scenario_parsers.get(format)
    if parser is None:
        raise ScenarioParseError(f'unknown scenario format {format!r}, expected one of {sorted(scenario_parsers)}')
    scenario = parser(data)
    logger.debug(f'parsed {format} scenario {scenario.scenario_id} with {len(scenario.agents)} agents')
    return scenario


def guess_format(filename: str) -> str:
    return 'commonroad-xml-subset' if filename.lower().endswith('.xml') else 'native'


__all__ = [
    'guess_format',
    'parse_episode',
    'parse_scenario',
    'scenario_parsers',
    'write_episode',
    'write_scenario',
]
