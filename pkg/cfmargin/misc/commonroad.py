"""
Read-only subset of CommonRoad scenario XML: lanelets, static/dynamic obstacles and their initial states.
"""
import logging
import math
from collections import Counter
from typing import List, Optional, Tuple

from bs4 import BeautifulSoup, Tag
from lxml import etree

from cfmargin.exceptions import ScenarioParseError, ScenarioSemanticError
from cfmargin.models.episode import DEFAULT_DT, AgentSpec, ScenarioFile
from cfmargin.models.network import Lanelet, LaneNetwork
from cfmargin.models.state import AgentState
from cfmargin.schemas.params import IdmParams, PolicySpec
from cfmargin.sim.route import Route

logger = logging.getLogger(__name__)

KNOWN = {'lanelet', 'obstacle', 'dynamicObstacle', 'staticObstacle'}
OBSTACLES = ('obstacle', 'dynamicObstacle', 'staticObstacle')
MISALIGNED_PENALTY = 100.0  # m added to the lateral offset of lanelets running the other way
MIN_DESIRED_SPEED = 1.0  # m/s


def local(name: Optional[str]) -> str:
    return (name or '').rsplit(':', 1)[-1]


def children(node: Tag, name: str) -> List[Tag]:
    return [c for c in node.find_all(True, recursive=False) if local(c.name) == name]


def child(node: Tag, name: str) -> Optional[Tag]:
    found = children(node, name)
    return found[0] if found else None


def inner(node: Tag, name: str) -> Tag:
    """The named wrapper child if present, else the node itself."""
    wrapper = child(node, name)
    return node if wrapper is None else wrapper


def number(node: Optional[Tag], element: str) -> float:
    """A plain number, an ``exact`` value, or the midpoint of an interval."""
    if node is None:
        raise ScenarioSemanticError('missing value', element)
    exact = child(node, 'exact')
    start, end = child(node, 'intervalStart'), child(node, 'intervalEnd')
    try:
        if exact is not None:
            value = float(exact.get_text(strip=True))
        elif start is not None and end is not None:
            value = (float(start.get_text(strip=True)) + float(end.get_text(strip=True))) / 2.0
        else:
            value = float(node.get_text(strip=True))
    except ValueError as e:
        raise ScenarioSemanticError(f'not a number in <{local(node.name)}>', element) from e
    if not math.isfinite(value):
        raise ScenarioSemanticError(f'non-finite value in <{local(node.name)}>', element)
    return value


def points(bound: Optional[Tag], element: str) -> List[Tuple[float, float]]:
    if bound is None:
        raise ScenarioSemanticError('missing lanelet bound', element)
    return [(number(child(p, 'x'), element), number(child(p, 'y'), element)) for p in children(bound, 'point')]


def read_lanelet(node: Tag) -> Lanelet:
    element = f'lanelet {node.get("id")}'
    try:
        lanelet_id = int(node.get('id', ''))
    except ValueError as e:
        raise ScenarioSemanticError('lanelet id must be an integer', element) from e
    left = points(child(node, 'leftBound'), element)
    right = points(child(node, 'rightBound'), element)
    n = min(len(left), len(right))
    if n < 2:
        raise ScenarioSemanticError('centerline needs at least 2 points', element)
    centerline = tuple(((l[0] + r[0]) / 2.0, (l[1] + r[1]) / 2.0) for l, r in zip(left[:n], right[:n]))
    width = sum(math.dist(l, r) for l, r in zip(left[:n], right[:n])) / n
    successors = []
    for s in children(node, 'successor'):
        try:
            successors.append(int(s.get('ref', '')))
        except ValueError as e:
            raise ScenarioSemanticError('successor ref must be an integer', element) from e
    return Lanelet(lanelet_id, centerline, width, tuple(successors))


def is_static(node: Tag) -> bool:
    if local(node.name) == 'staticObstacle':
        return True
    role = child(node, 'role')
    return role is not None and role.get_text(strip=True) == 'static'


def read_obstacle(node: Tag) -> Tuple[str, AgentState, bool]:
    element = f'obstacle {node.get("id")}'
    rectangle = child(inner(node, 'shape'), 'rectangle')
    if rectangle is None:
        raise ScenarioSemanticError('only rectangle shapes are supported', element)
    initial = child(node, 'initialState')
    if initial is None:
        raise ScenarioSemanticError('missing initialState', element)
    position = child(inner(initial, 'position'), 'point')
    if position is None:
        raise ScenarioSemanticError('missing initial position', element)
    velocity = child(initial, 'velocity')
    state = AgentState(
        x=number(child(position, 'x'), element),
        y=number(child(position, 'y'), element),
        heading=number(child(initial, 'orientation'), element),
        speed=max(number(velocity, element), 0.0) if velocity is not None else 0.0,
        length=number(child(rectangle, 'length'), element),
        width=number(child(rectangle, 'width'), element),
    )
    if not (state.length > 0 and state.width > 0):
        raise ScenarioSemanticError('footprint dimensions must be positive', element)
    return str(node.get('id')), state, is_static(node)


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


def assign_route(network: LaneNetwork, state: AgentState) -> Tuple[int, ...]:
    """Nearest lanelet running the agent's way, then first successors until the chain ends or loops."""
    best, best_score = None, math.inf
    for lanelet in network.lanelets:
        route = Route(network, (lanelet.id,))
        s, d = route.project(state.x, state.y)
        score = abs(d) + max(0.0, -s, s - route.length)
        if abs(_wrap(state.heading - route.heading_at(s))) > math.pi / 2:
            score += MISALIGNED_PENALTY
        if score < best_score:
            best, best_score = lanelet, score
    chain = [best.id]
    while best.successors and best.successors[0] not in chain:
        best = network.lanelet(best.successors[0])
        chain.append(best.id)
    return tuple(chain)


def parse_commonroad(data: bytes) -> ScenarioFile:
    """
    Lanelet geometry (centerline between the bounds) and obstacles with their initial states.
    The first dynamic obstacle becomes the ego; static obstacles stand still.
    """
    try:
        etree.fromstring(data, etree.XMLParser(resolve_entities=False, no_network=True))
    except etree.XMLSyntaxError as e:
        line, offset = e.position if e.position else (None, None)
        raise ScenarioParseError(f'malformed XML: {e.msg}', line=line, offset=offset) from e
    except ValueError as e:
        raise ScenarioParseError(f'malformed XML: {e}') from e

    soup = BeautifulSoup(data, 'xml')
    root = next((t for t in soup.find_all(True, recursive=False)), None)
    if root is None:
        raise ScenarioParseError('empty XML document')

    skipped = Counter(local(c.name) for c in root.find_all(True, recursive=False) if local(c.name) not in KNOWN)
    for name, count in sorted(skipped.items()):
        logger.warning(f'skipping {count} unsupported <{name}> element(s)')

    lanelets = tuple(read_lanelet(n) for n in children(root, 'lanelet'))
    network = LaneNetwork(lanelets=lanelets)
    problems = network.violations()
    if problems:
        element, _, message = problems[0].partition(': ')
        raise ScenarioSemanticError(message, element)
    if not lanelets:
        raise ScenarioSemanticError('no lanelets', 'scenario')

    agents, ego = [], None
    seen = set()
    for node in (n for name in OBSTACLES for n in children(root, name)):
        agent_id, state, static = read_obstacle(node)
        if agent_id in seen:
            raise ScenarioSemanticError('duplicate obstacle id', f'obstacle {agent_id}')
        seen.add(agent_id)
        if static:
            policy = PolicySpec(name='Replay')
        else:
            policy = PolicySpec(name='IDMAgent', idm=IdmParams(desired_speed=max(state.speed, MIN_DESIRED_SPEED)))
            ego = ego or agent_id
        agents.append(AgentSpec(agent_id, state, assign_route(network, state), policy))

    try:
        dt = float(root.get('timeStepSize', DEFAULT_DT))
    except ValueError as e:
        raise ScenarioSemanticError('timeStepSize must be a number', 'commonRoad') from e
    if not (math.isfinite(dt) and dt > 0):
        raise ScenarioSemanticError('timeStepSize must be positive', 'commonRoad')
    return ScenarioFile(
        scenario_id=str(root.get('benchmarkID', 'commonroad')),
        network=network,
        agents=tuple(agents),
        ego=ego or (agents[0].id if agents else None),
        dt=dt,
    )
