"""
Native JSON Lines formats: ``cfmargin_scenario_v1`` scenarios and ``cfmargin_episode_v1`` logs.

One JSON object per line, discriminated by its ``record`` field. The header comes first,
then the map (lanelets, signals), then agents, then per-step states and signal phases.
Floats are written with 9 significant digits.
"""
import json
import logging
import math
from typing import Dict, Iterator, List, Sequence, Tuple

from pydantic import BaseModel, ValidationError

from cfmargin.exceptions import PolicyError, ScenarioParseError, ScenarioSemanticError
from cfmargin.models.episode import AgentSpec, Episode, ScenarioFile, validate_episode
from cfmargin.models.network import Lanelet, LaneNetwork, Signal
from cfmargin.models.state import AgentState
from cfmargin.schemas.records import (
    AgentRecord, EpisodeHeader, LaneletRecord, PhaseRecord, ScenarioHeader, SignalRecord, StateFields,
    StateRecord, record_adapter,
)
from cfmargin.sim.route import Route

logger = logging.getLogger(__name__)


def canonical(value):
    """Rounds every float to 9 significant digits, recursively."""
    if isinstance(value, float):
        return float(f'{value:.9g}')
    if isinstance(value, dict):
        return {k: canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [canonical(v) for v in value]
    return value


def dump_records(records: Sequence[BaseModel]) -> bytes:
    lines = [json.dumps(canonical(r.model_dump(mode='json')), separators=(',', ':')) for r in records]
    return ('\n'.join(lines) + '\n').encode()


def _reject_constant(name: str):
    raise ValueError(f'non-finite number {name}')


def _finite_float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f'number out of range {text}')
    return value


def iter_records(data: bytes) -> Iterator[Tuple[int, BaseModel]]:
    """Yields (line number, record); raises ScenarioParseError on undecodable or malformed lines."""
    try:
        text = data.decode('utf-8')
    except UnicodeDecodeError as e:
        raise ScenarioParseError(f'not UTF-8: {e.reason}', offset=e.start) from e
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line, parse_constant=_reject_constant, parse_float=_finite_float)
        except json.JSONDecodeError as e:
            raise ScenarioParseError(f'invalid JSON: {e.msg}', line=number, offset=e.colno) from e
        except (ValueError, RecursionError) as e:
            raise ScenarioParseError(f'invalid JSON: {e}', line=number) from e
        try:
            yield number, record_adapter.validate_python(obj)
        except ValidationError as e:
            first = e.errors()[0]
            where = '.'.join(str(p) for p in first['loc'])
            raise ScenarioParseError(f'invalid record: {where}: {first["msg"]}', line=number) from e


def _split(records: List[Tuple[int, BaseModel]], header_type) -> Tuple[BaseModel, Dict[str, list]]:
    if not records:
        raise ScenarioParseError('empty input', line=1)
    number, header = records[0]
    if not isinstance(header, header_type):
        raise ScenarioParseError(f'first record must be the {header_type.model_fields["record"].default!r} header',
                                 line=number)
    groups: Dict[str, list] = {}
    for number, record in records[1:]:
        if isinstance(record, (ScenarioHeader, EpisodeHeader)):
            raise ScenarioParseError('duplicate header', line=number)
        groups.setdefault(record.record, []).append(record)
    return header, groups


def state_from(fields: StateFields) -> AgentState:
    return AgentState(fields.x, fields.y, fields.heading, fields.speed, fields.steering,
                      fields.length, fields.width)


def state_fields(state: AgentState) -> dict:
    return dict(x=state.x, y=state.y, heading=state.heading, speed=state.speed,
                steering=state.steering, length=state.length, width=state.width)


def network_from(lanelets: Sequence[LaneletRecord], signals: Sequence[SignalRecord]) -> LaneNetwork:
    network = LaneNetwork(
        lanelets=tuple(Lanelet(r.id, tuple(tuple(p) for p in r.centerline), r.width, tuple(r.successors))
                       for r in lanelets),
        signals=tuple(Signal(r.id, r.kind, r.lanelet, r.position, tuple(tuple(p) for p in r.phases), r.offset)
                      for r in signals),
    )
    problems = network.violations()
    if problems:
        element, _, message = problems[0].partition(': ')
        raise ScenarioSemanticError(message, element)
    return network


def network_records(network: LaneNetwork) -> List[BaseModel]:
    records: List[BaseModel] = [
        LaneletRecord(id=l.id, centerline=list(l.centerline), width=l.width, successors=list(l.successors))
        for l in network.lanelets
    ]
    records += [
        SignalRecord(id=s.id, kind=s.kind, lanelet=s.lanelet, position=s.position,
                     phases=list(s.phases), offset=s.offset)
        for s in network.signals
    ]
    return records


def check_agents(network: LaneNetwork, specs: Sequence[AgentSpec], ego) -> None:
    """Routes resolve and connect, ids are unique, states respect the agent's bounds."""
    seen = set()
    for spec in specs:
        element = f'agent {spec.id}'
        if spec.id in seen:
            raise ScenarioSemanticError('duplicate agent id', element)
        seen.add(spec.id)
        try:
            Route(network, spec.route)
        except ScenarioSemanticError as e:
            raise ScenarioSemanticError(str(e).split(': ', 1)[-1], element) from e
        except PolicyError as e:
            raise ScenarioSemanticError(str(e), element) from e
        state = spec.initial
        if state.speed < 0:
            raise ScenarioSemanticError('negative speed', element)
        if not (state.length > 0 and state.width > 0):
            raise ScenarioSemanticError('footprint dimensions must be positive', element)
        if abs(state.steering) > spec.model.delta_max:
            raise ScenarioSemanticError('steering angle beyond delta_max', element)
    if ego is not None and ego not in seen:
        raise ScenarioSemanticError(f'ego {ego!r} is not an agent', 'scenario')


def parse_native_scenario(data: bytes) -> ScenarioFile:
    header, groups = _split(list(iter_records(data)), ScenarioHeader)
    network = network_from(groups.get('lanelet', []), groups.get('signal', []))
    specs = []
    for record in groups.get('agent', []):
        if record.initial is None:
            raise ScenarioSemanticError('missing initial state', f'agent {record.id}')
        specs.append(AgentSpec(record.id, state_from(record.initial), tuple(record.route),
                               record.policy, record.model))
    if groups.get('state') or groups.get('phase'):
        raise ScenarioSemanticError('state and phase records belong in episode logs', 'scenario')
    check_agents(network, specs, header.ego)
    return ScenarioFile(
        scenario_id=header.scenario_id,
        network=network,
        agents=tuple(specs),
        ego=header.ego,
        duration=header.duration,
        dt=header.dt,
        seed=header.seed,
        visibility_radius=header.visibility_radius,
    )


def write_scenario(s: ScenarioFile) -> bytes:
    records: List[BaseModel] = [ScenarioHeader(
        scenario_id=s.scenario_id, ego=s.ego, duration=s.duration, dt=s.dt, seed=s.seed,
        visibility_radius=s.visibility_radius)]
    records += network_records(s.network)
    records += [
        AgentRecord(id=a.id, route=list(a.route), policy=a.policy, model=a.model,
                    initial=StateFields(**state_fields(a.initial)))
        for a in s.agents
    ]
    return dump_records(records)


def write_episode(e: Episode) -> bytes:
    """Self-contained log: map, agent specs, one state record per (step, agent), one phase record per (step, signal)."""
    records: List[BaseModel] = [EpisodeHeader(
        episode_id=e.episode_id, ego=e.ego, dt=e.dt, horizon=e.horizon,
        visibility_radius=e.visibility_radius, truncation=e.truncation)]
    records += network_records(e.network)
    for agent_id in e.agents:
        spec = e.specs[agent_id]
        records.append(AgentRecord(id=agent_id, route=list(spec.route), policy=spec.policy, model=spec.model))
    for step in range(e.horizon + 1):
        for agent_id in e.agents:
            records.append(StateRecord(step=step, agent=agent_id, **state_fields(e.trajectories[agent_id][step])))
        for signal_id, phases in e.signal_phases.items():
            if step < len(phases):
                records.append(PhaseRecord(step=step, signal=signal_id, phase=phases[step]))
    return dump_records(records)


def parse_episode(data: bytes) -> Episode:
    header, groups = _split(list(iter_records(data)), EpisodeHeader)
    network = network_from(groups.get('lanelet', []), groups.get('signal', []))
    agents = groups.get('agent', [])
    ids = tuple(a.id for a in agents)

    states: Dict[str, Dict[int, AgentState]] = {agent_id: {} for agent_id in ids}
    for record in groups.get('state', []):
        if record.agent not in states:
            raise ScenarioSemanticError(f'state of unknown agent {record.agent!r}', f'step {record.step}')
        if record.step in states[record.agent]:
            raise ScenarioSemanticError('duplicate state', f'agent {record.agent} step {record.step}')
        states[record.agent][record.step] = state_from(record)
    trajectories = {}
    for agent_id, by_step in states.items():
        missing = [k for k in range(header.horizon + 1) if k not in by_step]
        if missing:
            raise ScenarioSemanticError(f'trajectory length: missing step {missing[0]}', f'agent {agent_id}')
        trajectories[agent_id] = tuple(by_step[k] for k in sorted(by_step))

    phases: Dict[str, List[str]] = {s.id: [] for s in network.signals}
    for record in sorted(groups.get('phase', []), key=lambda r: r.step):
        if record.signal not in phases:
            raise ScenarioSemanticError(f'phase of unknown signal {record.signal!r}', f'step {record.step}')
        phases[record.signal].append(record.phase)

    specs = {}
    for a in agents:
        if not a.route:
            raise ScenarioSemanticError('empty route', f'agent {a.id}')
        specs[a.id] = AgentSpec(a.id, states[a.id][0], tuple(a.route), a.policy, a.model)
    episode = Episode(
        episode_id=header.episode_id,
        ego=header.ego,
        agents=ids,
        dt=header.dt,
        horizon=header.horizon,
        trajectories=trajectories,
        network=network,
        specs=specs,
        signal_phases={k: tuple(v) for k, v in phases.items()},
        visibility_radius=header.visibility_radius,
        truncation=header.truncation,
    )
    violations = validate_episode(episode)
    if violations:
        v = violations[0]
        raise ScenarioSemanticError(str(v), f'agent {v.agent}' if v.agent is not None else v.field)
    check_agents(network, list(specs.values()), None)
    return episode
