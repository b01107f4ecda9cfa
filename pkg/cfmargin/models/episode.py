import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

from cfmargin.exceptions import AggregationError
from cfmargin.models.network import LaneNetwork
from cfmargin.models.state import AgentState
from cfmargin.schemas.params import KinematicModel, PolicySpec

DEFAULT_DT = 0.1
DEFAULT_VISIBILITY_RADIUS = 100.0


@dataclass(frozen=True)
class AgentSpec:
    """What is needed to (re-)simulate one agent: start state, route, policy and body model."""

    id: str
    initial: AgentState
    route: Tuple[int, ...]
    policy: PolicySpec = PolicySpec()
    model: KinematicModel = KinematicModel()


@dataclass(frozen=True)
class ScenarioFile:
    scenario_id: str
    network: LaneNetwork
    agents: Tuple[AgentSpec, ...]
    ego: Optional[str] = None
    duration: float = 10.0
    dt: float = DEFAULT_DT
    seed: int = 0
    visibility_radius: float = DEFAULT_VISIBILITY_RADIUS

    @property
    def horizon(self) -> int:
        return int(round(self.duration / self.dt))

    def agent(self, agent_id: str) -> AgentSpec:
        for spec in self.agents:
            if spec.id == agent_id:
                return spec
        raise KeyError(agent_id)


@dataclass(frozen=True)
class Episode:
    episode_id: str
    ego: str
    agents: Tuple[str, ...]
    dt: float
    horizon: int
    trajectories: Mapping[str, Tuple[AgentState, ...]]
    network: LaneNetwork
    specs: Mapping[str, AgentSpec] = field(default_factory=dict)
    signal_phases: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)
    visibility_radius: float = DEFAULT_VISIBILITY_RADIUS
    truncation: Optional[str] = None

    def state(self, agent_id: str, step: int) -> AgentState:
        return self.trajectories[agent_id][step]

    def initial_states(self) -> Dict[str, AgentState]:
        return {agent_id: self.trajectories[agent_id][0] for agent_id in self.agents}

    def to_scenario(self) -> ScenarioFile:
        """Initial conditions of the episode as a scenario (x^0(e), T, the map, the policies)."""
        agents = tuple(
            AgentSpec(
                id=agent_id,
                initial=self.trajectories[agent_id][0],
                route=self.specs[agent_id].route,
                policy=self.specs[agent_id].policy,
                model=self.specs[agent_id].model,
            )
            for agent_id in self.agents
        )
        return ScenarioFile(
            scenario_id=self.episode_id,
            network=self.network,
            agents=agents,
            ego=self.ego,
            duration=self.horizon * self.dt,
            dt=self.dt,
            visibility_radius=self.visibility_radius,
        )


@dataclass(frozen=True)
class OddDataset:
    episodes: Tuple[Episode, ...]
    label: Optional[str] = None

    def __post_init__(self):
        if not self.episodes:
            raise AggregationError('an ODD dataset needs at least one episode')

    def __len__(self) -> int:
        return len(self.episodes)

    def __iter__(self):
        return iter(self.episodes)


@dataclass(frozen=True)
class Violation:
    field: str
    message: str
    agent: Optional[str] = None
    step: Optional[int] = None

    def __str__(self) -> str:
        where = ', '.join(x for x in (
            f'agent {self.agent}' if self.agent is not None else '',
            f'step {self.step}' if self.step is not None else '') if x)
        return f'{self.field}: {self.message}' + (f' ({where})' if where else '')


def _finite(state: AgentState) -> bool:
    return all(math.isfinite(v) for v in (
        state.x, state.y, state.heading, state.speed, state.steering, state.length, state.width))


def validate_episode(e: Episode) -> List[Violation]:
    """Returns every broken Episode invariant; an empty list means the episode is well formed."""
    violations: List[Violation] = []
    if not e.agents:
        violations.append(Violation('agents', 'episode has no agents'))
    if len(set(e.agents)) != len(e.agents):
        duplicates = sorted({a for a in e.agents if e.agents.count(a) > 1})
        for agent_id in duplicates:
            violations.append(Violation('ids unique', 'duplicate agent id', agent=agent_id))
    if not e.dt > 0:
        violations.append(Violation('dt', 'timestep must be positive'))
    if e.horizon < 0:
        violations.append(Violation('horizon', 'horizon must be non-negative'))
    if e.ego not in e.agents:
        violations.append(Violation('ego', f'ego {e.ego!r} is not an agent'))

    for agent_id in dict.fromkeys(e.agents):
        trajectory = e.trajectories.get(agent_id)
        if trajectory is None:
            violations.append(Violation('trajectory', 'missing trajectory', agent=agent_id))
            continue
        if len(trajectory) != e.horizon + 1:
            violations.append(Violation(
                'trajectory length', f'expected {e.horizon + 1} states, got {len(trajectory)}',
                agent=agent_id))
        spec = e.specs.get(agent_id)
        delta_max = spec.model.delta_max if spec is not None else math.inf
        for step, state in enumerate(trajectory):
            if not _finite(state):
                violations.append(Violation('state', 'non-finite value', agent=agent_id, step=step))
                continue
            if state.speed < 0:
                violations.append(Violation('speed', 'negative speed', agent=agent_id, step=step))
            if abs(state.steering) > delta_max + 1e-9:
                violations.append(Violation(
                    'steering', 'steering angle beyond delta_max', agent=agent_id, step=step))
            if not (state.length > 0 and state.width > 0):
                violations.append(Violation(
                    'footprint', 'footprint dimensions must be positive', agent=agent_id, step=step))
    for agent_id in e.trajectories:
        if agent_id not in e.agents:
            violations.append(Violation('trajectory', 'trajectory of unknown agent', agent=agent_id))
    return violations
