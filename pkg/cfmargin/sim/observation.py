import math
from dataclasses import dataclass, field, replace
from typing import Dict, Mapping, Tuple

from cfmargin.models.network import LaneNetwork, SignalKind
from cfmargin.models.state import AgentState
from cfmargin.sim.route import Route


@dataclass(frozen=True, slots=True)
class SignalObservation:
    id: str
    kind: SignalKind
    phase: str
    distance: float  # along the route, from the front bumper to the stop line


@dataclass(frozen=True)
class Observation:
    agent_id: str
    state: AgentState
    nearby: Tuple[Tuple[str, AgentState], ...]
    signals: Tuple[SignalObservation, ...]
    time: float
    step: int

    def without(self, agent_id: str) -> 'Observation':
        return replace(self, nearby=tuple(item for item in self.nearby if item[0] != agent_id))


@dataclass
class WorldState:
    """Everything the simulator knows at one step; observations are cut from it."""

    time: float
    step: int
    states: Dict[str, AgentState]
    routes: Mapping[str, Route]
    network: LaneNetwork
    _progress: Dict[str, Tuple[float, float]] = field(default_factory=dict, repr=False)

    def progress(self, agent_id: str) -> Tuple[float, float]:
        """(s, d) of an agent along its own route, cached per step."""
        if agent_id not in self._progress:
            state = self.states[agent_id]
            self._progress[agent_id] = self.routes[agent_id].project(state.x, state.y)
        return self._progress[agent_id]


def make_observation(world: WorldState, agent_id: str, visibility_radius: float) -> Observation:
    if agent_id not in world.states:
        raise KeyError(f'unknown agent {agent_id!r}')
    me = world.states[agent_id]
    nearby = tuple(
        (other_id, other)
        for other_id, other in world.states.items()
        if other_id != agent_id and math.dist(me.position, other.position) <= visibility_radius
    )

    signals = ()
    route = world.routes.get(agent_id)
    if route is not None and route.signals:
        front = world.progress(agent_id)[0] + me.length / 2.0
        signals = tuple(
            SignalObservation(signal.id, signal.kind, signal.phase_at(world.time), s_line - front)
            for signal, s_line in route.signals
            if 0.0 <= s_line - front <= visibility_radius
        )
    return Observation(agent_id, me, nearby, signals, world.time, world.step)
