"""
Closed loop: every step, all agents observe the same world, all policies answer, then all
states advance together.
"""
import logging
from dataclasses import dataclass, replace
from typing import Dict, List, Mapping, Optional, Tuple

from cfmargin.agents.base import Policy, PolicyContext
from cfmargin.agents.policies import build_policy
from cfmargin.exceptions import DynamicsError, PolicyError, SimulationError
from cfmargin.models.episode import Episode, ScenarioFile
from cfmargin.models.state import AgentState
from cfmargin.schemas.params import PolicySpec
from cfmargin.sim.collision import footprints_intersect
from cfmargin.sim.dynamics import step_dynamics
from cfmargin.sim.observation import WorldState, make_observation
from cfmargin.sim.route import Route
from cfmargin.sim.seeding import agent_streams

logger = logging.getLogger(__name__)

ALL_IN_CONTACT = 'all agents in contact'
ALL_OFF_MAP = 'all agents off map'


@dataclass(frozen=True)
class SimulationSetup:
    """A ready-to-run simulation: the scenario plus one built policy per agent."""

    scenario: ScenarioFile
    routes: Mapping[str, Route]
    policies: Mapping[str, Policy]
    seed: int
    horizon: int
    episode_id: str

    def with_seed(self, seed: int) -> 'SimulationSetup':
        return replace(self, seed=seed)


def build_routes(scenario: ScenarioFile) -> Dict[str, Route]:
    return {spec.id: Route(scenario.network, spec.route) for spec in scenario.agents}


def build_setup(scenario: ScenarioFile, policies: Optional[Mapping[str, Policy]] = None,
                seed: Optional[int] = None, horizon: Optional[int] = None,
                recorded: Optional[Mapping[str, Tuple[AgentState, ...]]] = None,
                episode_id: Optional[str] = None) -> SimulationSetup:
    """
    Builds routes and policies for a scenario.

    Agents missing from ``policies`` get the policy their spec names. ``recorded`` trajectories
    are handed to the policy context, Replay reconstructs its commands from them.
    """
    routes = build_routes(scenario)
    built = dict(policies or {})
    for spec in scenario.agents:
        if spec.id in built:
            continue
        ctx = PolicyContext(spec.id, routes[spec.id], spec.model, scenario.dt,
                            (recorded or {}).get(spec.id))
        built[spec.id] = build_policy(spec.policy, ctx)
    return SimulationSetup(
        scenario=scenario,
        routes=routes,
        policies=built,
        seed=scenario.seed if seed is None else seed,
        horizon=scenario.horizon if horizon is None else horizon,
        episode_id=episode_id or scenario.scenario_id,
    )


def _halt_reason(states: Mapping[str, AgentState], routes: Mapping[str, Route]) -> Optional[str]:
    ids = list(states)
    if len(ids) > 1:
        touching = set()
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                if footprints_intersect(states[a], states[b]):
                    touching.update((a, b))
        if len(touching) == len(ids):
            return ALL_IN_CONTACT
    off_map = all(
        routes[i].project(s.x, s.y)[0] - s.length / 2.0 > routes[i].length
        for i, s in states.items()
    )
    return ALL_OFF_MAP if off_map else None


def _episode(setup: SimulationSetup, trajectories: Dict[str, List[AgentState]], steps: int,
             truncation: Optional[str] = None) -> Episode:
    scenario = setup.scenario
    phases = {
        signal.id: tuple(signal.phase_at(k * scenario.dt) for k in range(steps + 1))
        for signal in scenario.network.signals
    }
    return Episode(
        episode_id=setup.episode_id,
        ego=scenario.ego or scenario.agents[0].id,
        agents=tuple(spec.id for spec in scenario.agents),
        dt=scenario.dt,
        horizon=steps,
        trajectories={agent_id: tuple(states) for agent_id, states in trajectories.items()},
        network=scenario.network,
        specs={spec.id: spec for spec in scenario.agents},
        signal_phases=phases,
        visibility_radius=scenario.visibility_radius,
        truncation=truncation,
    )


def run(setup: SimulationSetup) -> Episode:
    scenario = setup.scenario
    specs = {spec.id: spec for spec in scenario.agents}
    states = {agent_id: spec.initial for agent_id, spec in specs.items()}
    trajectories = {agent_id: [state] for agent_id, state in states.items()}
    rngs = dict(zip(specs, agent_streams(setup.seed, len(specs))))
    memories = {}
    dt = scenario.dt

    for k in range(setup.horizon):
        world = WorldState(k * dt, k, states, setup.routes, scenario.network)
        commands = {}
        for agent_id in specs:
            policy = setup.policies[agent_id]
            try:
                obs = make_observation(world, agent_id, scenario.visibility_radius)
                if k == 0:
                    memories[agent_id] = policy.reset(obs, rngs[agent_id])
                commands[agent_id], memories[agent_id] = policy.step(obs, memories[agent_id])
            except Exception as exc:
                logger.error(f'{setup.episode_id}: policy of {agent_id} failed at step {k}: {exc!r}')
                raise SimulationError(repr(exc), k, agent_id, _episode(setup, trajectories, k)) from exc

        next_states = {}
        for agent_id, command in commands.items():
            try:
                next_states[agent_id] = step_dynamics(states[agent_id], command, dt, specs[agent_id].model)
            except DynamicsError as exc:
                raise SimulationError(str(exc), k, agent_id, _episode(setup, trajectories, k)) from exc
        states = next_states
        for agent_id, state in states.items():
            trajectories[agent_id].append(state)

        reason = _halt_reason(states, setup.routes)
        if reason is not None and k + 1 < setup.horizon:
            logger.info(f'{setup.episode_id}: halted after {k + 1} of {setup.horizon} steps, {reason}')
            return _episode(setup, trajectories, k + 1, reason)

    return _episode(setup, trajectories, setup.horizon)


def simulate(scenario: ScenarioFile, policies: Optional[Mapping[str, PolicySpec]] = None,
             seed: Optional[int] = None, horizon: Optional[int] = None) -> Episode:
    """
    Runs a scenario closed loop. ``policies`` maps agent ids to policy specs that replace the
    ones in the scenario.
    """
    if not scenario.agents:
        raise PolicyError('scenario has no agents')
    if policies:
        unknown = set(policies) - {spec.id for spec in scenario.agents}
        if unknown:
            raise PolicyError(f'policies given for unknown agents {sorted(unknown)}')
        scenario = replace(scenario, agents=tuple(
            replace(spec, policy=policies.get(spec.id, spec.policy)) for spec in scenario.agents))
    return run(build_setup(scenario, seed=seed, horizon=horizon))
