import logging
from dataclasses import dataclass
from typing import Dict

from cfmargin.agents.base import Policy, PolicyContext
from cfmargin.agents.filters import DelayFilter, ObservationFilter, steps_for, with_filters
from cfmargin.agents.idm import apply_aggressiveness
from cfmargin.agents.policies import build_policy
from cfmargin.counterfactuals.filters import DistractionFilter, IllegalPrecedenceFilter, UnseenFilter
from cfmargin.exceptions import CounterfactualError
from cfmargin.models.counterfactual import CounterfactualAssignment, CounterfactualKind
from cfmargin.models.episode import AgentSpec, Episode
from cfmargin.schemas.params import PolicySpec
from cfmargin.sim.route import Route
from cfmargin.sim.seeding import derive_seed
from cfmargin.sim.simulator import SimulationSetup, build_routes, run

logger = logging.getLogger(__name__)

REPLAY = PolicySpec(name='Replay')


@dataclass(frozen=True)
class CounterfactualSetup:
    """Counterfactual policy set for one episode at one intensity, ready to be realized."""

    simulation: SimulationSetup
    assignment: CounterfactualAssignment
    base_seed: int

    @property
    def episode_id(self) -> str:
        return self.simulation.episode_id

    @property
    def deterministic(self) -> bool:
        return not self.assignment.kind.stochastic or self.assignment.intensity == 0.0


def counterfactual_filter(assign: CounterfactualAssignment, dt: float) -> ObservationFilter:
    gamma = assign.intensity
    if assign.kind is CounterfactualKind.DISTRACTION:
        return DistractionFilter(gamma)
    if assign.kind is CounterfactualKind.IMPAIRED_REFLEXES:
        return DelayFilter(steps_for(gamma, dt))
    if assign.kind is CounterfactualKind.UNSEEN:
        return UnseenFilter(assign.ego, gamma)
    if assign.kind is CounterfactualKind.ILLEGAL_PRECEDENCE:
        return IllegalPrecedenceFilter(gamma)
    raise CounterfactualError(f'{assign.kind.value} is not realized as an observation filter')


def _context(e: Episode, spec: AgentSpec, route: Route) -> PolicyContext:
    return PolicyContext(spec.id, route, spec.model, e.dt, e.trajectories.get(spec.id))


def counterfactual_policy(e: Episode, spec: AgentSpec, route: Route,
                          assign: CounterfactualAssignment) -> Policy:
    """The nominal policy of a non-ego agent with the counterfactual applied."""
    if assign.kind is CounterfactualKind.AGGRESSIVENESS:
        if not spec.policy.is_idm:
            logger.debug(f'{spec.id}: {spec.policy.name} has no aggressiveness parameter, left nominal')
            return build_policy(spec.policy, _context(e, spec, route))
        edited = spec.policy.model_copy(update=dict(idm=apply_aggressiveness(spec.policy.idm, assign.intensity)))
        return build_policy(edited, _context(e, spec, route))
    base = build_policy(spec.policy, _context(e, spec, route))
    return with_filters(base, [counterfactual_filter(assign, e.dt)])


def build_counterfactual(e: Episode, assign: CounterfactualAssignment, ego_policy: PolicySpec = REPLAY,
                         seed: int = 0) -> CounterfactualSetup:
    """
    Re-simulation setup from the initial states and horizon of ``e``: the ego runs ``ego_policy``,
    every other agent runs its nominal policy under the counterfactual.
    """
    if assign.ego != e.ego:
        raise CounterfactualError(f'assignment ego {assign.ego!r} differs from episode ego {e.ego!r}')
    if not isinstance(assign.kind, CounterfactualKind):
        raise CounterfactualError(f'unknown counterfactual kind {assign.kind!r}')
    scenario = e.to_scenario()
    routes = build_routes(scenario)

    policies: Dict[str, Policy] = {}
    for spec in scenario.agents:
        agent_id, route = spec.id, routes[spec.id]
        if agent_id == e.ego:
            policies[agent_id] = build_policy(ego_policy, _context(e, spec, route))
        else:
            policies[agent_id] = counterfactual_policy(e, spec, route, assign)
    simulation = SimulationSetup(scenario, routes, policies, seed, e.horizon, e.episode_id)
    return CounterfactualSetup(simulation, assign, seed)


def rep_seed(setup: CounterfactualSetup, rep: int) -> int:
    assign = setup.assignment
    return derive_seed(setup.base_seed, setup.episode_id, assign.kind.value, float(assign.intensity), rep)


def realize(setup: CounterfactualSetup, rep: int) -> Episode:
    """One realization c(e); a pure function of (setup, rep)."""
    return run(setup.simulation.with_seed(rep_seed(setup, rep)))
