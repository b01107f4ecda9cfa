"""
Monte-Carlo collision probability of the ego at one counterfactual intensity.
"""
import logging
from dataclasses import dataclass, field
from functools import partial
from typing import Literal, Optional

from statsmodels.stats.proportion import proportion_confint

from cfmargin.counterfactuals.engine import REPLAY, build_counterfactual, realize
from cfmargin.exceptions import BestResponseError, CounterfactualError, EstimationError, SimulationError
from cfmargin.margin.best_response import best_response
from cfmargin.margin.workers import parallel_map
from cfmargin.models.counterfactual import CounterfactualAssignment, CounterfactualKind
from cfmargin.models.episode import Episode
from cfmargin.schemas.params import POLICY_NAMES, PolicySpec
from cfmargin.schemas.severity import SeverityCoefficients
from cfmargin.severity.model import DEFAULT_COEFFICIENTS, ZERO_PROFILE, SeverityProfile, mean_profile, severity_of
from cfmargin.sim.collision import check_contacts, first_contact_of

logger = logging.getLogger(__name__)

Mode = Literal['reactive', 'non_reactive', 'best_response']
CONFIDENCE = 0.95


@dataclass(frozen=True)
class EgoMode:
    """How the ego drives in counterfactual runs: replayed, a named policy, or best response."""

    mode: Mode = 'non_reactive'
    policy: Optional[str] = None

    @classmethod
    def parse(cls, text: str) -> 'EgoMode':
        if text == 'replay':
            return cls('non_reactive')
        if text in ('best-response', 'best_response'):
            return cls('best_response')
        if text.startswith('policy:'):
            name = text.split(':', 1)[1]
            if name not in POLICY_NAMES:
                raise CounterfactualError(f'unknown ego policy {name!r}')
            return cls('reactive', name)
        raise CounterfactualError(f'unknown ego mode {text!r}')

    def ego_policy(self, e: Episode) -> PolicySpec:
        if self.mode != 'reactive':
            return REPLAY
        own = e.specs.get(e.ego)
        idm = own.policy.idm if own is not None else PolicySpec().idm
        return PolicySpec(name=self.policy, idm=idm)


@dataclass(frozen=True)
class MarginProblem:
    """An episode, a counterfactual kind and an ego mode: everything but the intensity."""

    episode: Episode
    kind: CounterfactualKind
    ego_mode: EgoMode = EgoMode()
    coefficients: SeverityCoefficients = DEFAULT_COEFFICIENTS

    def assignment(self, gamma: float) -> CounterfactualAssignment:
        return CounterfactualAssignment(self.kind, gamma, self.episode.ego)

    def reps_needed(self, gamma: float, n_reps: int) -> int:
        return n_reps if self.kind.stochastic and gamma > 0 else 1


@dataclass(frozen=True)
class RepOutcome:
    collided: bool
    severity: SeverityProfile = ZERO_PROFILE
    failed: bool = False


@dataclass(frozen=True)
class ProbabilityPoint:
    intensity: float
    reps: int
    collisions: int
    failures: int = 0
    ci_low: float = 0.0
    ci_high: float = 1.0
    usable: bool = True
    on_grid: bool = True
    severity: SeverityProfile = field(default=ZERO_PROFILE)  # mean over colliding reps

    @property
    def p_hat(self) -> float:
        return self.collisions / self.reps if self.reps else 0.0

    def crosses(self, eps: float) -> bool:
        return self.p_hat > eps


def evaluate_rep(problem: MarginProblem, gamma: float, seed: int, rep_workers: int, rep: int) -> RepOutcome:
    """
    Collision outcome of one rep. In best-response mode a rep collides only if the replayed ego
    collides and the best response found for that rep still does.
    """
    e = problem.episode
    setup = build_counterfactual(e, problem.assignment(gamma), problem.ego_mode.ego_policy(e), seed)
    try:
        episode = realize(setup, rep)
    except SimulationError as exc:
        logger.warning(f'{e.episode_id}: rep {rep} at {problem.kind.value}={gamma:g} failed, {exc}')
        return RepOutcome(False, failed=True)
    contact = first_contact_of(e.ego, check_contacts(episode))
    if contact is None:
        return RepOutcome(False)
    if problem.ego_mode.mode != 'best_response':
        return RepOutcome(True, severity_of(contact, e.ego, problem.coefficients))
    try:
        response = best_response(e, problem.assignment(gamma), seed, rep, rep_workers, problem.coefficients)
    except BestResponseError as exc:
        logger.warning(str(exc))
        return RepOutcome(False, failed=True)
    return RepOutcome(response.collided, response.severity)


def estimate_collision_prob(problem: MarginProblem, gamma: float, n_reps: int, seed: int = 0,
                            workers: int = 1, failure_budget: float = 0.05,
                            on_grid: bool = True) -> ProbabilityPoint:
    """
    θ̂ = k/n over successful reps with a Wilson 95% interval. Deterministic kinds, and γ = 0,
    run a single rep. Reps run in parallel; with a single rep the best-response rollouts do.
    """
    if n_reps < 1:
        raise EstimationError(f'n_reps must be at least 1, got {n_reps}')
    n = problem.reps_needed(gamma, n_reps)
    rep_workers = workers if n == 1 else 1
    outcomes = parallel_map(partial(evaluate_rep, problem, gamma, seed, rep_workers), range(n),
                            workers if n > 1 else 1)

    failures = sum(o.failed for o in outcomes)
    done = [o for o in outcomes if not o.failed]
    collisions = sum(o.collided for o in done)
    if done:
        low, high = proportion_confint(collisions, len(done), alpha=1 - CONFIDENCE, method='wilson')
    else:
        low, high = 0.0, 1.0
    return ProbabilityPoint(
        intensity=gamma,
        reps=len(done),
        collisions=collisions,
        failures=failures,
        ci_low=float(max(low, 0.0)),
        ci_high=float(min(high, 1.0)),
        usable=bool(done) and failures <= failure_budget * n,
        on_grid=on_grid,
        severity=mean_profile(o.severity for o in done if o.collided),
    )
