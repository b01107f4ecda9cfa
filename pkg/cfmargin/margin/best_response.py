"""
Approximate ego best response to a fixed counterfactual: exhaustive search over a tree of
piecewise-constant command primitives, plus the replayed trajectory as an extra candidate.
"""
import itertools
import logging
from dataclasses import dataclass
from functools import partial
from typing import List, Optional, Tuple

import numpy as np

from cfmargin.counterfactuals.engine import REPLAY, build_counterfactual, rep_seed
from cfmargin.exceptions import BestResponseError, SimulationError
from cfmargin.margin.workers import parallel_map
from cfmargin.models.counterfactual import CounterfactualAssignment
from cfmargin.models.episode import Episode
from cfmargin.models.state import AgentState
from cfmargin.schemas.params import CommandSegment, PolicySpec
from cfmargin.schemas.severity import SeverityCoefficients
from cfmargin.severity.model import DEFAULT_COEFFICIENTS, SeverityProfile, lex_compare, severity_of
from cfmargin.sim.collision import check_contacts, first_contact_of
from cfmargin.sim.simulator import run

logger = logging.getLogger(__name__)

PRIMITIVE_ACCELERATIONS = (-8.0, -4.0, 0.0, 2.0)
PRIMITIVE_STEERING_RATES = (-0.4, 0.0, 0.4)
SEGMENTS = 3


@dataclass(frozen=True)
class Rollout:
    candidate: PolicySpec
    trajectory: Tuple[AgentState, ...]
    severity: SeverityProfile
    collided: bool
    deviation: float  # mean squared distance from the recorded ego positions


@dataclass(frozen=True)
class BestResponse:
    trajectory: Tuple[AgentState, ...]
    severity: SeverityProfile
    collided: bool
    candidate: PolicySpec
    evaluated: int
    failed: int


def segment_lengths(horizon: int, segments: int = SEGMENTS) -> List[int]:
    """Equal segments of horizon // segments steps; the last one takes the remainder."""
    base = horizon // segments
    return [base] * (segments - 1) + [horizon - base * (segments - 1)]


def primitive_candidates(horizon: int) -> List[PolicySpec]:
    primitives = list(itertools.product(PRIMITIVE_ACCELERATIONS, PRIMITIVE_STEERING_RATES))
    lengths = segment_lengths(horizon)
    return [
        PolicySpec(name='BestResponse', segments=tuple(
            CommandSegment(acceleration=a, steering_rate=w, steps=n)
            for (a, w), n in zip(combo, lengths)))
        for combo in itertools.product(primitives, repeat=SEGMENTS)
    ]


def mean_squared_deviation(a: Tuple[AgentState, ...], b: Tuple[AgentState, ...]) -> float:
    n = min(len(a), len(b))
    if n == 0:
        return 0.0
    pa = np.array([(s.x, s.y) for s in a[:n]])
    pb = np.array([(s.x, s.y) for s in b[:n]])
    return float(np.mean(np.sum((pa - pb) ** 2, axis=1)))


def rollout(e: Episode, assign: CounterfactualAssignment, seed: int, rep: int,
            coefficients: SeverityCoefficients, candidate: PolicySpec) -> Optional[Rollout]:
    """Closed-loop run of one ego candidate against the counterfactual others; None if it failed."""
    setup = build_counterfactual(e, assign, candidate, seed)
    try:
        episode = run(setup.simulation.with_seed(rep_seed(setup, rep)))
    except SimulationError as exc:
        logger.debug(f'{e.episode_id}: rollout failed, {exc}')
        return None
    contact = first_contact_of(e.ego, check_contacts(episode))
    trajectory = episode.trajectories[e.ego]
    return Rollout(
        candidate=candidate,
        trajectory=trajectory,
        severity=severity_of(contact, e.ego, coefficients),
        collided=contact is not None,
        deviation=mean_squared_deviation(trajectory, e.trajectories[e.ego]),
    )


def better(a: Rollout, b: Rollout) -> bool:
    """True if ``a`` strictly beats ``b``: severity levels first, then collision, then deviation."""
    order = lex_compare(a.severity, b.severity)
    if order != 0:
        return order < 0
    if a.collided != b.collided:
        return not a.collided
    return a.deviation < b.deviation


def best_response(e: Episode, assign: CounterfactualAssignment, seed: int = 0, rep: int = 0,
                  workers: int = 1, coefficients: SeverityCoefficients = DEFAULT_COEFFICIENTS) -> BestResponse:
    candidates = primitive_candidates(e.horizon) + [REPLAY]
    rollouts = parallel_map(partial(rollout, e, assign, seed, rep, coefficients), candidates, workers)

    best = None
    failed = 0
    for r in rollouts:
        if r is None:
            failed += 1
        elif best is None or better(r, best):
            best = r
    if best is None:
        raise BestResponseError(f'{e.episode_id}: all {len(candidates)} best-response rollouts failed')
    if failed:
        logger.warning(f'{e.episode_id}: {failed} of {len(candidates)} best-response rollouts failed')
    return BestResponse(best.trajectory, best.severity, best.collided, best.candidate, len(candidates), failed)
