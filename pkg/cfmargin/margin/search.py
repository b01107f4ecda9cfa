"""
Safety margin: the smallest tested intensity at which the ego's collision probability exceeds ε.

The whole base grid is always evaluated (cross-episode curves need it); the first crossing is
then refined by bisection against the previous grid point.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from cfmargin.exceptions import EstimationError
from cfmargin.margin.estimate import EgoMode, MarginProblem, Mode, ProbabilityPoint, estimate_collision_prob
from cfmargin.models.counterfactual import CounterfactualKind
from cfmargin.models.episode import Episode
from cfmargin.schemas.severity import SeverityCoefficients
from cfmargin.severity.model import DEFAULT_COEFFICIENTS, ZERO_PROFILE, SeverityProfile

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSpec:
    points: int = 11
    refine: int = 4

    def __post_init__(self):
        if self.points < 2:
            raise EstimationError(f'a grid needs at least 2 points, got {self.points}')
        if self.refine < 0:
            raise EstimationError(f'refinement depth must be non-negative, got {self.refine}')

    def intensities(self, kind: CounterfactualKind) -> List[float]:
        return [float(g) for g in np.linspace(0.0, kind.gamma_max, self.points)]

    def step(self, kind: CounterfactualKind) -> float:
        return kind.gamma_max / (self.points - 1)

    def resolution(self, kind: CounterfactualKind) -> float:
        return self.step(kind) / 2 ** self.refine


@dataclass(frozen=True)
class MarginResult:
    episode_id: str
    kind: CounterfactualKind
    mode: Mode
    margin: Optional[float]
    censored: bool
    curve: Tuple[ProbabilityPoint, ...]
    severity: SeverityProfile
    resolution: float
    eps: float

    @property
    def margin_or_inf(self) -> float:
        """Censored margins count as +∞ in comparisons."""
        return math.inf if self.censored else self.margin

    def grid_curve(self) -> Tuple[ProbabilityPoint, ...]:
        return tuple(p for p in self.curve if p.on_grid)


def _checked(point: ProbabilityPoint, episode_id: str, kind: CounterfactualKind) -> ProbabilityPoint:
    if not point.usable:
        logger.error(f'{episode_id}: {kind.value}={point.intensity:g} unusable, '
                     f'{point.failures} failed reps')
        raise EstimationError(
            f'{episode_id}: probability point at {kind.value}={point.intensity:g} is unusable '
            f'({point.failures} failed reps, {point.reps} successful)', point)
    return point


def search_margin(problem: MarginProblem, eps: float = 0.05, grid: GridSpec = GridSpec(), n_reps: int = 50,
                  seed: int = 0, workers: int = 1, failure_budget: float = 0.05) -> MarginResult:
    if not 0.0 < eps < 1.0:
        raise EstimationError(f'eps must lie in (0, 1), got {eps}')
    e, kind = problem.episode, problem.kind

    def estimate(gamma: float, on_grid: bool) -> ProbabilityPoint:
        point = estimate_collision_prob(problem, gamma, n_reps, seed, workers, failure_budget, on_grid)
        return _checked(point, e.episode_id, kind)

    curve = [estimate(gamma, True) for gamma in grid.intensities(kind)]
    crossing = next((i for i, p in enumerate(curve) if p.crosses(eps)), None)
    if crossing is None:
        logger.info(f'{e.episode_id}: {kind.value} {problem.ego_mode.mode} margin > {kind.gamma_max:g}')
        return MarginResult(e.episode_id, kind, problem.ego_mode.mode, None, True, tuple(curve),
                            ZERO_PROFILE, grid.resolution(kind), eps)

    hi = curve[crossing]
    resolution = 0.0
    if crossing > 0:
        lo = curve[crossing - 1]
        for _ in range(grid.refine):
            mid = estimate((lo.intensity + hi.intensity) / 2.0, False)
            curve.append(mid)
            if mid.crosses(eps):
                hi = mid
            else:
                lo = mid
        resolution = grid.resolution(kind)
    curve.sort(key=lambda p: (p.intensity, not p.on_grid))

    logger.info(f'{e.episode_id}: {kind.value} {problem.ego_mode.mode} margin {hi.intensity:g}')
    return MarginResult(e.episode_id, kind, problem.ego_mode.mode, hi.intensity, False, tuple(curve),
                        hi.severity, resolution, eps)


def safety_margin(e: Episode, kind: CounterfactualKind, ego_mode: EgoMode = EgoMode(), eps: float = 0.05,
                  grid: GridSpec = GridSpec(), n_reps: int = 50, seed: int = 0, workers: int = 1,
                  failure_budget: float = 0.05,
                  coefficients: SeverityCoefficients = DEFAULT_COEFFICIENTS) -> MarginResult:
    problem = MarginProblem(e, kind, ego_mode, coefficients)
    return search_margin(problem, eps, grid, n_reps, seed, workers, failure_budget)


def lower_bound_margin(e: Episode, kind: CounterfactualKind, eps: float = 0.05, grid: GridSpec = GridSpec(),
                       n_reps: int = 50, seed: int = 0, workers: int = 1, failure_budget: float = 0.05,
                       coefficients: SeverityCoefficients = DEFAULT_COEFFICIENTS) -> MarginResult:
    """Margin with the ego replaying its recorded trajectory, a lower bound on the true margin."""
    return safety_margin(e, kind, EgoMode('non_reactive'), eps, grid, n_reps, seed, workers,
                         failure_budget, coefficients)


def upper_bound_margin(e: Episode, kind: CounterfactualKind, eps: float = 0.05, grid: GridSpec = GridSpec(),
                       n_reps: int = 50, seed: int = 0, workers: int = 1, failure_budget: float = 0.05,
                       coefficients: SeverityCoefficients = DEFAULT_COEFFICIENTS) -> MarginResult:
    """Margin counting a collision only when the best response found still collides."""
    return safety_margin(e, kind, EgoMode('best_response'), eps, grid, n_reps, seed, workers,
                         failure_budget, coefficients)
