"""
Statistics over an ODD: mean collision curves, margin histograms, speed splits and agent rankings.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from scipy.integrate import trapezoid

from cfmargin.exceptions import AggregationError
from cfmargin.margin.search import MarginResult
from cfmargin.models.counterfactual import CounterfactualKind
from cfmargin.models.episode import OddDataset
from cfmargin.severity.model import SeverityProfile, mean_profile

logger = logging.getLogger(__name__)

CONFIDENCE = 0.95
SPEED_THRESHOLD = 12.0  # m/s
INSENSITIVE = 'insensitive over tested range'


@dataclass(frozen=True)
class OddSplit:
    predicate: str
    threshold: float
    high: Tuple[str, ...]
    low: Tuple[str, ...]

    def side_of(self, episode_id: str) -> str:
        return 'HIGH' if episode_id in self.high else 'LOW'


def mean_initial_speed(episode) -> float:
    return float(np.mean([episode.trajectories[a][0].speed for a in episode.agents]))


def split_by_speed(ds: OddDataset, threshold: float = SPEED_THRESHOLD) -> OddSplit:
    """HIGH iff the mean initial speed over agents exceeds ``threshold``; equality goes LOW."""
    high, low = [], []
    for episode in ds:
        (high if mean_initial_speed(episode) > threshold else low).append(episode.episode_id)
    return OddSplit('mean_initial_speed', threshold, tuple(high), tuple(low))


@dataclass(frozen=True)
class AggregateCurve:
    kind: CounterfactualKind
    mode: str
    intensities: Tuple[float, ...]
    means: Tuple[float, ...]
    half_widths: Tuple[float, ...]
    count: int
    weights: Optional[Tuple[float, ...]] = None
    severity: Tuple[SeverityProfile, ...] = ()  # per intensity, over episodes that collided there


@dataclass(frozen=True)
class MarginHistogram:
    edges: Tuple[float, ...]
    counts: Tuple[int, ...]
    censored: int


@dataclass(frozen=True)
class OddAggregate:
    curve: AggregateCurve
    histogram: MarginHistogram
    severity: SeverityProfile  # mean severity at margin over non-censored episodes
    mean_margin: Optional[float]
    censored_fraction: float


def _common_grid(results: Sequence[MarginResult]) -> Tuple[float, ...]:
    first = results[0]
    grid = tuple(p.intensity for p in first.grid_curve())
    for r in results[1:]:
        if r.kind is not first.kind or r.mode != first.mode:
            raise AggregationError(
                f'cannot aggregate {r.kind.value}/{r.mode} with {first.kind.value}/{first.mode}')
        other = tuple(p.intensity for p in r.grid_curve())
        if len(other) != len(grid) or not np.allclose(other, grid, rtol=0, atol=1e-9):
            raise AggregationError(f'{r.episode_id}: intensity grid differs from {first.episode_id}')
    return grid


def _mean_and_half_width(values: np.ndarray, weights: Optional[np.ndarray]) -> Tuple[float, float]:
    z = stats.norm.ppf(0.5 + CONFIDENCE / 2.0)
    n = len(values)
    if weights is None:
        mean = float(np.mean(values))
        if n < 2:
            return mean, 0.0
        return mean, float(z * np.std(values, ddof=1) / math.sqrt(n))
    v1, v2 = weights.sum(), (weights ** 2).sum()
    mean = float(np.average(values, weights=weights))
    n_eff = v1 ** 2 / v2
    if n_eff <= 1.0 + 1e-12:
        return mean, 0.0
    variance = float(np.sum(weights * (values - mean) ** 2) / (v1 - v2 / v1))
    return mean, float(z * math.sqrt(variance / n_eff))


def aggregate(results: Sequence[MarginResult], weights: Optional[Sequence[float]] = None) -> OddAggregate:
    """
    Per-intensity mean collision probability across episodes on the common base grid, with a
    normal-approximation 95% interval. Equal weights take the unweighted path.
    """
    if not results:
        raise AggregationError('nothing to aggregate')
    grid = _common_grid(results)
    w = None
    if weights is not None:
        if len(weights) != len(results):
            raise AggregationError(f'{len(weights)} weights for {len(results)} results')
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or not w.sum() > 0:
            raise AggregationError('weights must be non-negative with a positive sum')
        if np.all(w == w[0]):
            w = None

    table = np.array([[p.p_hat for p in r.grid_curve()] for r in results])
    means, half_widths, severity = [], [], []
    for j in range(len(grid)):
        mean, half = _mean_and_half_width(table[:, j], w)
        means.append(min(max(mean, 0.0), 1.0))
        half_widths.append(half)
        severity.append(mean_profile(
            r.grid_curve()[j].severity for r in results if r.grid_curve()[j].collisions > 0))

    curve = AggregateCurve(
        kind=results[0].kind,
        mode=results[0].mode,
        intensities=grid,
        means=tuple(means),
        half_widths=tuple(half_widths),
        count=len(results),
        weights=None if weights is None else tuple(float(x) for x in weights),
        severity=tuple(severity),
    )
    crossed = [r for r in results if not r.censored]
    counts, _ = np.histogram([r.margin for r in crossed], bins=np.asarray(grid))
    histogram = MarginHistogram(grid, tuple(int(c) for c in counts), len(results) - len(crossed))
    return OddAggregate(
        curve=curve,
        histogram=histogram,
        severity=mean_profile(r.severity for r in crossed),
        mean_margin=float(np.mean([r.margin for r in crossed])) if crossed else None,
        censored_fraction=(len(results) - len(crossed)) / len(results),
    )


@dataclass(frozen=True)
class AgentRank:
    agent: str
    kind: CounterfactualKind
    mean_margin: Optional[float]
    censored_fraction: float
    episodes: int
    severity: SeverityProfile
    note: str = ''


def rank_agents(per_agent: Mapping[str, Sequence[MarginResult]]) -> List[AgentRank]:
    """
    Orders agents by mean non-censored margin, safest first. An agent whose episodes are all
    censored ranks above any finite mean. Ties keep the input order.
    """
    ranks = []
    kinds = {r.kind for results in per_agent.values() for r in results}
    if len(kinds) > 1:
        raise AggregationError(f'rank one kind at a time, got {sorted(k.value for k in kinds)}')
    for agent, results in per_agent.items():
        if not results:
            raise AggregationError(f'agent {agent} has no results')
        crossed = [r for r in results if not r.censored]
        ranks.append(AgentRank(
            agent=agent,
            kind=results[0].kind,
            mean_margin=float(np.mean([r.margin for r in crossed])) if crossed else None,
            censored_fraction=(len(results) - len(crossed)) / len(results),
            episodes=len(results),
            severity=mean_profile(r.severity for r in crossed),
            note='' if crossed else INSENSITIVE,
        ))
    return sorted(ranks, key=lambda r: -math.inf if r.mean_margin is None else -r.mean_margin)


def critical_episodes(results: Sequence[MarginResult], k: int = 10) -> Dict[CounterfactualKind, List[MarginResult]]:
    """The ``k`` lowest-margin episodes per kind; censored episodes come last."""
    by_kind: Dict[CounterfactualKind, List[MarginResult]] = {}
    for r in results:
        by_kind.setdefault(r.kind, []).append(r)
    return {
        kind: sorted(group, key=lambda r: (r.margin_or_inf, r.episode_id))[:k]
        for kind, group in by_kind.items()
    }


def weighted_risk(curve: AggregateCurve) -> float:
    """Area under the mean collision curve divided by γ_max: 0 never collides, 1 always."""
    span = curve.intensities[-1] - curve.intensities[0]
    if span <= 0:
        return float(curve.means[0])
    return float(trapezoid(curve.means, curve.intensities) / span)


def curve_monotonicity(curve: AggregateCurve) -> float:
    """Spearman rank correlation between intensity and mean collision probability (nan if flat)."""
    return float(stats.spearmanr(curve.intensities, curve.means)[0])


def bootstrap_greater(a: Sequence[float], b: Sequence[float], n_boot: int = 10000, seed: int = 0) -> float:
    """One-sided bootstrap p-value for mean(a) > mean(b): the share of resamples where it fails."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if len(a) == 0 or len(b) == 0:
        raise AggregationError('bootstrap needs two non-empty samples')
    rng = np.random.default_rng(seed)
    mean_a = a[rng.integers(0, len(a), size=(n_boot, len(a)))].mean(axis=1)
    mean_b = b[rng.integers(0, len(b), size=(n_boot, len(b)))].mean(axis=1)
    return float(np.mean(mean_a - mean_b <= 0.0))


@dataclass(frozen=True)
class PlotPoint:
    label: str
    kind: str
    mode: str
    series: str
    intensity: float
    value: float
    half_width: float = 0.0


def plot_points(label: str, curve: AggregateCurve) -> List[PlotPoint]:
    """Long-format rows: mean collision probability and the three severity levels per intensity."""
    rows = []
    for i, gamma in enumerate(curve.intensities):
        rows.append(PlotPoint(label, curve.kind.value, curve.mode, 'collision_probability', gamma,
                              curve.means[i], curve.half_widths[i]))
        profile = curve.severity[i]
        for series, value in zip(('p_fatal', 'p_mais3plus', 'p_mais2plus'), profile.as_tuple()):
            rows.append(PlotPoint(label, curve.kind.value, curve.mode, series, gamma, value))
    return rows
