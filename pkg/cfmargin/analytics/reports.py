"""
Conversions between in-memory results and result-file rows.
"""
import logging
import math
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from cfmargin.analytics.odd import (
    AgentRank, OddAggregate, OddSplit, aggregate, critical_episodes, curve_monotonicity, mean_initial_speed,
    plot_points, weighted_risk,
)
from cfmargin.exceptions import RecordError
from cfmargin.margin.estimate import ProbabilityPoint
from cfmargin.margin.search import GridSpec, MarginResult
from cfmargin.models.counterfactual import CounterfactualKind
from cfmargin.models.episode import Episode
from cfmargin.schemas.records import (
    ContactRow, CriticalRow, CurveRow, HistogramRow, MarginRow, PlotRow, PointSeverityRow, ProbabilityRow,
    RankRow, SplitRow, SummaryRow,
)
from cfmargin.severity.model import ZERO_PROFILE, SeverityProfile
from cfmargin.sim.collision import ContactEvent

logger = logging.getLogger(__name__)

CENSORED_BUCKET = 'censored'


def probability_rows(result: MarginResult) -> List[ProbabilityRow]:
    return [
        ProbabilityRow(episode_id=result.episode_id, kind=result.kind.value, intensity=p.intensity, reps=p.reps,
                       collisions=p.collisions, p_hat=p.p_hat, ci_low=p.ci_low, ci_high=p.ci_high,
                       failures=p.failures)
        for p in result.curve
    ]


def margin_row(result: MarginResult) -> MarginRow:
    p_fatal, p_mais3, p_mais2 = result.severity.as_tuple()
    return MarginRow(episode_id=result.episode_id, kind=result.kind.value, mode=result.mode,
                     margin=result.margin, censored=result.censored, grid_resolution=result.resolution,
                     p_fatal_at_margin=p_fatal, p_mais3_at_margin=p_mais3, p_mais2_at_margin=p_mais2)


def severity_rows(result: MarginResult) -> List[PointSeverityRow]:
    rows = []
    for p in result.curve:
        p_fatal, p_mais3, p_mais2 = p.severity.as_tuple()
        rows.append(PointSeverityRow(episode_id=result.episode_id, kind=result.kind.value, mode=result.mode,
                                     intensity=p.intensity, p_fatal=p_fatal, p_mais3=p_mais3, p_mais2=p_mais2))
    return rows


def contact_rows(contacts: Iterable[ContactEvent]) -> List[ContactRow]:
    return [
        ContactRow(step=c.step, agent_a=c.agents[0], agent_b=c.agents[1], delta_v=c.delta_v,
                   impact_angle=c.impact_angle, class_a=c.impact_classes[0], class_b=c.impact_classes[1],
                   last_step=c.step if c.last_step is None else c.last_step)
        for c in contacts
    ]


def _on_grid(intensity: float, grid: Sequence[float]) -> bool:
    return any(math.isclose(intensity, g, rel_tol=0.0, abs_tol=1e-9) for g in grid)


def results_from_rows(probabilities: Sequence[ProbabilityRow], margins: Sequence[MarginRow],
                      severities: Sequence[PointSeverityRow], grid: GridSpec, eps: float) -> List[MarginResult]:
    """
    Rebuilds margin results from their files. Points on the base grid are told apart from
    bisection points by their intensity; severity defaults to zero where no row exists.
    """
    points: Dict[Tuple[str, str], List[ProbabilityRow]] = {}
    for row in probabilities:
        points.setdefault((row.episode_id, row.kind), []).append(row)
    profiles = {
        (r.episode_id, r.kind, r.mode, round(r.intensity, 9)): SeverityProfile(r.p_fatal, r.p_mais3, r.p_mais2)
        for r in severities
    }

    results = []
    for m in margins:
        kind = CounterfactualKind.parse(m.kind)
        rows = points.get((m.episode_id, m.kind))
        if not rows:
            raise RecordError(f'no probability rows for {m.episode_id}/{m.kind}')
        base = grid.intensities(kind)
        curve = tuple(
            ProbabilityPoint(
                intensity=r.intensity, reps=r.reps, collisions=r.collisions, failures=r.failures,
                ci_low=r.ci_low, ci_high=r.ci_high, on_grid=_on_grid(r.intensity, base),
                severity=profiles.get((m.episode_id, m.kind, m.mode, round(r.intensity, 9)), ZERO_PROFILE),
            )
            for r in sorted(rows, key=lambda r: r.intensity)
        )
        results.append(MarginResult(
            episode_id=m.episode_id, kind=kind, mode=m.mode, margin=m.margin, censored=m.censored, curve=curve,
            severity=SeverityProfile(m.p_fatal_at_margin, m.p_mais3_at_margin, m.p_mais2_at_margin),
            resolution=m.grid_resolution, eps=eps,
        ))
    return results


def _nan_to_none(value: float) -> Optional[float]:
    return None if value is None or math.isnan(value) else value


def aggregate_rows(label: str, results: Sequence[MarginResult], weights: Optional[Sequence[float]] = None,
                   k: int = 10) -> Dict[str, list]:
    """Curve, histogram, summary, critical-episode and plot rows for one (kind, mode) result set."""
    agg: OddAggregate = aggregate(results, weights)
    curve = agg.curve
    kind, mode = curve.kind.value, curve.mode

    curves = [
        CurveRow(label=label, kind=kind, mode=mode, intensity=g, mean=m, half_width=h, count=curve.count)
        for g, m, h in zip(curve.intensities, curve.means, curve.half_widths)
    ]
    edges = agg.histogram.edges
    histogram = [
        HistogramRow(label=label, kind=kind, mode=mode,
                     bucket=f'[{lo:.9g}, {hi:.9g}{"]" if i == len(edges) - 2 else ")"}', low=lo, high=hi, count=c)
        for i, (lo, hi, c) in enumerate(zip(edges[:-1], edges[1:], agg.histogram.counts))
    ]
    histogram.append(HistogramRow(label=label, kind=kind, mode=mode, bucket=CENSORED_BUCKET,
                                  count=agg.histogram.censored))

    p_fatal, p_mais3, p_mais2 = agg.severity.as_tuple()
    summary = [SummaryRow(
        label=label, kind=kind, mode=mode, episodes=curve.count, censored_fraction=agg.censored_fraction,
        mean_margin=agg.mean_margin, weighted_risk=weighted_risk(curve),
        monotonicity=_nan_to_none(curve_monotonicity(curve)),
        p_fatal_at_margin=p_fatal, p_mais3_at_margin=p_mais3, p_mais2_at_margin=p_mais2,
    )]

    critical = [
        CriticalRow(label=label, kind=r.kind.value, mode=r.mode, rank=i + 1, episode_id=r.episode_id,
                    margin=r.margin, censored=r.censored)
        for group in critical_episodes(results, k).values()
        for i, r in enumerate(group)
    ]
    plot = [PlotRow(**vars(p)) for p in plot_points(label, curve)]
    return {'curves': curves, 'histogram': histogram, 'summary': summary, 'critical': critical, 'plot': plot}


def rank_rows(mode: str, ranks: Sequence[AgentRank]) -> List[RankRow]:
    rows = []
    for i, r in enumerate(ranks):
        p_fatal, p_mais3, p_mais2 = r.severity.as_tuple()
        rows.append(RankRow(kind=r.kind.value, mode=mode, rank=i + 1, agent=r.agent, mean_margin=r.mean_margin,
                            censored_fraction=r.censored_fraction, episodes=r.episodes,
                            p_fatal_at_margin=p_fatal, p_mais3_at_margin=p_mais3, p_mais2_at_margin=p_mais2,
                            note=r.note))
    return rows


def split_rows(split: OddSplit, episodes: Mapping[str, Episode]) -> List[SplitRow]:
    return [
        SplitRow(episode_id=episode_id, side=split.side_of(episode_id),
                 mean_initial_speed=mean_initial_speed(episodes[episode_id]), threshold=split.threshold)
        for episode_id in sorted(episodes)
    ]


def group_results(results: Iterable[MarginResult]) -> Dict[Tuple[CounterfactualKind, str], List[MarginResult]]:
    """Results by (kind, mode), each group ordered by episode id."""
    groups: Dict[Tuple[CounterfactualKind, str], List[MarginResult]] = {}
    for r in results:
        groups.setdefault((r.kind, r.mode), []).append(r)
    return {key: sorted(group, key=lambda r: r.episode_id) for key, group in sorted(
        groups.items(), key=lambda item: (item[0][0].value, item[0][1]))}


def side_means(results: Sequence[MarginResult], split: OddSplit) -> Dict[str, np.ndarray]:
    """p_mais3plus at margin for the non-censored episodes of each split side."""
    sides: Dict[str, list] = {'HIGH': [], 'LOW': []}
    for r in results:
        if not r.censored:
            sides[split.side_of(r.episode_id)].append(r.severity.p_mais3plus)
    return {side: np.asarray(values, dtype=float) for side, values in sides.items()}
