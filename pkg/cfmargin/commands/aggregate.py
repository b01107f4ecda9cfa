import argparse
import logging
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence

from cfmargin.analytics.odd import SPEED_THRESHOLD, bootstrap_greater, rank_agents, split_by_speed
from cfmargin.analytics.reports import (
    aggregate_rows, group_results, rank_rows, results_from_rows, side_means, split_rows,
)
from cfmargin.commands.base import Command, add_output_flags, grid_of, load_episodes, settings
from cfmargin.config import EngineConfig
from cfmargin.dao.results import (
    CriticalDAO, CurveDAO, HistogramDAO, MarginDAO, PlotDAO, PointSeverityDAO, ProbabilityDAO, RankDAO, SplitDAO,
    SummaryDAO, WeightDAO,
)
from cfmargin.exceptions import AggregationError, RecordError
from cfmargin.margin.search import GridSpec, MarginResult
from cfmargin.models.episode import OddDataset

logger = logging.getLogger(__name__)

# output rows by DAO
outputs = {
    'curves': CurveDAO,
    'histogram': HistogramDAO,
    'summary': SummaryDAO,
    'critical': CriticalDAO,
    'plot': PlotDAO,
}


def read_results(directory: Path, grid: GridSpec, eps: float) -> List[MarginResult]:
    """Margin results of one sweep or bounds output directory."""
    path = MarginDAO.find(directory)
    if path is None:
        logger.error(f'No margin file in {directory}')
        raise RecordError(f'no margin file in {directory}')
    margins = MarginDAO.read(path)
    severity_path = PointSeverityDAO.find(directory)
    severities = PointSeverityDAO.read(severity_path) if severity_path else []

    results = []
    for mode in sorted({m.mode for m in margins}):
        probability_path = ProbabilityDAO.find(directory, ProbabilityDAO.stem_for(mode))
        if probability_path is None:
            raise RecordError(f'no {ProbabilityDAO.stem_for(mode)} file in {directory}')
        results += results_from_rows(ProbabilityDAO.read(probability_path), [m for m in margins if m.mode == mode],
                                     [s for s in severities if s.mode == mode], grid, eps)
    return results


def weights_for(results: Sequence[MarginResult], weights: Optional[Mapping[str, float]]) -> Optional[List[float]]:
    if weights is None:
        return None
    missing = [r.episode_id for r in results if r.episode_id not in weights]
    if missing:
        raise AggregationError(f'no weight for episode {missing[0]}')
    return [weights[r.episode_id] for r in results]


def arguments(parser: argparse.ArgumentParser):
    parser.add_argument('--results', nargs='+', type=Path, required=True,
                        help='sweep/bounds output directories, one per agent (the directory name is the label)')
    parser.add_argument('--weights', type=Path, help='per-episode weights file (episode_id, weight)')
    parser.add_argument('--episode', nargs='+', type=Path, help='episode logs for the speed split')
    parser.add_argument('--speed-threshold', type=float, default=SPEED_THRESHOLD,
                        help='split threshold on the mean initial speed, m/s')
    parser.add_argument('--grid', type=int, help='base grid points the sweeps used')
    parser.add_argument('--refine', type=int, help='bisection rounds the sweeps used')
    parser.add_argument('--eps', type=float, help='threshold the sweeps used')
    parser.add_argument('--top', type=int, default=10, help='critical episodes listed per kind')
    add_output_flags(parser)


def handle(args: argparse.Namespace, config: EngineConfig):
    config = settings(args, config)
    grid = grid_of(config)
    weights = None
    if args.weights:
        weights = {row.episode_id: row.weight for row in WeightDAO.read(args.weights)}

    per_label: Dict[str, List[MarginResult]] = {}
    for directory in args.results:
        label = Path(directory).name
        if label in per_label:
            raise RecordError(f'two result directories named {label!r}')
        per_label[label] = read_results(directory, grid, config.eps)

    split = None
    if args.episode:
        episodes = load_episodes(args.episode)
        split = split_by_speed(OddDataset(tuple(episodes)), args.speed_threshold)
        SplitDAO.write(args.out, split_rows(split, {e.episode_id: e for e in episodes}), args.format)
        known = set(split.high) | set(split.low)
        unknown = sorted({r.episode_id for results in per_label.values() for r in results} - known)
        if unknown:
            raise AggregationError(f'episode {unknown[0]} has results but no log for the speed split')

    rows: Dict[str, list] = {name: [] for name in outputs}
    for label, results in per_label.items():
        for (kind, mode), group in group_results(results).items():
            for name, part in aggregate_rows(label, group, weights_for(group, weights), args.top).items():
                rows[name] += part
            if split is None:
                continue
            for side in ('HIGH', 'LOW'):
                subset = [r for r in group if split.side_of(r.episode_id) == side]
                if subset:
                    for name, part in aggregate_rows(f'{label}:{side}', subset, weights_for(subset, weights),
                                                     args.top).items():
                        rows[name] += part
            sides = side_means(group, split)
            if len(sides['HIGH']) and len(sides['LOW']):
                p = bootstrap_greater(sides['HIGH'], sides['LOW'], seed=config.seed)
                logger.info(f'{label} {kind.value}/{mode}: p_mais3plus at margin HIGH {sides["HIGH"].mean():.4f} '
                            f'vs LOW {sides["LOW"].mean():.4f}, bootstrap p={p:.4f}')

    for name, dao in outputs.items():
        dao.write(args.out, rows[name], args.format)

    if len(per_label) > 1:
        ranked = []
        groups = {label: group_results(results) for label, results in per_label.items()}
        keys = sorted({key for g in groups.values() for key in g}, key=lambda k: (k[0].value, k[1]))
        for kind, mode in keys:
            per_agent = {label: g[(kind, mode)] for label, g in groups.items() if (kind, mode) in g}
            ranked += rank_rows(mode, rank_agents(per_agent))
        RankDAO.write(args.out, ranked, args.format)


command_aggregate = Command('aggregate', 'ODD curves, histograms, rankings and plot data', arguments, handle)
