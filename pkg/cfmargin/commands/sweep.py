import argparse
import logging
from typing import Dict, List, Sequence

from cfmargin.analytics.reports import margin_row, probability_rows, severity_rows
from cfmargin.commands.base import (
    Command, add_estimation_flags, coefficients_of, grid_of, load_episodes, parse_kinds, settings,
)
from cfmargin.config import EngineConfig
from cfmargin.dao.results import MarginDAO, PointSeverityDAO, ProbabilityDAO
from cfmargin.margin.estimate import EgoMode
from cfmargin.margin.search import MarginResult, safety_margin
from cfmargin.models.counterfactual import CounterfactualKind
from cfmargin.models.episode import Episode

logger = logging.getLogger(__name__)


def arguments(parser: argparse.ArgumentParser):
    add_estimation_flags(parser)
    parser.add_argument('--ego-mode', default='replay',
                        help='replay, policy:NAME or best-response')


def compute_margins(episodes: Sequence[Episode], kinds: Sequence[CounterfactualKind],
                    modes: Sequence[EgoMode], config: EngineConfig) -> List[MarginResult]:
    """Every (episode, kind, mode) margin, in input order."""
    grid = grid_of(config)
    coefficients = coefficients_of(config)
    results = []
    for e in episodes:
        for kind in kinds:
            for mode in modes:
                results.append(safety_margin(
                    e, kind, mode, eps=config.eps, grid=grid, n_reps=config.reps, seed=config.seed,
                    workers=config.workers, failure_budget=config.failure_budget, coefficients=coefficients,
                ))
    return results


def write_margins(out_dir, results: Sequence[MarginResult], fmt: str):
    by_mode: Dict[str, list] = {}
    for r in results:
        by_mode.setdefault(r.mode, []).extend(probability_rows(r))
    for mode, rows in sorted(by_mode.items()):
        ProbabilityDAO.write(out_dir, rows, fmt, stem=ProbabilityDAO.stem_for(mode))
    MarginDAO.write(out_dir, [margin_row(r) for r in results], fmt)
    PointSeverityDAO.write(out_dir, [row for r in results for row in severity_rows(r)], fmt)


def handle(args: argparse.Namespace, config: EngineConfig):
    config = settings(args, config)
    episodes = load_episodes(args.episode)
    kinds = parse_kinds(args.kind)
    mode = EgoMode.parse(args.ego_mode)
    results = compute_margins(episodes, kinds, [mode], config)
    write_margins(args.out, results, args.format)


command_sweep = Command('sweep', 'collision probability curves and safety margins', arguments, handle)
