import argparse
import logging
from typing import List, Sequence, Tuple

from cfmargin.commands.base import Command, add_estimation_flags, load_episodes, parse_kinds, settings
from cfmargin.commands.sweep import compute_margins, write_margins
from cfmargin.config import EngineConfig
from cfmargin.margin.estimate import EgoMode
from cfmargin.margin.search import MarginResult

logger = logging.getLogger(__name__)

BOUND_MODES = (EgoMode('non_reactive'), EgoMode('best_response'))


def bound_violations(results: Sequence[MarginResult]) -> List[Tuple[MarginResult, MarginResult]]:
    """Pairs where the non-reactive margin exceeds the best-response one (censored counts as +∞)."""
    lower = {(r.episode_id, r.kind): r for r in results if r.mode == 'non_reactive'}
    upper = {(r.episode_id, r.kind): r for r in results if r.mode == 'best_response'}
    return [
        (lower[key], upper[key])
        for key in sorted(lower.keys() & upper.keys(), key=lambda k: (k[0], k[1].value))
        if lower[key].margin_or_inf > upper[key].margin_or_inf
    ]


def arguments(parser: argparse.ArgumentParser):
    add_estimation_flags(parser)


def handle(args: argparse.Namespace, config: EngineConfig):
    config = settings(args, config)
    episodes = load_episodes(args.episode)
    results = compute_margins(episodes, parse_kinds(args.kind), BOUND_MODES, config)
    for lo, hi in bound_violations(results):
        logger.warning(f'{lo.episode_id}: {lo.kind.value} lower bound {lo.margin_or_inf:g} '
                       f'above upper bound {hi.margin_or_inf:g}')
    write_margins(args.out, results, args.format)


command_bounds = Command('bounds', 'non-reactive lower and best-response upper margin bounds', arguments, handle)
