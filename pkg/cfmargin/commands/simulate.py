import argparse
import logging
from pathlib import Path

from cfmargin.analytics.reports import contact_rows
from cfmargin.commands.base import EPISODE_SUFFIX, FORMATS, Command, load_scenarios, write_bytes
from cfmargin.config import EngineConfig
from cfmargin.dao.results import ContactDAO
from cfmargin.formats import scenario_parsers, write_episode
from cfmargin.sim.collision import check_contacts
from cfmargin.sim.simulator import simulate

logger = logging.getLogger(__name__)


def arguments(parser: argparse.ArgumentParser):
    parser.add_argument('--scenario', nargs='+', type=Path, required=True,
                        help='scenario files, or directories of *.scenario.jsonl files')
    parser.add_argument('--scenario-format', choices=sorted(scenario_parsers),
                        help='input format (by default .xml is CommonRoad, anything else native)')
    parser.add_argument('--seed', type=int, help='overrides the scenario seed')
    parser.add_argument('--horizon', type=int, help='steps to simulate (by default the scenario duration)')
    parser.add_argument('--out', type=Path, required=True, help='output directory')
    parser.add_argument('--format', choices=FORMATS, default='csv', help='contact file format')


def handle(args: argparse.Namespace, config: EngineConfig):
    for scenario in load_scenarios(args.scenario, config, args.scenario_format):
        episode = simulate(scenario, seed=args.seed, horizon=args.horizon)
        if episode.truncation:
            logger.info(f'{episode.episode_id}: stopped at step {episode.horizon}, {episode.truncation}')
        write_bytes(Path(args.out) / f'{episode.episode_id}{EPISODE_SUFFIX}', write_episode(episode))
        contacts = check_contacts(episode)
        logger.info(f'{episode.episode_id}: {len(contacts)} contact(s)')
        ContactDAO.write(args.out, contact_rows(contacts), args.format, stem=f'{episode.episode_id}.contacts')


command_simulate = Command('simulate', 'run scenarios closed loop and write episode logs', arguments, handle)
