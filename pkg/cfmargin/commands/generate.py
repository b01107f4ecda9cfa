import argparse
import logging
from pathlib import Path

from cfmargin.commands.base import SCENARIO_SUFFIX, Command, write_bytes
from cfmargin.config import EngineConfig
from cfmargin.formats import write_scenario
from cfmargin.misc.synthetic import generate_suite

logger = logging.getLogger(__name__)


def arguments(parser: argparse.ArgumentParser):
    parser.add_argument('--high', type=int, default=50, help='scenarios in the high-speed band')
    parser.add_argument('--low', type=int, default=50, help='scenarios in the low-speed band')
    parser.add_argument('--seed', type=int, help='generator seed')
    parser.add_argument('--out', type=Path, required=True, help='output directory')


def handle(args: argparse.Namespace, config: EngineConfig):
    seed = config.seed if args.seed is None else args.seed
    for scenario in generate_suite(args.high, args.low, seed, config.dt, config.visibility_radius):
        write_bytes(Path(args.out) / f'{scenario.scenario_id}{SCENARIO_SUFFIX}', write_scenario(scenario))


command_generate = Command('generate', 'write the synthetic ODD suite as native scenario files', arguments, handle)
