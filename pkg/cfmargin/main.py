import argparse
import logging
from typing import Optional, Sequence

from environs import EnvError

from cfmargin.commands import commands
from cfmargin.config import EngineConfig
from cfmargin.exceptions import (
    AggregationError, BestResponseError, ConfigError, CounterfactualError, EstimationError, PolicyError,
    RecordError, ScenarioParseError, ScenarioSemanticError, SeverityError, SimulationError,
)
from cfmargin.setup_logging import setup_logging

logger = logging.getLogger(__name__)

EXIT_INPUT = 2
EXIT_SIMULATION = 3

# exit codes by error type
exit_codes = {
    ScenarioParseError: EXIT_INPUT,
    ScenarioSemanticError: EXIT_INPUT,
    RecordError: EXIT_INPUT,
    ConfigError: EXIT_INPUT,
    EnvError: EXIT_INPUT,
    CounterfactualError: EXIT_INPUT,
    AggregationError: EXIT_INPUT,
    PolicyError: EXIT_INPUT,
    SeverityError: EXIT_INPUT,
    EstimationError: EXIT_SIMULATION,
    SimulationError: EXIT_SIMULATION,
    BestResponseError: EXIT_SIMULATION,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='cfmargin', description='Counterfactual safety margins of driving episodes.')
    parser.add_argument('--log-level', help='overrides CFM_LOG_LEVEL')
    subparsers = parser.add_subparsers(dest='command', required=True)
    for command in commands:
        command.attach(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level or 'INFO')
    try:
        config = EngineConfig.from_env()
        if args.log_level is None:
            level = logging.getLevelName(config.log_level.upper())
            if isinstance(level, int):
                logging.getLogger().setLevel(level)
        logger.info(f'cfmargin {args.command}')
        args.handler(args, config)
    except tuple(exit_codes) as e:
        code = next(c for error, c in exit_codes.items() if isinstance(e, error))
        logger.error(f'{type(e).__name__}: {e}')
        return code
    return 0
